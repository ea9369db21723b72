#pragma once

#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace hypf {

struct config_error : std::runtime_error {
  std::string field;
  config_error(const std::string& f, const std::string& msg)
      : std::runtime_error("config field '" + f + "': " + msg), field(f) {}
};

/// Sectioned key-value configuration. The file format is line oriented:
/// `[section]` headers, `key = value` entries, `#` comments. Sections and
/// keys keep their order, so parse -> serialize -> parse is the identity on
/// the stored values.
class Config {
 public:
  using Section = std::pair<std::string, std::vector<std::pair<std::string, std::string>>>;

  static Config parse_string(const std::string& text) {
    Config cfg;
    std::istringstream in(text);
    std::string line;
    std::string current;
    int lineno = 0;
    while (std::getline(in, line)) {
      ++lineno;
      std::string t = strip(line);
      if (t.empty() || t[0] == '#') continue;
      if (t.front() == '[') {
        if (t.back() != ']') {
          throw config_error("line " + std::to_string(lineno), "malformed section header");
        }
        current = strip(t.substr(1, t.size() - 2));
        cfg.section_ref(current);
        continue;
      }
      auto eq = t.find('=');
      if (eq == std::string::npos) {
        throw config_error("line " + std::to_string(lineno), "expected 'key = value'");
      }
      std::string key = strip(t.substr(0, eq));
      std::string val = strip(t.substr(eq + 1));
      if (key.empty()) {
        throw config_error("line " + std::to_string(lineno), "empty key");
      }
      cfg.set(current, key, val);
    }
    return cfg;
  }

  static Config parse_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::ios_base::failure("cannot open config file: " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_string(buf.str());
  }

  std::string serialize() const {
    std::ostringstream out;
    bool first = true;
    for (const auto& [name, entries] : sections_) {
      if (!first) out << "\n";
      first = false;
      out << "[" << name << "]\n";
      for (const auto& [k, v] : entries) out << k << " = " << v << "\n";
    }
    return out.str();
  }

  bool has(const std::string& section, const std::string& key) const {
    const auto* s = find_section(section);
    if (!s) return false;
    for (const auto& [k, v] : s->second) {
      if (k == key) return true;
    }
    return false;
  }

  std::string get(const std::string& section, const std::string& key) const {
    const auto* s = find_section(section);
    if (s) {
      for (const auto& [k, v] : s->second) {
        if (k == key) return v;
      }
    }
    throw config_error(section + "." + key, "missing required field");
  }

  std::string get_or(const std::string& section, const std::string& key,
                     const std::string& fallback) const {
    return has(section, key) ? get(section, key) : fallback;
  }

  double get_double(const std::string& section, const std::string& key) const {
    return to_double(section + "." + key, get(section, key));
  }
  double get_double_or(const std::string& section, const std::string& key,
                       double fallback) const {
    return has(section, key) ? get_double(section, key) : fallback;
  }

  long get_int(const std::string& section, const std::string& key) const {
    return to_int(section + "." + key, get(section, key));
  }
  long get_int_or(const std::string& section, const std::string& key, long fallback) const {
    return has(section, key) ? get_int(section, key) : fallback;
  }

  bool get_bool_or(const std::string& section, const std::string& key, bool fallback) const {
    if (!has(section, key)) return fallback;
    std::string v = get(section, key);
    if (v == "true" || v == "1" || v == "yes") return true;
    if (v == "false" || v == "0" || v == "no") return false;
    throw config_error(section + "." + key, "expected a boolean, got '" + v + "'");
  }

  std::vector<double> get_doubles(const std::string& section, const std::string& key) const {
    std::vector<double> out;
    for (const std::string& item : split_list(get(section, key))) {
      out.push_back(to_double(section + "." + key, item));
    }
    return out;
  }

  std::vector<long> get_ints(const std::string& section, const std::string& key) const {
    std::vector<long> out;
    for (const std::string& item : split_list(get(section, key))) {
      out.push_back(to_int(section + "." + key, item));
    }
    return out;
  }

  void set(const std::string& section, const std::string& key, const std::string& value) {
    auto& entries = section_ref(section);
    for (auto& [k, v] : entries) {
      if (k == key) {
        v = value;
        return;
      }
    }
    entries.emplace_back(key, value);
  }

  const std::vector<Section>& sections() const { return sections_; }

  bool operator==(const Config& o) const { return sections_ == o.sections_; }

 private:
  std::vector<Section> sections_;

  static std::string strip(const std::string& s) {
    size_t a = s.find_first_not_of(" \t\r\n");
    if (a == std::string::npos) return "";
    size_t b = s.find_last_not_of(" \t\r\n");
    return s.substr(a, b - a + 1);
  }

  static std::vector<std::string> split_list(const std::string& s) {
    std::vector<std::string> out;
    std::string cur;
    std::istringstream in(s);
    while (std::getline(in, cur, ',')) {
      std::string t = strip(cur);
      if (!t.empty()) out.push_back(t);
    }
    return out;
  }

  static double to_double(const std::string& field, const std::string& v) {
    try {
      size_t pos = 0;
      double x = std::stod(v, &pos);
      if (pos != v.size()) throw std::invalid_argument("trailing characters");
      return x;
    } catch (const std::exception&) {
      throw config_error(field, "expected a real number, got '" + v + "'");
    }
  }

  static long to_int(const std::string& field, const std::string& v) {
    try {
      size_t pos = 0;
      long x = std::stol(v, &pos);
      if (pos != v.size()) throw std::invalid_argument("trailing characters");
      return x;
    } catch (const std::exception&) {
      throw config_error(field, "expected an integer, got '" + v + "'");
    }
  }

  const Section* find_section(const std::string& name) const {
    for (const auto& s : sections_) {
      if (s.first == name) return &s;
    }
    return nullptr;
  }

  std::vector<std::pair<std::string, std::string>>& section_ref(const std::string& name) {
    for (auto& s : sections_) {
      if (s.first == name) return s.second;
    }
    sections_.emplace_back(name, std::vector<std::pair<std::string, std::string>>{});
    return sections_.back().second;
  }
};

}  // namespace hypf
