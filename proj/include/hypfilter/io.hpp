#pragma once

#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "hypfilter/channel.hpp"
#include "hypfilter/config.hpp"
#include "hypfilter/density.hpp"
#include "hypfilter/version.hpp"

namespace hypf {

using json = nlohmann::json;

/// Shortest round-trip decimal representation of a double; keeps file
/// output byte-stable across runs.
inline std::string format_double(double x) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", x);
  return buf;
}

/// Write-to-temp-then-rename, so readers never observe partial files.
inline void atomic_write_file(const std::filesystem::path& path, const std::string& content) {
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::ios_base::failure("cannot open for writing: " + tmp.string());
    out << content;
  }
  std::filesystem::rename(tmp, path);
}

inline uint64_t fnv1a64(const std::string& data) {
  uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : data) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

/// Provenance record written next to every output artifact. Re-running a
/// command with the same config and seeds reproduces the artifacts byte for
/// byte; the manifest's own timings differ between runs.
struct RunManifest {
  std::string command;
  uint64_t config_hash = 0;
  std::vector<std::pair<std::string, uint64_t>> seeds;
  std::vector<std::string> artifacts;
  double wall_seconds = 0.0;

  json to_json() const {
    json j;
    j["command"] = command;
    j["config_hash"] = config_hash;
    j["version"] = kVersion;
    json s = json::array();
    for (const auto& [name, seed] : seeds) s.push_back({{"name", name}, {"seed", seed}});
    j["seed_ledger"] = s;
    j["artifacts"] = artifacts;
    j["wall_seconds"] = wall_seconds;
    return j;
  }
};

inline void write_manifest(const std::filesystem::path& dir, const RunManifest& m) {
  atomic_write_file(dir / (m.command + "_manifest.json"), m.to_json().dump(2) + "\n");
}

// ---------------------------------------------------------------------------
// density grids

inline std::string density_to_csv(const DensityGrid& g) {
  std::string out = "cell_index,value\n";
  for (int c = 0; c < g.spec.flat_count(); ++c) {
    out += std::to_string(c);
    out += ',';
    out += format_double(g.v[static_cast<size_t>(c)]);
    out += '\n';
  }
  return out;
}

/// Binary dump: a one-line JSON header with the grid layout, then the values
/// row-major as little-endian doubles.
inline void write_density_binary(const std::filesystem::path& path, const DensityGrid& g) {
  json header;
  header["chart"] = g.spec.chart == ChartKind::Torus2 ? "torus2" : "solid_torus";
  header["resolution"] = {g.spec.res[0], g.spec.res[1], g.spec.res[2]};
  header["count"] = g.spec.flat_count();
  std::string head = header.dump() + "\n";
  std::string blob(head);
  blob.append(reinterpret_cast<const char*>(g.v.data()), g.v.size() * sizeof(double));
  atomic_write_file(path, blob);
}

inline DensityGrid read_density_binary(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::ios_base::failure("cannot open density file: " + path.string());
  std::string head;
  std::getline(in, head);
  json header = json::parse(head);
  GridSpec spec;
  std::string chart = header.at("chart");
  auto res = header.at("resolution");
  if (chart == "torus2") {
    spec = GridSpec::torus(res[0], res[1]);
  } else {
    spec = GridSpec::solid_torus(res[0], res[1]);
  }
  DensityGrid g(spec);
  in.read(reinterpret_cast<char*>(g.v.data()),
          static_cast<std::streamsize>(g.v.size() * sizeof(double)));
  if (!in) throw std::ios_base::failure("truncated density file: " + path.string());
  return g;
}

// ---------------------------------------------------------------------------
// observation sequences

inline std::string observations_to_csv(const ObservationSequence& obs, int chart_dim) {
  std::string out = "# seed = " + std::to_string(obs.seed) + "\n";
  out += "step";
  int obs_dim = obs.y.empty() ? 0 : static_cast<int>(obs.y.front().size());
  for (int j = 0; j < obs_dim; ++j) out += ",y" + std::to_string(j);
  for (int j = 0; j < chart_dim; ++j) out += ",x" + std::to_string(j);
  out += "\n";
  for (int k = 0; k < obs.size(); ++k) {
    out += std::to_string(k + 1);
    for (int j = 0; j < obs_dim; ++j) {
      out += ',' + format_double(obs.y[static_cast<size_t>(k)][static_cast<size_t>(j)]);
    }
    for (int j = 0; j < chart_dim; ++j) {
      out += ',' + format_double(obs.x_truth[static_cast<size_t>(k)][j]);
    }
    out += '\n';
  }
  return out;
}

inline ObservationSequence read_observations_csv(const std::filesystem::path& path,
                                                 int obs_dim, int chart_dim) {
  std::ifstream in(path);
  if (!in) throw std::ios_base::failure("cannot open observations file: " + path.string());
  ObservationSequence seq;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    if (line[0] == '#') {
      auto eq = line.find('=');
      if (eq != std::string::npos && line.find("seed") != std::string::npos) {
        seq.seed = std::stoull(line.substr(eq + 1));
      }
      continue;
    }
    if (line.rfind("step", 0) == 0) continue;
    std::istringstream row(line);
    std::string cell;
    std::getline(row, cell, ',');  // step index
    std::vector<double> y;
    for (int j = 0; j < obs_dim; ++j) {
      std::getline(row, cell, ',');
      y.push_back(std::stod(cell));
    }
    Pt x;
    for (int j = 0; j < chart_dim; ++j) {
      std::getline(row, cell, ',');
      x[j] = std::stod(cell);
    }
    seq.y.push_back(std::move(y));
    seq.x_truth.push_back(x);
  }
  return seq;
}

// ---------------------------------------------------------------------------
// gnuplot emission

inline std::string gnuplot_decay_script(const std::string& csv_name,
                                        const std::string& title, int column) {
  std::string s;
  s += "set terminal pngcairo size 900,600\n";
  s += "set output '" + title + ".png'\n";
  s += "set logscale y\n";
  s += "set xlabel 'step'\n";
  s += "set ylabel 'distance'\n";
  s += "set datafile separator ','\n";
  s += "plot '" + csv_name + "' using 1:" + std::to_string(column) +
       " with lines title '" + title + "'\n";
  return s;
}

}  // namespace hypf
