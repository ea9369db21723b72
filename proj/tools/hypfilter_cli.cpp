// Command-line front end: simulation, filtering, and the stability
// experiment suite, driven by a sectioned key-value config file.
//
// Exit codes: 0 ok, 2 config error, 3 missing input file, 4 numerical
// degeneracy.

#include <CLI11.hpp>
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <map>
#include <optional>

#include "hypfilter/cone_flow.hpp"
#include "hypfilter/leaves.hpp"
#include "hypfilter/config.hpp"
#include "hypfilter/filter.hpp"
#include "hypfilter/io.hpp"
#include "hypfilter/maps.hpp"
#include "hypfilter/projective.hpp"
#include "hypfilter/stability.hpp"

namespace fs = std::filesystem;
using namespace hypf;

namespace {

struct CliOptions {
  std::string config_path;
  std::string out_dir_override;
  int jobs = 0;
  bool plots = false;
  std::optional<uint64_t> seed_override;
};

struct Timer {
  std::chrono::steady_clock::time_point start = std::chrono::steady_clock::now();
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  }
};

std::unique_ptr<ChartMap> map_from_config(const Config& cfg) {
  std::string kind = cfg.get("map", "kind");
  if (kind != "cat" && kind != "solenoid") {
    throw config_error("map.kind", "expected 'cat' or 'solenoid', got '" + kind + "'");
  }
  return make_map(kind);
}

ExperimentSetup setup_from_config(const Config& cfg, const CliOptions& cli,
                                  const std::string& exp_section) {
  ExperimentSetup s;
  s.map_kind = cfg.get("map", "kind");
  s.resolution = static_cast<int>(cfg.get_int_or("grid", "resolution", 128));
  s.solenoid_nt = static_cast<int>(cfg.get_int_or("grid", "nt", 32));
  s.solenoid_nxy = static_cast<int>(cfg.get_int_or("grid", "nxy", 96));
  s.ulam_subsamples = static_cast<int>(cfg.get_int_or("grid", "ulam_subsamples", 6));
  s.observed.clear();
  for (long c : cfg.get_ints("channel", "observed")) s.observed.push_back(int(c));
  s.kappa = cfg.get_doubles("channel", "kappa");
  if (s.observed.size() != s.kappa.size()) {
    throw config_error("channel.kappa", "needs one entry per observed coordinate");
  }
  s.seed = static_cast<uint64_t>(cfg.get_int_or(exp_section, "seed", 1));
  if (cli.seed_override) s.seed = *cli.seed_override;
  s.jobs = cli.jobs > 0 ? cli.jobs : static_cast<int>(cfg.get_int_or("run", "jobs", 1));
  return s;
}

fs::path out_dir_of(const Config& cfg, const CliOptions& cli) {
  fs::path dir = cli.out_dir_override.empty() ? cfg.get_or("run", "out_dir", "out")
                                              : cli.out_dir_override;
  fs::create_directories(dir);
  return dir;
}

Pt point_from_list(const std::vector<double>& v, const std::string& field, int dim) {
  if (static_cast<int>(v.size()) != dim) {
    throw config_error(field, "expected " + std::to_string(dim) + " coordinates");
  }
  Pt p;
  for (int i = 0; i < dim; ++i) p[i] = v[static_cast<size_t>(i)];
  return p;
}

json fit_to_json(const RateFit& f) {
  return json{{"beta_tilde", f.beta_tilde}, {"slope", f.slope},
              {"intercept", f.intercept},  {"r2", f.r2},
              {"resid_autocorr", f.resid_autocorr}, {"n_points", f.n_points}};
}

// -------------------------------------------------------------------------

int cmd_simulate(const Config& cfg, const CliOptions& cli) {
  Timer timer;
  auto map = map_from_config(cfg);
  ExperimentSetup setup = setup_from_config(cfg, cli, "simulate");
  VonMisesChannel ch = channel_of(setup);
  int steps = static_cast<int>(cfg.get_int("simulate", "steps"));
  Pt x0 = point_from_list(cfg.get_doubles("simulate", "x0"), "simulate.x0",
                          chart_dim(map->chart()));

  ObservationSequence obs = simulate_joint(*map, ch, x0, steps, setup.seed);
  fs::path dir = out_dir_of(cfg, cli);
  atomic_write_file(dir / "observations.csv",
                    observations_to_csv(obs, chart_dim(map->chart())));

  RunManifest m;
  m.command = "simulate";
  m.config_hash = fnv1a64(cfg.serialize());
  m.seeds = {{"simulate", setup.seed}};
  m.artifacts = {(dir / "observations.csv").string()};
  m.wall_seconds = timer.seconds();
  write_manifest(dir, m);
  return 0;
}

int cmd_filter(const Config& cfg, const CliOptions& cli) {
  Timer timer;
  auto map = map_from_config(cfg);
  ExperimentSetup setup = setup_from_config(cfg, cli, "filter");
  VonMisesChannel ch = channel_of(setup);
  GridSpec spec = grid_of(setup, *map);

  fs::path obs_path = cfg.get("filter", "observations");
  if (!fs::exists(obs_path)) {
    std::cerr << "missing input file: " << obs_path << "\n";
    return 3;
  }
  ObservationSequence obs =
      read_observations_csv(obs_path, ch.obs_dim(), chart_dim(map->chart()));

  std::unique_ptr<TransferBackend> backend;
  std::string backend_kind = cfg.get_or(
      "filter", "backend", map->chart() == ChartKind::Torus2 ? "pointwise" : "ulam");
  if (backend_kind == "pointwise") {
    backend = std::make_unique<PointwiseBackend>(*map);
  } else if (backend_kind == "ulam") {
    backend = std::make_unique<UlamBackend>(
        ulam_build(*map, spec, setup.ulam_subsamples, setup.jobs));
  } else {
    throw config_error("filter.backend", "expected 'pointwise' or 'ulam'");
  }

  int prior_modes = static_cast<int>(cfg.get_int_or("filter", "prior_modes", 0));
  DensityGrid prior = DensityGrid::uniform(spec);
  if (prior_modes > 0) {
    Rng prior_rng(static_cast<uint64_t>(cfg.get_int_or("filter", "prior_seed", 7)));
    prior = LogTrigPrior::random(prior_rng, prior_modes).discretize(spec);
  }

  std::vector<TestFunction> panel = map->chart() == ChartKind::Torus2
                                        ? default_panel_torus()
                                        : default_panel_solid_torus();
  fs::path dir = out_dir_of(cfg, cli);
  std::string csv = "step,log_normalizer";
  for (int j = 0; j < spec.dim(); ++j) csv += ",mean" + std::to_string(j);
  for (const auto& psi : panel) csv += "," + psi.name;
  csv += "\n";

  auto states = filter_run(prior, obs, ch, *backend);
  for (const auto& s : states) {
    csv += std::to_string(s.step) + ',' + format_double(s.log_normalizer);
    Pt mean = posterior_mean(s);
    for (int j = 0; j < spec.dim(); ++j) csv += ',' + format_double(mean[j]);
    for (const auto& psi : panel) csv += ',' + format_double(posterior_expectation(s, psi));
    csv += '\n';
  }
  atomic_write_file(dir / "filter_trajectory.csv", csv);
  write_density_binary(dir / "posterior_final.bin", states.back().density);
  atomic_write_file(dir / "posterior_final.csv", density_to_csv(states.back().density));

  RunManifest m;
  m.command = "filter";
  m.config_hash = fnv1a64(cfg.serialize());
  m.seeds = {{"observations", obs.seed},
             {"prior", static_cast<uint64_t>(cfg.get_int_or("filter", "prior_seed", 7))}};
  m.artifacts = {(dir / "filter_trajectory.csv").string(),
                 (dir / "posterior_final.bin").string(),
                 (dir / "posterior_final.csv").string()};
  m.wall_seconds = timer.seconds();
  write_manifest(dir, m);
  return 0;
}

int cmd_twin(const Config& cfg, const CliOptions& cli) {
  Timer timer;
  auto map = map_from_config(cfg);
  if (map->chart() != ChartKind::Torus2) {
    throw config_error("map.kind", "the twin experiment runs on torus maps");
  }
  TwinConfig tc;
  tc.setup = setup_from_config(cfg, cli, "twin");
  tc.horizon = static_cast<int>(cfg.get_int_or("twin", "horizon", 200));
  tc.n_seeds = static_cast<int>(cfg.get_int_or("twin", "seeds", 20));
  tc.burn_in = static_cast<int>(cfg.get_int_or("twin", "burn_in", 20));
  tc.fit_floor = cfg.get_double_or("twin", "fit_floor", 1e-13);
  tc.prior_modes = static_cast<int>(cfg.get_int_or("twin", "prior_modes", 3));

  TwinReport rep = twin_experiment(*map, tc);
  fs::path dir = out_dir_of(cfg, cli);

  json j;
  j["median_r2"] = rep.median_r2;
  j["mean_beta"] = rep.mean_beta;
  j["beta_dispersion"] = rep.beta_dispersion;
  j["negative_slopes"] = rep.negative_slopes;
  j["eventually_monotone_fraction"] = rep.eventually_monotone_fraction;
  j["n_seeds"] = tc.n_seeds;
  json seeds = json::array();
  std::vector<std::string> artifacts;
  for (size_t s = 0; s < rep.seeds.size(); ++s) {
    const auto& t = rep.seeds[s];
    seeds.push_back({{"fit", fit_to_json(t.fit)}, {"fit_end", t.fit_end},
                     {"fit_ok", t.fit_ok}});
    std::string csv = "step,tv,theta_plus,psi_gap\n";
    for (size_t k = 0; k < t.tv.size(); ++k) {
      csv += std::to_string(k + 1) + ',' + format_double(t.tv[k]) + ',' +
             format_double(t.theta[k]) + ',' + format_double(t.psi_gap[k]) + '\n';
    }
    fs::path f = dir / ("twin_seed" + std::to_string(s) + ".csv");
    atomic_write_file(f, csv);
    artifacts.push_back(f.string());
  }
  j["seeds"] = seeds;
  atomic_write_file(dir / "twin_report.json", j.dump(2) + "\n");
  artifacts.push_back((dir / "twin_report.json").string());

  if (cli.plots) {
    atomic_write_file(dir / "twin_decay.gp",
                      gnuplot_decay_script("twin_seed0.csv", "twin_decay", 4));
    artifacts.push_back((dir / "twin_decay.gp").string());
  }

  RunManifest m;
  m.command = "twin";
  m.config_hash = fnv1a64(cfg.serialize());
  m.seeds = {{"twin", tc.setup.seed}};
  m.artifacts = artifacts;
  m.wall_seconds = timer.seconds();
  write_manifest(dir, m);
  return 0;
}

int cmd_pullback(const Config& cfg, const CliOptions& cli) {
  Timer timer;
  auto map = map_from_config(cfg);
  ExperimentSetup setup = setup_from_config(cfg, cli, "pullback");
  VonMisesChannel ch = channel_of(setup);
  GridSpec spec = grid_of(setup, *map);

  std::vector<long> ladder = cfg.has("pullback", "ladder")
                                 ? cfg.get_ints("pullback", "ladder")
                                 : std::vector<long>{40, 80, 160, 320};
  int depth_max = static_cast<int>(2 * *std::max_element(ladder.begin(), ladder.end()));

  std::unique_ptr<TransferBackend> backend;
  if (map->chart() == ChartKind::Torus2) {
    backend = std::make_unique<PointwiseBackend>(*map);
  } else {
    backend = std::make_unique<UlamBackend>(
        ulam_build(*map, spec, setup.ulam_subsamples, setup.jobs));
  }

  Rng rng(setup.seed);
  Pt x0;
  if (map->chart() == ChartKind::Torus2) {
    x0 = make_pt(rng.uniform(), rng.uniform());
  } else {
    double r = std::sqrt(rng.uniform()) * 0.5;
    double th = rng.uniform(0.0, 2.0 * M_PI);
    x0 = make_pt(rng.uniform(), r * std::cos(th), r * std::sin(th));
  }
  ObservationSequence obs =
      simulate_joint(*map, ch, x0, depth_max, derive_seed(setup.seed, 1));
  std::vector<std::vector<double>> win(obs.y.begin(), obs.y.end());

  std::vector<TestFunction> panel = map->chart() == ChartKind::Torus2
                                        ? default_panel_torus()
                                        : default_panel_solid_torus();

  fs::path dir = out_dir_of(cfg, cli);
  std::string csv = "depth,cauchy_gap\n";
  json rungs = json::array();
  FilterState deepest;
  for (long n : ladder) {
    std::vector<std::vector<double>> full(win.end() - 2 * n, win.end());
    std::vector<std::vector<double>> half(win.end() - n, win.end());
    FilterState a = pullback_run(spec, full, ch, *backend);
    FilterState b = pullback_run(spec, half, ch, *backend);
    double gap = 0.0;
    json integrals;
    for (const auto& psi : panel) {
      double va = posterior_expectation(a, psi);
      gap = std::max(gap, std::fabs(va - posterior_expectation(b, psi)));
      integrals[psi.name] = va;
    }
    rungs.push_back({{"depth", n}, {"gap", gap}, {"integrals", integrals}});
    csv += std::to_string(n) + ',' + format_double(gap) + '\n';
    deepest = std::move(a);
  }

  json j;
  j["ladder"] = rungs;
  atomic_write_file(dir / "pullback_report.json", j.dump(2) + "\n");
  atomic_write_file(dir / "pullback_gaps.csv", csv);
  write_density_binary(dir / "pullback_density.bin", deepest.density);

  if (cli.plots) {
    atomic_write_file(dir / "pullback_decay.gp",
                      gnuplot_decay_script("pullback_gaps.csv", "pullback_decay", 2));
  }

  RunManifest m;
  m.command = "pullback";
  m.config_hash = fnv1a64(cfg.serialize());
  m.seeds = {{"pullback", setup.seed}};
  m.artifacts = {(dir / "pullback_report.json").string(),
                 (dir / "pullback_gaps.csv").string(),
                 (dir / "pullback_density.bin").string()};
  m.wall_seconds = timer.seconds();
  write_manifest(dir, m);
  return 0;
}

int cmd_cone_check(const Config& cfg, const CliOptions& cli) {
  Timer timer;
  auto map = map_from_config(cfg);
  ExperimentSetup setup = setup_from_config(cfg, cli, "cone");
  VonMisesChannel ch = channel_of(setup);

  double nu = cfg.get_double_or("cone", "nu", 0.5);
  double mu_hat = cfg.get_double_or("cone", "mu_hat", 0.5);
  double delta = cfg.get_double_or("cone", "delta", 0.8);
  double headroom = cfg.get_double_or("cone", "headroom", 1.05);
  int truncation = static_cast<int>(cfg.get_int_or("cone", "truncation", 80));

  ConeEnvironment env =
      ConeEnvironment::from_map(*map, lipschitz_bound(ch), nu, mu_hat, delta);
  // optional deterministic modulation of the channel constant, the hook for
  // experiments with a genuinely step-dependent budget
  double g_mod = cfg.get_double_or("cone", "g_modulation_amp", 0.0);
  if (g_mod != 0.0) {
    double base = lipschitz_bound(ch);
    env.G = [base, g_mod](long n) {
      return base * (1.0 + g_mod * std::sin(0.7 * double(n)) * std::cos(1.3 * double(n) + 0.4));
    };
  }
  StationaryParams sp = stationary_cone_params(env, truncation, headroom);
  InvarianceSlack slack = invariance_slacks(env, truncation, headroom);
  StepConstants sc = step_constants(env, 0, truncation);
  TauBounds tau = tau_bounds(0.5);

  json j;
  j["environment"] = {{"lambda_s", env.lambda_s}, {"lambda_u", env.lambda_u},
                      {"a0", env.a0},             {"nu0", env.nu0},
                      {"K1", env.K1},             {"K2", env.K2},
                      {"K3", env.K3},             {"channel_G", lipschitz_bound(ch)},
                      {"mu", env.mu},             {"nu", env.nu},
                      {"mu_hat", env.mu_hat},     {"delta", env.delta}};
  j["stationary"] = {{"a", sp.params.a},          {"a_hat", sp.params.a_hat},
                     {"c", sp.params.c},          {"a_raw", sp.a_raw},
                     {"a_hat_raw", sp.a_hat_raw}, {"c_raw", sp.c_raw},
                     {"tail_bound", sp.tail_bound}, {"headroom", sp.headroom},
                     {"truncation", sp.truncation}};
  j["invariance_slack"] = {{"a1", slack.a1}, {"a2", slack.a2}, {"a3", slack.a3},
                           {"a4", slack.a4}, {"c", slack.c},   {"min", slack.min()}};
  j["tau"] = {{"lambda", 0.5}, {"tau1", tau.tau1}, {"tau2", tau.tau2},
              {"analytic_diameter_a1", analytic_diameter(1.0, 0.5)}};
  j["step_constants"] = {{"K", sc.K}, {"K5", sc.K5}, {"K0", sc.K0}};

  // one-step filter matrix contraction study on the grid cone
  if (map->chart() == ChartKind::Torus2) {
    int res = static_cast<int>(cfg.get_int_or("cone", "grid_resolution", 64));
    int n_pairs = static_cast<int>(cfg.get_int_or("cone", "diameter_pairs", 100));
    GridSpec spec = GridSpec::torus(res, res);
    UlamMatrix U = ulam_build(*map, spec, 8, setup.jobs);
    Rng rng(setup.seed);
    Pt xs = make_pt(rng.uniform(), rng.uniform());
    ObservationSequence one = simulate_joint(*map, ch, xs, 1, derive_seed(setup.seed, 5));
    auto apply_filter = [&](const DensityGrid& d) {
      DensityGrid out = U.apply(d);
      for (int c = 0; c < spec.flat_count(); ++c) {
        out.v[static_cast<size_t>(c)] *=
            std::exp(log_likelihood_base(ch, one.y[0], spec.center(c)));
      }
      return out;
    };
    Rng prng(derive_seed(setup.seed, 6));
    std::vector<DensityGrid> inputs, images;
    int n_samples = std::max(3, static_cast<int>(std::ceil(std::sqrt(2.0 * n_pairs))) + 1);
    for (int i = 0; i < n_samples; ++i) {
      double amp = prng.uniform(0.3, 3.0);
      DensityGrid d = LogTrigPrior::random(prng, 4, 2, amp).discretize(spec);
      inputs.push_back(d);
      images.push_back(apply_filter(d));
    }
    double dhat = 0.0;
    for (size_t i = 0; i < images.size(); ++i) {
      for (size_t jx = i + 1; jx < images.size(); ++jx) {
        dhat = std::max(dhat, theta_plus_grid(images[i], images[jx]).theta);
      }
    }
    double worst_ratio = 0.0;
    int pairs = 0;
    for (size_t i = 0; i < images.size() && pairs < n_pairs; ++i) {
      for (size_t jx = i + 1; jx < images.size() && pairs < n_pairs; ++jx, ++pairs) {
        double before = theta_plus_grid(inputs[i], inputs[jx]).theta;
        double after = theta_plus_grid(images[i], images[jx]).theta;
        if (before > 0.0) worst_ratio = std::max(worst_ratio, after / before);
      }
    }
    j["matrix_contraction"] = {{"resolution", res},
                               {"pairs", pairs},
                               {"sampled_diameter", dhat},
                               {"birkhoff_factor", birkhoff_bound(dhat)},
                               {"worst_ratio", worst_ratio}};

    // chain bound on the full cone metric: theta_+ diameter plus the
    // delta-dependent correction; reported, never asserted
    TauBounds tc = tau_bounds(delta);
    double gamma1 = cfg.get_double_or("cone", "Gamma1", 1.0);
    double gamma2 = cfg.get_double_or("cone", "Gamma2", 1.0);
    j["theta_chain_bound"] = {
        {"value", dhat + std::log(tc.tau2 / tc.tau1)},
        {"tau1_c", tc.tau1},
        {"tau2_c", tc.tau2},
        {"Gamma1", gamma1},
        {"Gamma2", gamma2},
        {"provenance", "Gamma defaults from the uniform leaf volumes of the flat chart; "
                       "override in [cone] for other geometries"}};

    // leaf-cone diameter study: sampled pairwise distances against the
    // analytic bound for the shrunk cone
    double leaf_a = cfg.get_double_or("cone", "leaf_a", 2.0);
    double leaf_lambda = cfg.get_double_or("cone", "leaf_lambda", 0.5);
    double leaf_half = cfg.get_double_or("cone", "leaf_half_length", 0.45);
    int leaf_samples = int(cfg.get_int_or("cone", "leaf_samples", 64));
    int leaf_members = int(cfg.get_int_or("cone", "leaf_members", 16));
    CatMap cat;
    StableLeaf leaf = stable_leaf_through(cat, make_pt(0.6, 0.2), leaf_half, leaf_samples);
    Rng lrng(derive_seed(setup.seed, 8));
    std::vector<std::vector<double>> members;
    for (int i = 0; i < leaf_members; ++i) {
      double amp = lrng.uniform(0.2, 1.0);
      double freq = lrng.uniform(0.3, 1.0);
      double phase = lrng.uniform(0.0, 2.0 * M_PI);
      double scale = leaf_lambda * leaf_a * amp / freq;
      std::vector<double> v(static_cast<size_t>(leaf.size()));
      for (int k = 0; k < leaf.size(); ++k) {
        v[size_t(k)] = std::exp(scale * std::sin(freq * leaf.params[size_t(k)] + phase));
      }
      members.push_back(std::move(v));
    }
    auto metric = [&](std::span<const double> f, std::span<const double> g) {
      return theta_holder(leaf.params, f, g, leaf_a, 1.0);
    };
    DiameterEstimate est = sampled_diameter(members, metric);
    j["leaf_cone_diameter"] = {{"a", leaf_a},
                               {"lambda", leaf_lambda},
                               {"sampled", est.sampled},
                               {"infinite_pairs", est.infinite_pairs},
                               {"analytic_bound", analytic_diameter(leaf_a, leaf_lambda)},
                               {"within_bound", est.sampled <= analytic_diameter(leaf_a, leaf_lambda)}};
  }

  fs::path dir = out_dir_of(cfg, cli);
  atomic_write_file(dir / "cone_report.json", j.dump(2) + "\n");

  RunManifest m;
  m.command = "cone-check";
  m.config_hash = fnv1a64(cfg.serialize());
  m.seeds = {{"cone", setup.seed}};
  m.artifacts = {(dir / "cone_report.json").string()};
  m.wall_seconds = timer.seconds();
  write_manifest(dir, m);
  return 0;
}

int cmd_report(const Config& cfg, const CliOptions& cli) {
  Timer timer;
  fs::path dir = out_dir_of(cfg, cli);
  json summary;
  bool any = false;
  for (const char* name :
       {"twin_report.json", "pullback_report.json", "cone_report.json"}) {
    fs::path p = dir / name;
    if (!fs::exists(p)) continue;
    std::ifstream in(p);
    summary[name] = json::parse(in);
    any = true;
  }
  if (!any) {
    std::cerr << "missing input: no report files found in " << dir << "\n";
    return 3;
  }
  atomic_write_file(dir / "summary.json", summary.dump(2) + "\n");

  if (cli.plots) {
    if (fs::exists(dir / "twin_seed0.csv")) {
      atomic_write_file(dir / "twin_decay.gp",
                        gnuplot_decay_script("twin_seed0.csv", "twin_decay", 4));
    }
    if (fs::exists(dir / "pullback_gaps.csv")) {
      atomic_write_file(dir / "pullback_decay.gp",
                        gnuplot_decay_script("pullback_gaps.csv", "pullback_decay", 2));
    }
  }

  RunManifest m;
  m.command = "report";
  m.config_hash = fnv1a64(cfg.serialize());
  m.artifacts = {(dir / "summary.json").string()};
  m.wall_seconds = timer.seconds();
  write_manifest(dir, m);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"nonlinear filter laboratory for hyperbolic signal dynamics"};
  app.require_subcommand(1);

  CliOptions cli;
  app.add_option("--jobs", cli.jobs, "worker threads for realization-parallel runs");
  app.add_flag("--plots", cli.plots, "emit gnuplot scripts next to the CSV outputs");
  uint64_t seed_value = 0;
  auto* seed_opt =
      app.add_option("--seed-override", seed_value, "replace the experiment master seed");

  std::map<std::string, int (*)(const Config&, const CliOptions&)> handlers{
      {"simulate", &cmd_simulate}, {"filter", &cmd_filter},
      {"twin", &cmd_twin},         {"pullback", &cmd_pullback},
      {"cone-check", &cmd_cone_check}, {"report", &cmd_report}};
  const std::map<std::string, std::string> descriptions{
      {"simulate", "write a signal orbit and observation CSV"},
      {"filter", "run the grid filter over a stored observation file"},
      {"twin", "two-prior forgetting experiment with rate fits"},
      {"pullback", "pullback densities and their Cauchy gaps"},
      {"cone-check", "cone parameters, slacks, and matrix contraction"},
      {"report", "aggregate experiment outputs into one summary"}};
  for (const auto& [name, fn] : handlers) {
    CLI::App* sub = app.add_subcommand(name, descriptions.at(name));
    sub->fallthrough();  // global flags may follow the subcommand
    sub->add_option("--config", cli.config_path, "experiment config file")->required();
    sub->add_option("--out-dir", cli.out_dir_override, "override [run] out_dir");
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }
  if (seed_opt->count() > 0) cli.seed_override = seed_value;

  try {
    if (!std::filesystem::exists(cli.config_path)) {
      std::cerr << "missing input file: " << cli.config_path << "\n";
      return 3;
    }
    Config cfg = Config::parse_file(cli.config_path);
    std::string sub = app.get_subcommands().front()->get_name();
    return handlers.at(sub)(cfg, cli);
  } catch (const config_error& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const filter_degenerate_error& e) {
    std::cerr << e.what() << "\n";
    return 4;
  } catch (const std::ios_base::failure& e) {
    std::cerr << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
}
