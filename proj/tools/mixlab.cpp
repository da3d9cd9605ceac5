// mixlab command-line runner.
//
// Exit codes: 0 every check passed, 1 a check failed, 2 usage/config/model error.

#include <CLI11.hpp>

#include <cmath>
#include <cstdio>
#include <iostream>
#include <numbers>
#include <optional>

#include "mixlab/acceptance.hpp"
#include "mixlab/config.hpp"
#include "mixlab/induced.hpp"
#include "mixlab/parallel.hpp"
#include "mixlab/report.hpp"
#include "mixlab/roof.hpp"
#include "mixlab/skew_product.hpp"
#include "mixlab/solenoid.hpp"
#include "mixlab/suspension.hpp"
#include "mixlab/transfer_operator.hpp"

namespace fs = std::filesystem;
using namespace mixlab;

namespace {

struct Flags {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::optional<unsigned> threads;
  std::optional<std::string> out;
  std::optional<std::string> format;
  bool skip_determinism = false;
  std::vector<int> only;
};

// Flags override the file, the file overrides defaults.
ExperimentConfig resolve(const Flags& f) {
  ExperimentConfig cfg = f.config.empty() ? ExperimentConfig{} : load_config(f.config);
  if (f.seed) cfg.run.seed = *f.seed;
  if (f.out) cfg.output.dir = *f.out;
  if (f.format) cfg.output.format = *f.format;
  if (f.threads) set_thread_count(*f.threads);
  return cfg;
}

void emit(const ExperimentConfig& cfg, const std::string& name, const std::string& body) {
  const fs::path path = fs::path(cfg.output.dir) / name;
  write_text(path, body);
  std::cout << "wrote " << path.string() << "\n";
}

void print(const Summary& s) { std::cout << summary_text(s); }

int cmd_validate(const ExperimentConfig& cfg) {
  const auto map = build_map(cfg.model);
  const auto roof = build_roof(cfg.roof, map);
  const auto maprep = validate_axioms(*map, cfg.run.probes);
  const auto roofrep = validate_roof(roof, cfg.run.probes);
  CsvTable table = axiom_table(maprep);
  for (auto& row : axiom_table(roofrep).rows) table.add(row);
  bool ok = maprep.all_pass() && roofrep.all_pass();
  if (cfg.has("solenoid")) {
    const auto model = build_solenoid(cfg.solenoid);
    const auto rep = validate_contraction(*model.skew, cfg.run.probes);
    table.add({"fiber_contraction", rep.violations == 0 ? "pass" : "fail", format_number(rep.worst_ratio), "0"});
    table.add({"fiber_invariance", rep.invariance ? "pass" : "fail", format_number(rep.worst_radius), "0"});
    ok = ok && rep.pass();
  }
  std::cout << table.str();
  emit(cfg, "validate.csv", table.str());
  return ok ? 0 : 1;
}

int cmd_srb(const ExperimentConfig& cfg) {
  const auto map = build_map(cfg.model);
  const auto op = build_ulam(map, cfg.run.bins);
  const auto density = invariant_density(op, cfg.run.tolerance);
  const auto gap = spectral_gap(op, density, cfg.run.spectral_tolerance);
  const Summary s{{"bins", std::to_string(cfg.run.bins)},
                  {"leading_eigenvalue", format_number(density.leading_eigenvalue)},
                  {"residual", format_number(density.residual)},
                  {"iterations", std::to_string(density.iterations)},
                  {"second_modulus", format_number(gap.second_modulus)},
                  {"spectral_gap", format_number(gap.gap)},
                  {"smooth_rate", format_number(gap.smooth_rate)},
                  {"gap_iterations", std::to_string(gap.iterations)}};
  print(s);
  emit(cfg, "density.csv", density_table(density).str());
  emit(cfg, "srb.txt", summary_text(s));
  return 0;
}

int cmd_cohomology(const ExperimentConfig& cfg) {
  const auto roof = build_roof(cfg.roof, build_map(cfg.model));
  const auto rep = witness_search(roof, cfg.run.max_period, {cfg.run.tolerance, true});
  const auto table = witness_table(rep);
  std::cout << table.str();
  const Summary s{{"verdict", rep.verdict == CohomologyVerdict::WitnessFound ? "witness_found" : "no_witness_up_to_period"},
                  {"searched_periods", std::to_string(rep.searched_periods)},
                  {"witness_period", std::to_string(rep.witness_period)},
                  {"classes_examined", std::to_string(rep.classes_examined)},
                  {"exact", rep.exact ? "true" : "false"},
                  {"note", rep.note()}};
  print(s);
  emit(cfg, "witness.csv", table.str());
  emit(cfg, "cohomology.txt", summary_text(s));
  return 0;
}

int cmd_tails(const ExperimentConfig& cfg) {
  const auto map = build_map(cfg.model);
  InducedMap<double> induced;
  double defect = 0.0;
  if (map->exact()) {
    const auto exact = induce_first_return<Rational>(*map->exact(), cfg.run.inducing_cell, cfg.run.inducing_depth);
    defect = full_branch_defect(*map->exact(), exact);
    emit(cfg, "tails.csv", tail_table(exact).str());
    induced = to_double(exact);
  } else {
    induced = induce_first_return<double>(*map, cfg.run.inducing_cell, cfg.run.inducing_depth);
    defect = full_branch_defect(*map, induced);
    emit(cfg, "tails.csv", tail_table(induced, cfg.run.tolerance).str());
  }
  const auto st = tail_statistics(induced);
  const Summary s{{"alpha", format_number(st.alpha)},
                  {"prefactor", format_number(st.prefactor)},
                  {"sigma0", format_number(st.sigma0)},
                  {"tilted_sum", format_number(st.tilted_sum)},
                  {"fit_points", std::to_string(st.fit_points)},
                  {"full_branch_defect", format_number(defect)}};
  print(s);
  emit(cfg, "tails.txt", summary_text(s));
  return 0;
}

int cmd_correlate(const ExperimentConfig& cfg) {
  const auto map = build_map(cfg.model);
  const auto density = std::make_shared<const InvariantDensity>(invariant_density(build_ulam(map, cfg.run.bins)));
  const SuspensionSemiflow susp(build_roof(cfg.roof, map), density);
  const PhaseObservable obs = cfg.run.observable == "cos_u"
                                  ? PhaseObservable([](const PhasePoint& p) { return std::cos(2.0 * std::numbers::pi * p.u); })
                                  : default_observable(susp);
  const double t_max = cfg.run.t_max > 0.0 ? cfg.run.t_max : 30.0 * susp.mean_roof();
  const auto series =
      correlation(susp, obs, obs, {0.0, cfg.run.dt, t_max}, {cfg.run.samples, cfg.run.batches, cfg.run.seed});
  emit(cfg, "correlation.csv", correlation_table(series).str());
  std::optional<RateFit> fit;
  try {
    fit = fit_rate(series, cfg.run.noise_floor);
  } catch (const WindowTooShort& e) {
    std::cerr << e.what() << "\n";
  }
  Summary s = fit ? fit_summary(*fit) : Summary{{"verdict", "window_too_short"}};
  s.insert(s.begin(), {"mean_roof", format_number(susp.mean_roof())});
  print(s);
  emit(cfg, "fit.txt", summary_text(s));
  if (cfg.output.format == "csv+svg") emit(cfg, "correlation.svg", svg_log_plot(series, fit ? &*fit : nullptr));
  return fit ? 0 : 1;
}

int cmd_tdist(const ExperimentConfig& cfg) {
  const auto roof = build_roof(cfg.roof, build_map(cfg.model));
  const auto grid = temporal_distance_grid(roof, cfg.run.tdist_cell, cfg.run.tdist_side, cfg.run.tdist_depth);
  const Summary s{{"max_abs", format_number(grid.max_abs)},
                  {"truncation_bound", format_number(grid.truncation_bound)},
                  {"depth", std::to_string(cfg.run.tdist_depth)}};
  print(s);
  emit(cfg, "tdist.csv", tdist_table(grid).str());
  emit(cfg, "tdist.txt", summary_text(s));
  return 0;
}

int cmd_solenoid(const ExperimentConfig& cfg) {
  const auto model = build_solenoid(cfg.solenoid);
  const auto contraction = validate_contraction(*model.skew, cfg.run.probes);
  const auto dom = check_domination(model);
  Summary s = domination_summary(dom);
  s.insert(s.begin(), {{"kappa", format_number(model.kappa())},
                       {"image_radius", format_number(model.image_radius())},
                       {"worst_contraction_ratio", format_number(contraction.worst_ratio)},
                       {"contraction_violations", std::to_string(contraction.violations)}});
  print(s);
  emit(cfg, "solenoid.txt", summary_text(s));
  emit(cfg, "cloud.csv", cloud_table(attractor_sample(model, cfg.run.points, cfg.run.burn_in, cfg.run.seed)).str());

  const Disintegration dis(model.skew, cfg.run.depth);
  const SkewObservable re = [](double, const FiberPoint& z) { return z(0); };
  std::vector<double> xs;
  std::vector<EtaValue> values;
  for (std::size_t i = 0; i < cfg.run.grid; ++i) {
    xs.push_back((static_cast<double>(i) + 0.5) / static_cast<double>(cfg.run.grid));
    values.push_back(dis(xs.back(), re, 1.0));
  }
  emit(cfg, "eta.csv", eta_table(xs, values).str());
  return dom.pass && contraction.pass() ? 0 : 1;
}

int cmd_repro(const Flags& flags, const ExperimentConfig& cfg) {
  AcceptanceOptions opt;
  opt.seed = cfg.run.seed;
  opt.out_dir = flags.out ? fs::path(*flags.out) : fs::path(cfg.output.dir) / "repro";
  opt.determinism = !flags.skip_determinism;
  opt.only = flags.only;
  std::error_code ec;
  opt.cli = fs::canonical("/proc/self/exe", ec);
  const auto results = run_acceptance(opt);
  std::cout << acceptance_table(results);
  std::size_t passed = 0;
  for (const auto& r : results) passed += r.pass ? 1 : 0;
  std::cout << passed << "/" << results.size() << " criteria passed\n";
  return passed == results.size() ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"mixlab: suspension semiflows over expanding Markov maps"};
  app.require_subcommand(1);
  Flags flags;

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", flags.config, "experiment file")->check(CLI::ExistingFile);
    sub->add_option("--seed", flags.seed, "master seed (64-bit unsigned)");
    sub->add_option("--threads", flags.threads, "worker count (default: logical cores)")->check(CLI::PositiveNumber);
    sub->add_option("--out", flags.out, "output directory");
    sub->add_option("--format", flags.format, "csv or csv+svg")->check(CLI::IsMember({"csv", "csv+svg"}));
  };

  const std::vector<std::pair<std::string, std::string>> commands = {
      {"validate", "map, roof and skew-product axiom reports"},
      {"srb", "invariant density and spectral gap of the Ulam matrix"},
      {"cohomology", "periodic-orbit witness search"},
      {"tails", "first-return inducing tails"},
      {"correlate", "correlation decay and rate fit"},
      {"tdist", "temporal distance grid"},
      {"solenoid", "solenoid build, domination, attractor cloud, disintegration"},
      {"repro", "run the acceptance suite"},
  };
  std::map<std::string, CLI::App*> subs;
  for (const auto& [name, help] : commands) {
    subs[name] = app.add_subcommand(name, help);
    add_common(subs[name]);
  }
  subs["repro"]->add_flag("--skip-determinism", flags.skip_determinism, "do not rerun with 1 and 8 threads")->group("");
  subs["repro"]->add_option("--only", flags.only, "criterion ids to run")->group("");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  try {
    const ExperimentConfig cfg = resolve(flags);
    if (subs["validate"]->parsed()) return cmd_validate(cfg);
    if (subs["srb"]->parsed()) return cmd_srb(cfg);
    if (subs["cohomology"]->parsed()) return cmd_cohomology(cfg);
    if (subs["tails"]->parsed()) return cmd_tails(cfg);
    if (subs["correlate"]->parsed()) return cmd_correlate(cfg);
    if (subs["tdist"]->parsed()) return cmd_tdist(cfg);
    if (subs["solenoid"]->parsed()) return cmd_solenoid(cfg);
    if (subs["repro"]->parsed()) return cmd_repro(flags, cfg);
  } catch (const ConfigError& e) {
    std::cerr << e.what() << "\n";
    return 2;
  } catch (const ModelError& e) {
    std::cerr << "model error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 2;
}
