#include "mixlab/acceptance.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <numbers>
#include <sstream>

#include "mixlab/induced.hpp"
#include "mixlab/polynomial.hpp"
#include "mixlab/random.hpp"
#include "mixlab/report.hpp"
#include "mixlab/roof.hpp"
#include "mixlab/skew_product.hpp"
#include "mixlab/solenoid.hpp"
#include "mixlab/suspension.hpp"
#include "mixlab/transfer_operator.hpp"

namespace mixlab {
namespace {

std::string num(double v, int precision = 4) {
  char buf[48];
  std::snprintf(buf, sizeof buf, "%.*g", precision, v);
  return buf;
}

// Accumulates sub-check outcomes into one verdict and a readable detail.
struct Checks {
  bool pass = true;
  std::string detail;

  void add(bool ok, const std::string& text) {
    pass = pass && ok;
    if (!detail.empty()) detail += "; ";
    detail += text + (ok ? "" : " [FAIL]");
  }
};

class Artifacts {
 public:
  explicit Artifacts(std::filesystem::path dir) : dir_(std::move(dir)) {}
  void csv(const std::string& name, const CsvTable& table) const {
    if (!dir_.empty()) write_text(dir_ / name, table.str());
  }
  void text(const std::string& name, const std::string& body) const {
    if (!dir_.empty()) write_text(dir_ / name, body);
  }

 private:
  std::filesystem::path dir_;
};

MapPtr doubling() { return std::make_shared<const ExpandingMarkovMap>(models::doubling()); }

RoofFunction one_plus_xsq(MapPtr f) {
  return RoofFunction::polynomial(std::move(f), {Rational(1), Rational(0), Rational(1)});
}

std::shared_ptr<const InvariantDensity> density_of(MapPtr f, std::size_t bins) {
  return std::make_shared<const InvariantDensity>(invariant_density(build_ulam(std::move(f), bins)));
}

Checks witness_criterion(const Artifacts& out, double seconds_budget, double& elapsed) {
  const auto start = std::chrono::steady_clock::now();
  const auto r = one_plus_xsq(doubling());
  const auto exact = witness_search(r, 4);
  const auto floating = witness_search(r, 4, {1e-10, false});
  elapsed = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  out.csv("c01_witness.csv", witness_table(exact));

  Checks c;
  const bool found = exact.verdict == CohomologyVerdict::WitnessFound && exact.witness && exact.witness->exact_gap;
  c.add(found && exact.exact && *exact.witness->exact_gap == Rational(4, 45),
        "exact gap " + (found ? exact.witness->exact_gap->str() : std::string("none")) + " (want 4/45)");
  const bool ffound = floating.verdict == CohomologyVerdict::WitnessFound && floating.witness;
  const double fgap = ffound ? floating.witness->gap : 0.0;
  c.add(ffound && std::abs(fgap - 4.0 / 45.0) <= 1e-12, "float gap error " + num(std::abs(fgap - 4.0 / 45.0), 3));
  c.add(elapsed < seconds_budget, "runtime " + num(elapsed, 3) + " s");
  return c;
}

Checks coboundary_criterion(const Artifacts& out) {
  const auto f = doubling();
  const auto r = RoofFunction::polynomial(f, {Rational(1), Rational(1)});
  const auto cert = certify_coboundary(r, [](double x) { return x; }, 10000);
  const auto search = witness_search(r, 8);
  out.csv("c02_witness.csv", witness_table(search));
  Checks c;
  c.add(cert.deviation <= 1e-12, "residual " + num(cert.deviation, 3));
  c.add(search.verdict == CohomologyVerdict::NoWitnessUpToPeriod,
        "periods <= " + std::to_string(search.searched_periods) + ": " +
            (search.verdict == CohomologyVerdict::NoWitnessUpToPeriod ? "no witness" : "witness found"));
  return c;
}

Checks transfer_criterion(const Artifacts& out, std::uint64_t seed, double& elapsed) {
  const auto start = std::chrono::steady_clock::now();
  const auto f = doubling();
  const auto op = build_ulam(f, 1024);
  const auto density = invariant_density(op);
  out.csv("c03_density.csv", density_table(density));

  Checks c;
  c.add(std::abs(density.leading_eigenvalue - 1.0) <= 1e-10,
        "|lambda1 - 1| = " + num(std::abs(density.leading_eigenvalue - 1.0), 3));
  const double sup = (density.values.array() - 1.0).abs().maxCoeff();
  c.add(sup <= 1e-8, "sup|density - 1| = " + num(sup, 3));

  Rng rng(stream_seed(seed, 3));
  auto cubic = [&rng] {
    return Polynomial<double>({rng.uniform(-1, 1), rng.uniform(-1, 1), rng.uniform(-1, 1), rng.uniform(-1, 1)});
  };
  double worst = 0.0;
  for (int i = 0; i < 20; ++i) {
    const auto g = cubic(), v = cubic();
    const auto d = duality_check(*f, [&](double x) { return g(x); }, [&](double x) { return v(x); }, 64, &density);
    worst = std::max(worst, d.discrepancy);
  }
  c.add(worst <= 1e-6, "duality worst " + num(worst, 3));

  const auto gap = spectral_gap(op, density);
  const auto dense = dense_spectrum(build_ulam(f, 64));
  c.add(std::abs(gap.second_modulus - 0.5) <= 0.01,
        "|lambda2| = " + num(gap.second_modulus, 3) + " (smooth-mode rate " + num(gap.smooth_rate, 3) + ")");
  c.add(std::abs(dense[1] - 0.5) <= 0.01, "dense N=64 |lambda2| = " + num(dense[1], 3));
  elapsed = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  c.add(elapsed < 30.0, "runtime " + num(elapsed, 3) + " s");
  return c;
}

Checks constant_roof_criterion(const Artifacts& out, std::uint64_t seed, double& elapsed) {
  const auto start = std::chrono::steady_clock::now();
  const auto f = doubling();
  const SuspensionSemiflow s(RoofFunction::constant(f, Rational(1)), density_of(f, 1024));
  const PhaseObservable cos_u = [](const PhasePoint& p) { return std::cos(2.0 * std::numbers::pi * p.u); };
  const TimeGrid grid{0.0, 0.1, 30.0 * s.mean_roof()};
  const auto series = correlation(s, cos_u, cos_u, grid, {1000000, 100, seed});
  const auto fit = fit_rate(series);
  elapsed = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  out.csv("c04_correlation.csv", correlation_table(series));
  out.text("c04_fit.txt", summary_text(fit_summary(fit)));

  Checks c;
  double worst = 0.0;
  for (std::size_t k : {0u, 5u, 10u, 20u})
    worst = std::max(worst, std::abs(series.values[k] - 0.5 * std::cos(2.0 * std::numbers::pi * series.times[k])));
  c.add(worst <= 0.01, "max |rho - cos(2 pi t)/2| at t=0,0.5,1,2: " + num(worst, 3));
  c.add(fit.verdict == DecayVerdict::NoDecay,
        std::string("fit ") + (fit.verdict == DecayVerdict::NoDecay ? "no_decay" : "decay") + ", slope CI [" +
            num(fit.ci_lo, 3) + ", " + num(fit.ci_hi, 3) + "]");
  c.add(elapsed < 120.0, "runtime " + num(elapsed, 3) + " s");
  return c;
}

Checks mixing_criterion(const Artifacts& out, std::uint64_t seed, double& elapsed) {
  const auto start = std::chrono::steady_clock::now();
  const auto f = doubling();
  const SuspensionSemiflow s(one_plus_xsq(f), density_of(f, 1024));
  const auto phi = default_observable(s);
  const TimeGrid grid{0.0, 0.1, 30.0 * s.mean_roof()};
  const auto base = correlation(s, phi, phi, grid, {1000000, 100, seed});
  const auto twice = correlation(s, phi, phi, grid, {2000000, 100, seed});
  elapsed = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  out.csv("c05_correlation.csv", correlation_table(base));
  out.csv("c05_correlation_2x.csv", correlation_table(twice));

  Checks c;
  try {
    const auto fit = fit_rate(base);
    const auto fit2 = fit_rate(twice);
    out.text("c05_fit.txt", summary_text(fit_summary(fit)));
    out.text("c05_fit_2x.txt", summary_text(fit_summary(fit2)));
    c.add(fit.verdict == DecayVerdict::Decay && fit.decay_rate > 0.0, "gamma " + num(fit.decay_rate, 4));
    c.add(fit.r_squared >= 0.9, "R^2 " + num(fit.r_squared, 3) + " on [" + num(fit.window_lo, 3) + ", " +
                                   num(fit.window_hi, 3) + "]");
    const double drift = fit.decay_rate > 0.0 ? std::abs(fit2.decay_rate - fit.decay_rate) / fit.decay_rate : 1.0;
    c.add(drift <= 0.15, "gamma at 2N " + num(fit2.decay_rate, 4) + " (drift " + num(100 * drift, 3) + "%)");
  } catch (const WindowTooShort& e) {
    c.add(false, e.what());
  }
  c.add(elapsed < 600.0, "runtime " + num(elapsed, 3) + " s");
  return c;
}

Checks tails_criterion(const Artifacts& out) {
  const auto f = models::three_branch();
  const auto ind = induce_first_return<Rational>(*f.exact(), 0, 12);
  out.csv("c06_tails.csv", tail_table(ind));
  Checks c;
  double worst = 0.0;
  for (int n = 2; n <= 12; ++n) {
    Rational expected(1);
    for (int k = 0; k < n - 2; ++k) expected = expected * Rational(2, 3);
    worst = std::max(worst, std::abs((ind.tail[static_cast<std::size_t>(n)] - expected).to_double()));
  }
  c.add(worst <= 1e-12, "max |m(R>=n) - (2/3)^(n-2)| = " + num(worst, 3) + " for n = 2..12");
  const auto st = tail_statistics(to_double(ind));
  const double rel = std::abs(st.alpha - std::log(1.5)) / std::log(1.5);
  c.add(rel <= 0.1, "alpha " + num(st.alpha, 5) + " vs ln(3/2) (" + num(100 * rel, 3) + "%)");
  return c;
}

Checks contraction_criterion(const Artifacts& out) {
  const auto model = build_solenoid({2, 20.0, 0.25, 1.0});
  const auto rep = validate_contraction(*model.skew, 100000);
  CsvTable t({"axiom", "status", "worst_probe", "location"});
  t.add({"fiber_contraction", rep.violations == 0 ? "pass" : "fail", format_number(rep.worst_ratio),
         "0"});
  t.add({"fiber_invariance", rep.invariance ? "pass" : "fail", format_number(rep.worst_radius), "0"});
  out.csv("c07_contraction.csv", t);
  Checks c;
  c.add(std::abs(rep.worst_ratio - 0.05) <= 1e-9, "worst ratio " + num(rep.worst_ratio, 10));
  c.add(rep.violations == 0, std::to_string(rep.violations) + " violations over " + std::to_string(rep.pairs));
  c.add(rep.invariance, "largest image radius " + num(rep.worst_radius, 4));
  return c;
}

Checks domination_criterion(const Artifacts& out) {
  const auto good = check_domination(build_solenoid({2, 20.0, 0.25, 1.0}));
  const auto bad = check_domination(build_solenoid({2, 10.0, 0.5, 1.0}));
  out.text("c08_domination.txt", summary_text(domination_summary(good)) + summary_text(domination_summary(bad)));
  Checks c;
  c.add(good.pass && good.product <= 0.35, "(2, 20, 1/4) product " + num(good.product, 5));
  c.add(!bad.pass && bad.product > 1.0, "(2, 10, 1/2) product " + num(bad.product, 5));
  return c;
}

Checks disintegration_criterion(const Artifacts& out) {
  const auto model = build_solenoid({2, 20.0, 0.25, 1.0});
  const int depth = 20;
  const Disintegration dis(model.skew, depth);
  const SkewObservable one = [](double, const FiberPoint&) { return 1.0; };
  const SkewObservable re = [](double, const FiberPoint& z) { return z(0); };

  std::vector<double> thetas;
  std::vector<EtaValue> values;
  double worst_re = 0.0, worst_one = 0.0;
  for (int i = 0; i < 16; ++i) {
    const double theta = (i + 0.5) / 16.0;
    const auto v = dis.evaluate(theta, {one, re}, {0.0, 1.0});
    thetas.push_back(theta);
    values.push_back(v[1]);
    worst_one = std::max(worst_one, std::abs(v[0].value - 1.0));
    worst_re = std::max(worst_re, std::abs(v[1].value));
  }
  out.csv("c09_eta.csv", eta_table(thetas, values));

  Checks c;
  c.add(worst_re <= 1e-3, "max |eta(Re z)| " + num(worst_re, 3));
  c.add(worst_one <= 1e-9, "max |eta(1) - 1| " + num(worst_one, 3));
  const double integral = eta_integral(dis, re, 4, 4);
  const auto sw = sandwich(dis, re, 4, 4);
  const double bound = std::pow(model.kappa(), depth) * 1.0;
  const double slack = bound + 1e-15;
  c.add(sw.lower - slack <= integral && integral <= sw.upper + slack,
        "integral " + num(integral, 3) + " in [" + num(sw.lower, 3) + ", " + num(sw.upper, 3) + "]");
  c.add(sw.gap() <= bound, "sandwich gap " + num(sw.gap(), 3) + " vs kappa^n Lip " + num(bound, 3));
  return c;
}

Checks tdist_criterion(const Artifacts& out) {
  const auto f = doubling();
  const auto flat = RoofFunction::cellwise_constant(f, {Rational(1), Rational(2)});
  const auto xsq = one_plus_xsq(f);
  const auto g_flat = temporal_distance_grid(flat, 0, 16, 30);
  const auto g30 = temporal_distance_grid(xsq, 0, 16, 30);
  const auto g40 = temporal_distance_grid(xsq, 0, 16, 40);
  out.csv("c10_tdist_constant.csv", tdist_table(g_flat));
  out.csv("c10_tdist_xsq.csv", tdist_table(g30));
  Checks c;
  c.add(g_flat.max_abs <= 1e-9, "locally constant roof max|phi| " + num(g_flat.max_abs, 3));
  c.add(g30.max_abs > 0.0, "1+x^2 max|phi| " + num(g30.max_abs, 5));
  const double change = (g30.values - g40.values).cwiseAbs().maxCoeff();
  const double rel = g30.max_abs > 0.0 ? change / g30.max_abs : 1.0;
  c.add(rel <= 0.01, "depth 30 vs 40 change " + num(change, 3) + " (" + num(100 * rel, 3) + "% of max)");
  return c;
}

std::string shell_quote(const std::string& s) {
  std::string out = "'";
  for (char ch : s) out += ch == '\'' ? std::string("'\\''") : std::string(1, ch);
  return out + "'";
}

std::vector<std::pair<std::string, std::string>> read_csvs(const std::filesystem::path& dir) {
  std::vector<std::pair<std::string, std::string>> files;
  if (!std::filesystem::exists(dir)) return files;
  for (const auto& e : std::filesystem::directory_iterator(dir)) {
    if (e.path().extension() != ".csv") continue;
    std::ifstream in(e.path(), std::ios::binary);
    std::ostringstream buf;
    buf << in.rdbuf();
    files.emplace_back(e.path().filename().string(), buf.str());
  }
  std::sort(files.begin(), files.end());
  return files;
}

Checks determinism_criterion(const AcceptanceOptions& options) {
  Checks c;
  if (options.cli.empty()) {
    c.add(false, "no mixlab executable given");
    return c;
  }
  const auto root = std::filesystem::temp_directory_path() /
                    ("mixlab_determinism_" + std::to_string(std::chrono::steady_clock::now().time_since_epoch().count()));
  std::vector<std::vector<std::pair<std::string, std::string>>> runs;
  for (int threads : {1, 8}) {
    const auto dir = root / ("threads" + std::to_string(threads));
    const std::string cmd = shell_quote(options.cli.string()) + " repro --seed " + std::to_string(options.seed) +
                            " --threads " + std::to_string(threads) + " --out " + shell_quote(dir.string()) +
                            " --skip-determinism > " + shell_quote((root / ("log" + std::to_string(threads))).string()) +
                            " 2>&1";
    std::filesystem::create_directories(root);
    const int rc = std::system(cmd.c_str());
    (void)rc;  // the nested run may report failing criteria; only its CSVs matter here
    runs.push_back(read_csvs(dir));
  }
  std::size_t same = 0;
  std::string differing;
  for (const auto& [name, body] : runs[0]) {
    const auto it = std::find_if(runs[1].begin(), runs[1].end(), [&](const auto& p) { return p.first == name; });
    if (it != runs[1].end() && it->second == body)
      ++same;
    else
      differing += (differing.empty() ? "" : ",") + name;
  }
  const bool ok = !runs[0].empty() && runs[0].size() == runs[1].size() && same == runs[0].size();
  c.add(ok, std::to_string(same) + "/" + std::to_string(runs[0].size()) + " CSVs byte-identical" +
                (differing.empty() ? "" : " (differ: " + differing + ")"));
  std::error_code ec;
  std::filesystem::remove_all(root, ec);
  return c;
}

}  // namespace

std::vector<CriterionResult> run_acceptance(const AcceptanceOptions& options) {
  const Artifacts out(options.out_dir);
  double ignored = 0.0;
  struct Entry {
    int id;
    const char* title;
    std::function<Checks()> run;
  };
  const std::vector<Entry> entries = {
      {1, "cohomology witness 4/45", [&] { return witness_criterion(out, 1.0, ignored); }},
      {2, "coboundary soundness", [&] { return coboundary_criterion(out); }},
      {3, "transfer operator (Ulam N=1024)", [&] { return transfer_criterion(out, options.seed, ignored); }},
      {4, "constant roof does not mix", [&] { return constant_roof_criterion(out, options.seed, ignored); }},
      {5, "exponential mixing for 1+x^2", [&] { return mixing_criterion(out, options.seed, ignored); }},
      {6, "inducing tails", [&] { return tails_criterion(out); }},
      {7, "skew-product contraction", [&] { return contraction_criterion(out); }},
      {8, "domination", [&] { return domination_criterion(out); }},
      {9, "disintegration", [&] { return disintegration_criterion(out); }},
      {10, "temporal distance dichotomy", [&] { return tdist_criterion(out); }},
      {11, "determinism across thread counts", [&] { return determinism_criterion(options); }},
  };

  std::vector<CriterionResult> results;
  for (const auto& e : entries) {
    if (!options.only.empty() && std::find(options.only.begin(), options.only.end(), e.id) == options.only.end())
      continue;
    if (e.id == 11 && !options.determinism) continue;
    CriterionResult r{e.id, e.title, false, {}, 0.0};
    const auto start = std::chrono::steady_clock::now();
    try {
      const Checks c = e.run();
      r.pass = c.pass;
      r.detail = c.detail;
    } catch (const std::exception& ex) {
      r.pass = false;
      r.detail = std::string("error: ") + ex.what();
    }
    r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    results.push_back(std::move(r));
  }
  return results;
}

std::string acceptance_table(const std::vector<CriterionResult>& results) {
  std::string out;
  for (const auto& r : results) {
    char head[160];
    std::snprintf(head, sizeof head, "%s %2d %-34s (%7.2f s): ", r.pass ? "PASS" : "FAIL", r.id, r.title.c_str(),
                  r.seconds);
    out += head + r.detail + "\n";
  }
  return out;
}

}  // namespace mixlab
