#include "mixlab/config.hpp"

#include <charconv>
#include <fstream>
#include <functional>
#include <set>
#include <sstream>

namespace mixlab {
namespace {

std::string trim(std::string_view s) {
  const auto a = s.find_first_not_of(" \t\r");
  if (a == std::string_view::npos) return {};
  const auto b = s.find_last_not_of(" \t\r");
  return std::string(s.substr(a, b - a + 1));
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string item;
  std::istringstream in(s);
  while (std::getline(in, item, sep)) out.push_back(trim(item));
  if (!s.empty() && s.back() == sep) out.emplace_back();
  return out;
}

template <typename Int>
Int parse_int(const std::string& s) {
  Int v{};
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) throw std::invalid_argument("expected an integer, got '" + s + "'");
  return v;
}

double parse_real(const std::string& s) {
  if (s.find('/') != std::string::npos) return Rational::parse(s).to_double();
  std::size_t pos = 0;
  double v = 0.0;
  try {
    v = std::stod(s, &pos);
  } catch (const std::exception&) {
    pos = std::string::npos;
  }
  if (pos != s.size()) throw std::invalid_argument("expected a number, got '" + s + "'");
  return v;
}

std::vector<Rational> rational_list(const std::string& s) {
  std::vector<Rational> out;
  for (const auto& item : split(s, ',')) out.push_back(Rational::parse(item));
  return out;
}

std::vector<double> real_list(const std::string& s) {
  std::vector<double> out;
  if (trim(s).empty()) return out;
  for (const auto& item : split(s, ',')) out.push_back(parse_real(item));
  return out;
}

template <typename T>
T positive(T v, const char* what) {
  if (!(v > T(0))) throw std::invalid_argument(std::string(what) + " must be positive");
  return v;
}

std::string one_of(const std::string& v, std::initializer_list<const char*> options) {
  for (const char* o : options)
    if (v == o) return v;
  std::string list;
  for (const char* o : options) list += (list.empty() ? "" : ", ") + std::string(o);
  throw std::invalid_argument("'" + v + "' is not one of: " + list);
}

using Handler = std::function<void(ExperimentConfig&, const std::string&)>;

const std::map<std::string, std::map<std::string, Handler>>& handlers() {
  static const std::map<std::string, std::map<std::string, Handler>> table = {
      {"model",
       {
           {"kind", [](auto& c, auto& v) { c.model.kind = one_of(v, {"builtin", "affine_markov"}); }},
           {"name",
            [](auto& c, auto& v) {
              c.model.name = one_of(v, {"doubling", "three_branch", "circle_expansion", "perturbed_doubling"});
            }},
           {"degree", [](auto& c, auto& v) { c.model.degree = parse_int<int>(v); }},
           {"parameter", [](auto& c, auto& v) { c.model.parameter = parse_real(v); }},
           {"breakpoints", [](auto& c, auto& v) { c.model.breakpoints = rational_list(v); }},
           {"slopes", [](auto& c, auto& v) { c.model.slopes = rational_list(v); }},
           {"intercepts", [](auto& c, auto& v) { c.model.intercepts = rational_list(v); }},
           {"transitions",
            [](auto& c, auto& v) {
              c.model.transitions.clear();
              for (const auto& row : split(v, ';')) {
                std::vector<int> r;
                std::istringstream in(row);
                std::string tok;
                while (in >> tok) r.push_back(parse_int<int>(tok));
                c.model.transitions.push_back(std::move(r));
              }
            }},
           {"expansion_bound", [](auto& c, auto& v) { c.model.expansion_bound = positive(parse_real(v), "expansion_bound"); }},
           {"refine", [](auto& c, auto& v) { c.model.refine = parse_int<int>(v); }},
       }},
      {"roof",
       {
           {"kind",
            [](auto& c, auto& v) {
              c.roof.kind = one_of(v, {"constant", "polynomial", "piecewise_polynomial", "cellwise", "trigonometric"});
            }},
           {"coefficients", [](auto& c, auto& v) { c.roof.coefficients = rational_list(v); }},
           {"branches",
            [](auto& c, auto& v) {
              c.roof.branches.clear();
              for (const auto& row : split(v, ';')) c.roof.branches.push_back(rational_list(row));
            }},
           {"values", [](auto& c, auto& v) { c.roof.values = rational_list(v); }},
           {"a0", [](auto& c, auto& v) { c.roof.a0 = parse_real(v); }},
           {"cos", [](auto& c, auto& v) { c.roof.cos_coeffs = real_list(v); }},
           {"sin", [](auto& c, auto& v) { c.roof.sin_coeffs = real_list(v); }},
       }},
      {"solenoid",
       {
           {"degree", [](auto& c, auto& v) { c.solenoid.degree = parse_int<int>(v); }},
           {"contraction", [](auto& c, auto& v) { c.solenoid.contraction = parse_real(v); }},
           {"offset", [](auto& c, auto& v) { c.solenoid.offset = parse_real(v); }},
           {"fiber_radius", [](auto& c, auto& v) { c.solenoid.fiber_radius = positive(parse_real(v), "fiber_radius"); }},
       }},
      {"run",
       {
           {"seed", [](auto& c, auto& v) { c.run.seed = parse_int<std::uint64_t>(v); }},
           {"samples", [](auto& c, auto& v) { c.run.samples = positive(parse_int<std::size_t>(v), "samples"); }},
           {"batches", [](auto& c, auto& v) { c.run.batches = positive(parse_int<std::size_t>(v), "batches"); }},
           {"bins", [](auto& c, auto& v) { c.run.bins = positive(parse_int<std::size_t>(v), "bins"); }},
           {"dt", [](auto& c, auto& v) { c.run.dt = positive(parse_real(v), "dt"); }},
           {"t_max", [](auto& c, auto& v) { c.run.t_max = positive(parse_real(v), "t_max"); }},
           {"noise_floor", [](auto& c, auto& v) { c.run.noise_floor = positive(parse_real(v), "noise_floor"); }},
           {"observable", [](auto& c, auto& v) { c.run.observable = one_of(v, {"default", "cos_u"}); }},
           {"max_period", [](auto& c, auto& v) { c.run.max_period = positive(parse_int<int>(v), "max_period"); }},
           {"inducing_cell", [](auto& c, auto& v) { c.run.inducing_cell = parse_int<std::size_t>(v); }},
           {"inducing_depth", [](auto& c, auto& v) { c.run.inducing_depth = positive(parse_int<int>(v), "inducing_depth"); }},
           {"depth", [](auto& c, auto& v) { c.run.depth = positive(parse_int<int>(v), "depth"); }},
           {"grid", [](auto& c, auto& v) { c.run.grid = positive(parse_int<std::size_t>(v), "grid"); }},
           {"tdist_depth", [](auto& c, auto& v) { c.run.tdist_depth = positive(parse_int<int>(v), "tdist_depth"); }},
           {"tdist_side", [](auto& c, auto& v) { c.run.tdist_side = positive(parse_int<std::size_t>(v), "tdist_side"); }},
           {"tdist_cell", [](auto& c, auto& v) { c.run.tdist_cell = parse_int<std::size_t>(v); }},
           {"probes", [](auto& c, auto& v) { c.run.probes = positive(parse_int<std::size_t>(v), "probes"); }},
           {"tolerance", [](auto& c, auto& v) { c.run.tolerance = positive(parse_real(v), "tolerance"); }},
           {"spectral_tolerance", [](auto& c, auto& v) { c.run.spectral_tolerance = positive(parse_real(v), "spectral_tolerance"); }},
           {"points", [](auto& c, auto& v) { c.run.points = positive(parse_int<std::size_t>(v), "points"); }},
           {"burn_in", [](auto& c, auto& v) { c.run.burn_in = parse_int<int>(v); }},
       }},
      {"output",
       {
           {"dir", [](auto& c, auto& v) { c.output.dir = v; }},
           {"format", [](auto& c, auto& v) { c.output.format = one_of(v, {"csv", "csv+svg"}); }},
       }},
  };
  return table;
}

}  // namespace

ExperimentConfig parse_config(const std::string& text, const std::filesystem::path& source) {
  ExperimentConfig cfg;
  cfg.source = source;
  std::istringstream in(text);
  std::string raw, section;
  std::set<std::string> seen;
  int line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    std::string line = trim(raw.substr(0, raw.find('#')));
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']') throw ConfigError("", line_no, "unterminated section header");
      section = trim(std::string_view(line).substr(1, line.size() - 2));
      if (!handlers().contains(section)) throw ConfigError(section, line_no, "unknown section");
      if (!cfg.has(section)) cfg.sections.push_back(section);
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ConfigError("", line_no, "expected 'key = value'");
    const std::string key = trim(std::string_view(line).substr(0, eq));
    const std::string value = trim(std::string_view(line).substr(eq + 1));
    if (section.empty()) throw ConfigError(key, line_no, "key outside any section");
    const std::string full = section + "." + key;
    const auto& keys = handlers().at(section);
    const auto h = keys.find(key);
    if (h == keys.end()) throw ConfigError(full, line_no, "unknown key");
    if (!seen.insert(full).second) throw ConfigError(full, line_no, "duplicate key");
    try {
      h->second(cfg, value);
    } catch (const std::exception& e) {
      throw ConfigError(full, line_no, e.what());
    }
  }
  return cfg;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("", 0, "cannot read '" + path.string() + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str(), path);
}

MapPtr build_map(const ModelSection& m) {
  ExpandingMarkovMap map = [&] {
    if (m.kind == "builtin") {
      if (m.name == "doubling") return models::doubling();
      if (m.name == "three_branch") return models::three_branch();
      if (m.name == "circle_expansion") return models::circle_expansion(m.degree);
      if (m.name == "perturbed_doubling") return models::perturbed_doubling(m.parameter);
      throw ModelError("unknown builtin model '" + m.name + "'");
    }
    TransitionMatrix t;
    if (!m.transitions.empty()) {
      const auto n = static_cast<Eigen::Index>(m.transitions.size());
      t.resize(n, n);
      for (Eigen::Index i = 0; i < n; ++i) {
        const auto& row = m.transitions[static_cast<std::size_t>(i)];
        if (static_cast<Eigen::Index>(row.size()) != n) throw ModelError("transition matrix must be square");
        for (Eigen::Index j = 0; j < n; ++j) t(i, j) = row[static_cast<std::size_t>(j)];
      }
    }
    const PiecewiseAffineMap<Rational> exact(m.breakpoints, m.slopes, m.intercepts, t);
    double bound = m.expansion_bound.value_or(0.0);
    if (!m.expansion_bound) {
      double min_slope = std::numeric_limits<double>::infinity();
      for (const auto& s : m.slopes) min_slope = std::min(min_slope, std::abs(s.to_double()));
      bound = 1.0 / min_slope;
    }
    return ExpandingMarkovMap::from_affine("affine_markov", exact, bound);
  }();
  return std::make_shared<const ExpandingMarkovMap>(refine(map, m.refine));
}

RoofFunction build_roof(const RoofSection& r, MapPtr base) {
  if (r.kind == "constant") {
    if (r.values.size() != 1) throw ModelError("constant roof needs exactly one value");
    return RoofFunction::constant(std::move(base), r.values.front());
  }
  if (r.kind == "polynomial") return RoofFunction::polynomial(std::move(base), r.coefficients);
  if (r.kind == "piecewise_polynomial") return RoofFunction::piecewise_polynomial(std::move(base), r.branches);
  if (r.kind == "cellwise") return RoofFunction::cellwise_constant(std::move(base), r.values);
  if (r.kind == "trigonometric") return RoofFunction::trigonometric(std::move(base), r.a0, r.cos_coeffs, r.sin_coeffs);
  throw ModelError("unknown roof kind '" + r.kind + "'");
}

}  // namespace mixlab
