#include "mixlab/report.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace mixlab {

std::string format_number(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string csv_field(std::string_view text) {
  if (text.find_first_of(",\"\r\n") == std::string_view::npos) return std::string(text);
  std::string out = "\"";
  for (char c : text) {
    if (c == '"') out += '"';
    out += c;
  }
  out += '"';
  return out;
}

void CsvTable::add(std::vector<std::string> row) {
  if (row.size() != header.size())
    throw std::invalid_argument("csv: row has " + std::to_string(row.size()) + " fields, header has " +
                                std::to_string(header.size()));
  rows.push_back(std::move(row));
}

std::string CsvTable::str() const {
  std::string out;
  auto line = [&out](const std::vector<std::string>& fields) {
    for (std::size_t i = 0; i < fields.size(); ++i) {
      if (i) out += ',';
      out += csv_field(fields[i]);
    }
    out += '\n';
  };
  line(header);
  for (const auto& r : rows) line(r);
  return out;
}

std::string summary_text(const Summary& s) {
  std::string out;
  for (const auto& [k, v] : s) out += k + "=" + v + "\n";
  return out;
}

CsvTable axiom_table(const ValidationReport& report, std::string_view prefix) {
  CsvTable t({"axiom", "status", "worst_probe", "location"});
  for (const auto& c : report.checks)
    t.add({std::string(prefix) + c.axiom, c.pass ? "pass" : "fail", format_number(c.worst_probe),
           format_number(c.location)});
  return t;
}

CsvTable witness_table(const CohomologyReport& report) {
  CsvTable t({"itinerary1", "itinerary2", "sum1", "sum2", "gap", "tolerance"});
  if (!report.witness) return t;
  const auto& w = *report.witness;
  if (report.exact && w.exact_gap)
    t.add({itinerary_string(w.first), itinerary_string(w.second), w.exact_sum1->str(), w.exact_sum2->str(),
           w.exact_gap->str(), "0"});
  else
    t.add({itinerary_string(w.first), itinerary_string(w.second), format_number(w.sum1), format_number(w.sum2),
           format_number(w.gap), format_number(report.threshold)});
  return t;
}

CsvTable density_table(const InvariantDensity& density) {
  CsvTable t({"bin_left", "bin_right", "value", "residual"});
  const double w = density.bin_width();
  for (std::size_t i = 0; i < density.bins(); ++i) {
    const double lo = density.domain.lo + w * static_cast<double>(i);
    t.add({format_number(lo), format_number(i + 1 == density.bins() ? density.domain.hi : lo + w),
           format_number(density.values(static_cast<Eigen::Index>(i))), format_number(density.residual)});
  }
  return t;
}

CsvTable tail_table(const InducedMap<double>& induced, double tolerance) {
  CsvTable t({"n", "tail", "tolerance"});
  for (std::size_t n = 0; n < induced.tail.size(); ++n)
    t.add({std::to_string(n), format_number(induced.tail[n]), format_number(tolerance)});
  return t;
}

CsvTable tail_table(const InducedMap<Rational>& induced) {
  CsvTable t({"n", "tail", "tolerance"});
  for (std::size_t n = 0; n < induced.tail.size(); ++n) t.add({std::to_string(n), induced.tail[n].str(), "0"});
  return t;
}

CsvTable eta_table(const std::vector<double>& xs, const std::vector<EtaValue>& values) {
  if (xs.size() != values.size()) throw std::invalid_argument("eta_table: size mismatch");
  CsvTable t({"x", "value", "error_bound"});
  for (std::size_t i = 0; i < xs.size(); ++i)
    t.add({format_number(xs[i]), format_number(values[i].value), format_number(values[i].error_bound)});
  return t;
}

CsvTable correlation_table(const CorrelationSeries& series) {
  CsvTable t({"t", "rho", "stderr"});
  for (std::size_t k = 0; k < series.values.size(); ++k)
    t.add({format_number(series.times[k]), format_number(series.values[k]), format_number(series.std_errors[k])});
  return t;
}

CsvTable tdist_table(const TemporalDistanceGrid& grid) {
  CsvTable t({"x", "y", "value", "truncation_bound"});
  for (std::size_t i = 0; i < grid.points.size(); ++i)
    for (std::size_t j = 0; j < grid.points.size(); ++j)
      t.add({format_number(grid.points[i]), format_number(grid.points[j]),
             format_number(grid.values(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j))),
             format_number(grid.truncation_bound)});
  return t;
}

CsvTable cloud_table(const std::vector<SkewPoint>& cloud) {
  CsvTable t({"theta", "z1", "z2"});
  for (const auto& p : cloud) {
    if (p.z.size() != 2) throw std::invalid_argument("cloud_table: fiber points must be 2-dimensional");
    t.add({format_number(p.x), format_number(p.z(0)), format_number(p.z(1))});
  }
  return t;
}

Summary fit_summary(const RateFit& fit) {
  return {{"gamma", format_number(fit.decay_rate)},
          {"C", format_number(fit.prefactor)},
          {"r2", format_number(fit.r_squared)},
          {"window_lo", format_number(fit.window_lo)},
          {"window_hi", format_number(fit.window_hi)},
          {"verdict", fit.verdict == DecayVerdict::Decay ? "decay" : "no_decay"},
          {"slope", format_number(fit.slope)},
          {"slope_ci_lo", format_number(fit.ci_lo)},
          {"slope_ci_hi", format_number(fit.ci_hi)},
          {"noise_floor", format_number(fit.noise_floor)},
          {"points", std::to_string(fit.points)}};
}

Summary domination_summary(const DominationReport& report) {
  return {{"fiber_norm", format_number(report.fiber_norm)},
          {"full_norm_sq", format_number(report.full_norm_sq)},
          {"product", format_number(report.product)},
          {"probes", std::to_string(report.probes)},
          {"pass", report.pass ? "true" : "false"},
          {"note", report.note}};
}

std::string svg_log_plot(const CorrelationSeries& series, const RateFit* fit) {
  constexpr double width = 640, height = 400, margin = 50;
  std::vector<std::pair<double, double>> pts;
  for (std::size_t k = 0; k < series.values.size(); ++k)
    if (series.values[k] != 0.0) pts.emplace_back(series.times[k], std::log10(std::abs(series.values[k])));
  double t_lo = series.times.empty() ? 0.0 : series.times.front();
  double t_hi = series.times.empty() ? 1.0 : series.times.back();
  if (t_hi <= t_lo) t_hi = t_lo + 1.0;
  double y_lo = 0.0, y_hi = 0.0;
  if (!pts.empty()) {
    y_lo = y_hi = pts.front().second;
    for (const auto& p : pts) y_lo = std::min(y_lo, p.second), y_hi = std::max(y_hi, p.second);
  }
  y_lo = std::floor(y_lo);
  y_hi = std::ceil(y_hi);
  if (y_hi <= y_lo) y_hi = y_lo + 1.0;
  auto sx = [&](double t) { return margin + (t - t_lo) / (t_hi - t_lo) * (width - 2 * margin); };
  auto sy = [&](double y) { return height - margin - (y - y_lo) / (y_hi - y_lo) * (height - 2 * margin); };

  std::ostringstream svg;
  svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\"" << height << "\">\n"
      << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n"
      << "<line x1=\"" << margin << "\" y1=\"" << height - margin << "\" x2=\"" << width - margin << "\" y2=\""
      << height - margin << "\" stroke=\"black\"/>\n"
      << "<line x1=\"" << margin << "\" y1=\"" << margin << "\" x2=\"" << margin << "\" y2=\"" << height - margin
      << "\" stroke=\"black\"/>\n";
  for (double y = y_lo; y <= y_hi; y += 1.0)
    svg << "<text x=\"5\" y=\"" << sy(y) + 4 << "\" font-size=\"11\">1e" << y << "</text>\n";
  svg << "<text x=\"" << width / 2 << "\" y=\"" << height - 10 << "\" font-size=\"12\">t</text>\n";
  for (const auto& [t, y] : pts)
    svg << "<circle cx=\"" << sx(t) << "\" cy=\"" << sy(y) << "\" r=\"1.5\" fill=\"steelblue\"/>\n";
  if (fit && fit->points > 0) {
    auto line_y = [&](double t) { return (std::log(fit->prefactor) + fit->slope * t) / std::log(10.0); };
    svg << "<line x1=\"" << sx(fit->window_lo) << "\" y1=\"" << sy(line_y(fit->window_lo)) << "\" x2=\""
        << sx(fit->window_hi) << "\" y2=\"" << sy(line_y(fit->window_hi)) << "\" stroke=\"crimson\"/>\n";
  }
  svg << "</svg>\n";
  return svg.str();
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
  out << text;
  if (!out) throw std::runtime_error("write failed for " + path.string());
}

}  // namespace mixlab
