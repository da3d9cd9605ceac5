#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "mixlab/induced.hpp"
#include "mixlab/rational.hpp"
#include "mixlab/roof.hpp"
#include "mixlab/solenoid.hpp"
#include "mixlab/suspension.hpp"
#include "mixlab/transfer_operator.hpp"

namespace mixlab {

/// Shortest round-trip text: %.17g, with inf/nan spelled out.
std::string format_number(double v);

/// RFC 4180 field: quoted when it holds a comma, quote, CR or LF.
std::string csv_field(std::string_view text);

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  explicit CsvTable(std::vector<std::string> columns) : header(std::move(columns)) {}
  /// Throws std::invalid_argument on a column-count mismatch.
  void add(std::vector<std::string> row);
  std::string str() const;
};

/// key=value lines in insertion order.
using Summary = std::vector<std::pair<std::string, std::string>>;
std::string summary_text(const Summary& s);

/// axiom, status, worst_probe, location
CsvTable axiom_table(const ValidationReport& report, std::string_view prefix = {});
/// itinerary1, itinerary2, sum1, sum2, gap, tolerance (0 on the exact path)
CsvTable witness_table(const CohomologyReport& report);
/// bin_left, bin_right, value, residual
CsvTable density_table(const InvariantDensity& density);
/// n, tail, tolerance
CsvTable tail_table(const InducedMap<double>& induced, double tolerance);
CsvTable tail_table(const InducedMap<Rational>& induced);
/// x, value, error_bound
CsvTable eta_table(const std::vector<double>& xs, const std::vector<EtaValue>& values);
/// t, rho, stderr
CsvTable correlation_table(const CorrelationSeries& series);
/// x, y, value, truncation_bound
CsvTable tdist_table(const TemporalDistanceGrid& grid);
/// theta, z1, z2
CsvTable cloud_table(const std::vector<SkewPoint>& cloud);

Summary fit_summary(const RateFit& fit);
Summary domination_summary(const DominationReport& report);

/// log|rho| against t with error bars dropped, the fit line over its window.
std::string svg_log_plot(const CorrelationSeries& series, const RateFit* fit);

/// Creates parent directories as needed.
void write_text(const std::filesystem::path& path, const std::string& text);

}  // namespace mixlab
