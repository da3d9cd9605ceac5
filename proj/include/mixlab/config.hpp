#pragma once

#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "mixlab/markov_map.hpp"
#include "mixlab/rational.hpp"
#include "mixlab/roof.hpp"
#include "mixlab/solenoid.hpp"

namespace mixlab {

// INI-style experiment files:
//
//   # comment
//   [model]
//   kind = builtin
//   name = doubling
//
// Lists are comma separated; matrix rows are separated by ';'. Numbers may be
// written as p/q. Unknown sections and keys are errors.

struct ModelSection {
  std::string kind = "builtin";  ///< builtin | affine_markov
  std::string name = "doubling";  ///< doubling | three_branch | circle_expansion | perturbed_doubling
  int degree = 2;                 ///< circle_expansion
  double parameter = 0.1;         ///< perturbed_doubling amplitude
  std::vector<Rational> breakpoints, slopes, intercepts;
  std::vector<std::vector<int>> transitions;  ///< optional, derived when empty
  std::optional<double> expansion_bound;      ///< default 1 / min |slope|
  int refine = 0;
};

struct RoofSection {
  std::string kind = "polynomial";  ///< constant | polynomial | piecewise_polynomial | cellwise | trigonometric
  std::vector<Rational> coefficients{Rational(1)};
  std::vector<std::vector<Rational>> branches;
  std::vector<Rational> values;
  double a0 = 1.0;
  std::vector<double> cos_coeffs, sin_coeffs;
};

struct RunSection {
  std::uint64_t seed = 42;
  std::size_t samples = 100000;
  std::size_t batches = 100;
  std::size_t bins = 1024;
  double dt = 0.1;
  double t_max = 0.0;  ///< 0 means 30 * mean roof
  double noise_floor = 3.0;
  std::string observable = "default";  ///< default | cos_u
  int max_period = 4;
  std::size_t inducing_cell = 0;
  int inducing_depth = 12;
  int depth = 20;  ///< disintegration depth
  std::size_t grid = 16;
  int tdist_depth = 30;
  std::size_t tdist_side = 16;
  std::size_t tdist_cell = 0;
  std::size_t probes = 10000;
  double tolerance = 1e-10;
  double spectral_tolerance = 1e-6;  ///< for |lambda_2|; clustered spectra converge slowly
  std::size_t points = 10000;  ///< attractor cloud size
  int burn_in = 30;
};

struct OutputSection {
  std::string dir = "mixlab_out";
  std::string format = "csv";  ///< csv | csv+svg
};

struct ExperimentConfig {
  ModelSection model;
  RoofSection roof;
  SolenoidParameters solenoid;
  RunSection run;
  OutputSection output;
  std::filesystem::path source;  ///< empty for defaults
  std::vector<std::string> sections;  ///< sections present in the file

  bool has(const std::string& section) const {
    return std::find(sections.begin(), sections.end(), section) != sections.end();
  }
};

/// Throws ConfigError naming the key and line.
ExperimentConfig parse_config(const std::string& text, const std::filesystem::path& source = {});
ExperimentConfig load_config(const std::filesystem::path& path);

/// Builds the base map (refined as requested). Throws ModelError.
MapPtr build_map(const ModelSection& model);
RoofFunction build_roof(const RoofSection& roof, MapPtr base);

}  // namespace mixlab
