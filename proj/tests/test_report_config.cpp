#include <doctest.h>

#include <cmath>

#include "mixlab/config.hpp"
#include "mixlab/report.hpp"

using namespace mixlab;

TEST_CASE("csv quoting and numbers") {
  CHECK(csv_field("plain") == "plain");
  CHECK(csv_field("a,b") == "\"a,b\"");
  CHECK(csv_field("say \"hi\"") == "\"say \"\"hi\"\"\"");
  CHECK(csv_field("two\nlines") == "\"two\nlines\"");
  CHECK(format_number(0.1) == "0.10000000000000001");
  CHECK(std::stod(format_number(1.0 / 3.0)) == 1.0 / 3.0);
  CHECK(format_number(INFINITY) == "inf");

  CsvTable t({"a", "b"});
  t.add({"1", "x,y"});
  CHECK(t.str() == "a,b\n1,\"x,y\"\n");
  CHECK_THROWS_AS(t.add({"1"}), std::invalid_argument);
}

TEST_CASE("witness csv row") {
  const auto f = std::make_shared<const ExpandingMarkovMap>(models::doubling());
  const auto rep = witness_search(RoofFunction::polynomial(f, {Rational(1), Rational(0), Rational(1)}), 4);
  CHECK(witness_table(rep).str() == "itinerary1,itinerary2,sum1,sum2,gap,tolerance\n0011,0101,26/5,46/9,4/45,0\n");
}

TEST_CASE("fit summary keys") {
  RateFit fit;
  fit.decay_rate = 0.5;
  fit.verdict = DecayVerdict::Decay;
  const auto text = summary_text(fit_summary(fit));
  for (const char* key : {"gamma=0.5\n", "C=", "r2=", "window_lo=", "window_hi=", "verdict=decay\n"})
    CHECK(text.find(key) != std::string::npos);
}

TEST_CASE("config parsing") {
  const auto cfg = parse_config(R"(
# comment
[model]
kind = affine_markov
breakpoints = 0, 1/3, 2/3, 1
slopes = 2, 3, 3
intercepts = 1/3, -1, -2
transitions = 0 1 1; 1 1 1; 1 1 1

[roof]
kind = polynomial
coefficients = 1, 0, 1   # 1 + x^2

[solenoid]
offset = 1/4

[run]
seed = 18446744073709551615
tolerance = 1e-9
)");
  CHECK(cfg.model.slopes.size() == 3);
  CHECK(cfg.model.transitions[0] == std::vector<int>{0, 1, 1});
  CHECK(cfg.solenoid.offset == 0.25);
  CHECK(cfg.run.seed == 18446744073709551615ULL);
  CHECK(cfg.run.tolerance == 1e-9);
  CHECK(cfg.has("solenoid"));
  CHECK_FALSE(cfg.has("output"));

  const auto map = build_map(cfg.model);
  CHECK(map->size() == 3);
  CHECK(map->expansion_bound() == doctest::Approx(0.5));
  CHECK(build_roof(cfg.roof, map)(0.5) == doctest::Approx(1.25));
}

TEST_CASE("config errors name key and line") {
  auto fails = [](const std::string& text, const std::string& key, int line) {
    try {
      parse_config(text);
    } catch (const ConfigError& e) {
      CHECK(e.key() == key);
      CHECK(e.line() == line);
      return;
    }
    FAIL("no ConfigError for: " << text);
  };
  fails("[model]\nnmae = doubling\n", "model.nmae", 2);
  fails("[run]\n\ntolerance = -1\n", "run.tolerance", 3);
  fails("[run]\nseed = -3\n", "run.seed", 2);
  fails("[run]\nseed = 1\nseed = 2\n", "run.seed", 3);
  fails("[bogus]\n", "bogus", 1);
  fails("[roof]\nkind = spline\n", "roof.kind", 2);
  fails("kind = builtin\n", "kind", 1);

  ModelSection bad;
  bad.kind = "affine_markov";
  bad.breakpoints = {Rational(0), Rational(1)};
  bad.slopes = {Rational(2)};
  bad.intercepts = {Rational(0)};
  CHECK_THROWS_AS(build_map(bad), ModelError);
}
