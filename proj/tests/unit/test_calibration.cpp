#include <doctest.h>

#include "../support/oracles.hpp"
#include "uqeval/calibration.hpp"
#include "uqeval/error.hpp"
#include "uqeval/rng.hpp"

using namespace uqeval;

TEST_CASE("bin boundaries") {
  CHECK(bin_assign(0.05, 10) == 1);
  CHECK(bin_assign(0.10, 10) == 1);
  CHECK(bin_assign(0.0, 10) == 1);
  CHECK(bin_assign(1.0, 10) == 10);
  CHECK(bin_assign(0.30000000000000004, 10) == 4);
  CHECK(bin_assign(0.3, 10) == 3);
  CHECK(bin_assign(0.7, 1) == 1);
}

TEST_CASE("bin counts match interval membership") {
  Rng rng(2);
  for (std::size_t M : {3u, 7u, 10u, 15u}) {
    std::vector<std::size_t> got(M + 1), want(M + 1);
    for (int i = 0; i < 10000; ++i) {
      const double c = i % 5 == 0 ? static_cast<double>(rng.below(M + 1)) / static_cast<double>(M)
                                  : rng.uniform();
      ++got[bin_assign(c, M)];
      ++want[oracle::bin_of(c, M)];
    }
    CHECK(got == want);
  }
}

TEST_CASE("single bin worked case") {
  std::vector<CalibrationSample> s;
  for (int i = 0; i < 10; ++i) s.push_back({0.8, i % 2 == 0});
  const auto r = calibration_report(s, 1);
  // 0.8 - 0.5 in binary64 is the double just above 0.3.
  CHECK(r.ece == 0.8 - 0.5);
  CHECK(std::abs(r.ece - 0.3) <= 1e-15);
  const auto rows = reliability_diagram_data(r);
  REQUIRE(rows.size() == 1);
  CHECK(rows[0].midpoint == 0.5);
  CHECK(*rows[0].accuracy == 0.5);
  CHECK(*rows[0].confidence == 0.8);
  CHECK(std::abs(*rows[0].gap - 0.3) <= 1e-15);
}

TEST_CASE("two equal bins") {
  // Bin 1: conf 0.25, acc 0.35 (gap 0.1). Bin 2: conf 0.75, acc 0.45 (gap 0.3).
  std::vector<CalibrationSample> s;
  for (int i = 0; i < 20; ++i) s.push_back({0.25, i < 7});
  for (int i = 0; i < 20; ++i) s.push_back({0.75, i < 9});
  const auto r = calibration_report(s, 2);
  CHECK(r.ece == doctest::Approx(0.2).epsilon(1e-14));
  CHECK(std::abs(r.ece - ece_from_bins(r)) <= 1e-12);
}

TEST_CASE("empty input and empty bins") {
  CHECK_THROWS_AS(calibration_report(std::vector<CalibrationSample>{}, 10), ValidationError);
  std::vector<CalibrationSample> s{{0.95, true}, {0.92, false}};
  const auto r = calibration_report(s, 10);
  std::size_t total = 0;
  for (const auto& b : r.bins) {
    total += b.count;
    if (b.count == 0) CHECK_FALSE(b.accuracy.has_value());
  }
  CHECK(total == 2);
  const auto rows = reliability_diagram_data(r);
  CHECK(rows.size() == 10);
  CHECK_FALSE(rows[0].gap.has_value());
}

TEST_CASE("ece matches the direct definition") {
  Rng rng(19);
  for (int rep = 0; rep < 30; ++rep) {
    std::vector<CalibrationSample> s;
    std::vector<double> conf;
    std::vector<bool> correct;
    for (int i = 0; i < 500; ++i) {
      const double c = 0.5 + 0.5 * rng.uniform();
      const bool ok = rng.bernoulli(0.8);
      s.push_back({c, ok});
      conf.push_back(c);
      correct.push_back(ok);
    }
    const auto r = calibration_report(s, 10);
    CHECK(std::abs(r.ece - oracle::ece(conf, correct, 10)) <= 1e-12);
    CHECK(std::abs(r.ece - ece_from_bins(r)) <= 1e-12);
    CHECK(r.ece >= 0.0);
    CHECK(r.ece <= 1.0);
  }
}

TEST_CASE("perfectly calibrated generator") {
  Rng rng(123);
  std::vector<CalibrationSample> s;
  for (int i = 0; i < 100000; ++i) {
    const double c = 0.5 + 0.5 * rng.uniform();
    s.push_back({c, rng.bernoulli(c)});
  }
  CHECK(calibration_report(s, 10).ece < 0.01);
}

TEST_CASE("split and recombine law") {
  Rng rng(8);
  std::vector<CalibrationSample> s;
  for (int i = 0; i < 400; ++i) s.push_back({rng.uniform(), rng.bernoulli(0.6)});
  const auto whole = calibration_report(s, 10);
  const std::span<const CalibrationSample> all(s);
  const auto a = calibration_report(all.first(150), 10);
  const auto b = calibration_report(all.subspan(150), 10);
  // Recombine per-bin sums.
  long double e = 0;
  for (std::size_t m = 0; m < 10; ++m) {
    const auto n = a.bins[m].count + b.bins[m].count;
    if (n == 0) continue;
    const long double acc = a.bins[m].count * a.bins[m].accuracy.value_or(0) +
                            b.bins[m].count * b.bins[m].accuracy.value_or(0);
    const long double cf = a.bins[m].count * a.bins[m].confidence.value_or(0) +
                           b.bins[m].count * b.bins[m].confidence.value_or(0);
    e += std::fabs(acc - cf) / 400;
  }
  CHECK(std::abs(whole.ece - static_cast<double>(e)) <= 1e-12);
  auto shuffled = s;
  rng.shuffle(shuffled);
  CHECK(std::abs(calibration_report(shuffled, 10).ece - whole.ece) <= 1e-12);
}

TEST_CASE("reliability csv round trip") {
  Rng rng(1);
  std::vector<CalibrationSample> s;
  for (int i = 0; i < 60; ++i) s.push_back({0.5 + 0.5 * rng.uniform(), rng.bernoulli(0.7)});
  const auto rows = reliability_diagram_data(calibration_report(s, 10));
  CHECK(parse_reliability_csv(render_reliability_csv(rows)) == rows);
}
