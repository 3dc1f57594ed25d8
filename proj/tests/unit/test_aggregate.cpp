#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>

#include "../support/oracles.hpp"
#include "uqeval/aggregate.hpp"
#include "uqeval/error.hpp"
#include "uqeval/rng.hpp"

using namespace uqeval;

namespace {

std::vector<double> random_rows(Rng& rng, std::size_t T, std::size_t C) {
  std::vector<double> rows;
  for (std::size_t t = 0; t < T; ++t) {
    std::vector<double> w(C);
    double s = 0;
    for (auto& v : w) s += (v = rng.uniform());
    for (auto v : w) rows.push_back(v / s);
  }
  return rows;
}

PredictionTensor tensor_of(std::size_t n, std::size_t T, std::size_t C, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<std::string> ids;
  std::vector<double> probs;
  for (std::size_t s = 0; s < n; ++s) {
    ids.push_back("s" + std::to_string(s));
    const auto r = random_rows(rng, T, C);
    probs.insert(probs.end(), r.begin(), r.end());
  }
  return PredictionTensor(ids, T, C, probs);
}

}  // namespace

TEST_CASE("predictive mean small cases") {
  const std::vector<double> rows{0.6, 0.4, 0.8, 0.2};
  const auto m = predictive_mean(rows, 2);
  CHECK(m[0] == doctest::Approx(0.7).epsilon(1e-15));
  CHECK(m[1] == doctest::Approx(0.3).epsilon(1e-15));
  const std::vector<double> one{0.9, 0.1};
  CHECK(predictive_mean(one, 2) == one);
  CHECK_THROWS_AS(predictive_mean(std::vector<double>{}, 2), ValidationError);
}

TEST_CASE("predictive mean matches compensated summation over 50 rows") {
  Rng rng(3);
  for (int rep = 0; rep < 20; ++rep) {
    const auto rows = random_rows(rng, 50, 4);
    const auto m = predictive_mean(rows, 4);
    for (std::size_t c = 0; c < 4; ++c) {
      oracle::Big s = 0;
      for (std::size_t t = 0; t < 50; ++t) s += oracle::Big(rows[t * 4 + c]);
      CHECK(std::abs(m[c] - static_cast<double>(s / 50)) <= 1e-12);
    }
  }
}

TEST_CASE("entropy fixed values") {
  CHECK(predictive_entropy(std::vector<double>{0.5, 0.5}, LogBase::Two) == 1.0);
  CHECK(predictive_entropy(std::vector<double>{1.0, 0.0}, LogBase::Two) == 0.0);
  CHECK(predictive_entropy(std::vector<double>{0.0, 1.0}, LogBase::E) == 0.0);
  const std::vector<double> p{0.9, 0.1};
  CHECK(std::abs(predictive_entropy(p, LogBase::Two) - oracle::entropy_bits(p)) <= 1e-12);
  CHECK(predictive_entropy(std::vector<double>{0.5, 0.5}, LogBase::E) ==
        doctest::Approx(std::log(2.0)).epsilon(1e-15));
  CHECK_THROWS_AS(predictive_entropy(std::vector<double>{0.5, 0.4}, LogBase::Two), ValidationError);
}

TEST_CASE("entropy against the high-precision oracle") {
  Rng rng(17);
  for (int i = 0; i < 2000; ++i) {
    const std::size_t C = 2 + rng.below(5);
    auto p = random_rows(rng, 1, C);
    if (i % 7 == 0) {
      // Exact zeros exercise the 0 log 0 convention.
      p[rng.below(C)] = 0.0;
      const double sum = std::accumulate(p.begin(), p.end(), 0.0);
      for (auto& v : p) v /= sum;
    }
    CHECK(std::abs(predictive_entropy(p, LogBase::Two) - oracle::entropy_bits(p)) <= 1e-12);
  }
}

TEST_CASE("entropy extremes and label permutation") {
  Rng rng(5);
  for (std::size_t C = 2; C <= 6; ++C) {
    std::vector<double> u(C, 1.0 / static_cast<double>(C));
    CHECK(predictive_entropy(u, LogBase::Two) == doctest::Approx(std::log2(double(C))).epsilon(1e-14));
    auto p = random_rows(rng, 1, C);
    const double h = predictive_entropy(p, LogBase::Two);
    CHECK(h < std::log2(double(C)));
    CHECK(h > 0.0);
    std::reverse(p.begin(), p.end());
    CHECK(predictive_entropy(p, LogBase::Two) == doctest::Approx(h).epsilon(1e-14));
  }
}

TEST_CASE("argmax ties go to the lowest index") {
  CHECK(argmax(std::vector<double>{0.5, 0.5}) == 0);
  CHECK(argmax(std::vector<double>{0.2, 0.4, 0.4}) == 1);
  const auto s = summarize("x", {0.25, 0.25, 0.25, 0.25}, LogBase::Two);
  CHECK(s.predicted_class == 0);
  CHECK(s.normalized_entropy == 1.0);
  CHECK(s.confidence == 0.25);
}

TEST_CASE("identical ensemble members") {
  const PredictionTensor t({"a"}, 3, 2, {0.8, 0.2, 0.8, 0.2, 0.8, 0.2});
  const auto s = aggregate(t, AggregationScheme::ensemble()).front();
  CHECK(s.mean[0] == doctest::Approx(0.8).epsilon(1e-15));
  CHECK(s.entropy == doctest::Approx(oracle::entropy_bits(std::vector<double>{0.8, 0.2})).epsilon(1e-12));
}

TEST_CASE("EMCD 2x2 uniform rows") {
  const PredictionTensor t({"a"}, 4, 2, std::vector<double>(8, 0.5));
  const auto s = aggregate(t, AggregationScheme::emcd({2, 2})).front();
  CHECK(s.mean == std::vector<double>{0.5, 0.5});
  CHECK(s.entropy == 1.0);
}

TEST_CASE("EMCD unequal parts equal the two-stage loop") {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const auto t = tensor_of(10, 4, 3, seed);
    const auto got = aggregate(t, AggregationScheme::emcd({1, 3}));
    for (std::size_t s = 0; s < t.n_samples(); ++s) {
      for (std::size_t c = 0; c < 3; ++c) {
        long double second = 0;
        for (std::size_t p = 1; p < 4; ++p) second += t.row(s, p)[c];
        const long double expect = (t.row(s, 0)[c] + second / 3) / 2;
        CHECK(std::abs(got[s].mean[c] - static_cast<double>(expect)) <= 1e-12);
      }
    }
  }
}

TEST_CASE("EMCD with equal parts matches MCD") {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const auto t = tensor_of(8, 6, 2, seed + 100);
    const auto a = aggregate(t, AggregationScheme::emcd({2, 2, 2}));
    const auto b = aggregate(t, AggregationScheme::mcd());
    for (std::size_t s = 0; s < a.size(); ++s)
      for (std::size_t c = 0; c < 2; ++c) CHECK(std::abs(a[s].mean[c] - b[s].mean[c]) <= 1e-15);
  }
}

TEST_CASE("partition validation and parsing") {
  const auto t = tensor_of(2, 6, 2, 1);
  CHECK_THROWS_AS(aggregate(t, AggregationScheme::emcd({2, 3})), ValidationError);
  CHECK_THROWS_AS(AggregationScheme::emcd({0, 6}), ValidationError);
  CHECK(parse_partition("2x3") == std::vector<std::size_t>{3, 3});
  CHECK(parse_partition("1,3") == std::vector<std::size_t>{1, 3});
  CHECK_THROWS_AS(parse_partition("x3"), ValidationError);
  CHECK_THROWS_AS(parse_scheme_kind("bayes"), ValidationError);
}

TEST_CASE("pass variance") {
  const std::vector<double> same{0.3, 0.7, 0.3, 0.7};
  CHECK(pass_variance(same, 2) == std::vector<double>{0.0, 0.0});
  const std::vector<double> two{1.0, 0.0, 0.0, 1.0};
  CHECK(pass_variance(two, 2) == std::vector<double>{0.5, 0.5});
  CHECK_THROWS_AS(pass_variance(std::vector<double>{0.5, 0.5}, 2), ValidationError);
  Rng rng(8);
  const auto rows = random_rows(rng, 30, 3);
  const auto v = pass_variance(rows, 3);
  for (std::size_t c = 0; c < 3; ++c) {
    long double mean = 0;
    for (std::size_t t = 0; t < 30; ++t) mean += rows[t * 3 + c];
    mean /= 30;
    long double ss = 0;
    for (std::size_t t = 0; t < 30; ++t) ss += (rows[t * 3 + c] - mean) * (rows[t * 3 + c] - mean);
    CHECK(std::abs(v[c] - static_cast<double>(ss / 29)) <= 1e-12);
  }
}

TEST_CASE("summary invariants and binary normalization") {
  const auto t = tensor_of(50, 5, 2, 42);
  for (const auto& s : aggregate(t, AggregationScheme::mcd())) {
    CHECK(s.normalized_entropy >= 0.0);
    CHECK(s.normalized_entropy <= 1.0);
    CHECK(s.normalized_entropy == s.entropy);
    CHECK(s.confidence == s.mean[static_cast<std::size_t>(s.predicted_class)]);
    CHECK(std::abs(s.mean[0] + s.mean[1] - 1.0) <= 1e-9);
  }
}

TEST_CASE("duplicating a pass row moves the mean toward it") {
  Rng rng(21);
  for (int rep = 0; rep < 100; ++rep) {
    const auto rows = random_rows(rng, 4, 3);
    const auto before = predictive_mean(rows, 3);
    auto more = rows;
    const std::size_t k = rng.below(4);
    more.insert(more.end(), rows.begin() + k * 3, rows.begin() + k * 3 + 3);
    const auto after = predictive_mean(more, 3);
    for (std::size_t c = 0; c < 3; ++c)
      CHECK(std::abs(after[c] - rows[k * 3 + c]) <= std::abs(before[c] - rows[k * 3 + c]) + 1e-15);
  }
}

TEST_CASE("summaries csv round trip") {
  const auto t = tensor_of(20, 3, 3, 9);
  const auto s = aggregate(t, AggregationScheme::mcd());
  CHECK(parse_summaries(render_summaries(s)) == s);
}
