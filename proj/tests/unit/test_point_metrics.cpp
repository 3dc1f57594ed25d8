#include <doctest.h>

#include <cmath>

#include "../support/oracles.hpp"
#include "uqeval/error.hpp"
#include "uqeval/point_metrics.hpp"
#include "uqeval/rng.hpp"

using namespace uqeval;

namespace {

MetricDistribution dist(std::vector<double> v) {
  MetricDistribution d;
  d.name = "accuracy";
  d.values = std::move(v);
  for (std::size_t i = 0; i < d.values.size(); ++i) d.run_seeds.push_back(i);
  return d;
}

}  // namespace

TEST_CASE("accuracy") {
  const std::vector<int> p{0, 1, 1, 0};
  CHECK(accuracy(p, p) == 1.0);
  const std::vector<int> flipped{1, 0, 0, 1};
  CHECK(accuracy(p, flipped) == 0.0);
  Rng rng(5);
  std::vector<int> a, b;
  std::size_t hits = 0;
  for (int i = 0; i < 333; ++i) {
    a.push_back(static_cast<int>(rng.below(3)));
    b.push_back(static_cast<int>(rng.below(3)));
    hits += a.back() == b.back();
  }
  CHECK(accuracy(a, b) == static_cast<double>(hits) / 333.0);
}

TEST_CASE("auc small cases") {
  const std::vector<double> sep{0.1, 0.2, 0.8, 0.9};
  const std::vector<int> y{0, 0, 1, 1};
  CHECK(auc_binary(sep, y) == 1.0);
  const std::vector<double> same(4, 0.5);
  CHECK(auc_binary(same, y) == 0.5);
  const std::vector<int> one_class{1, 1, 1, 1};
  CHECK_THROWS_AS(auc_binary(sep, one_class), ValidationError);
}

TEST_CASE("auc equals pair enumeration") {
  Rng rng(77);
  for (int rep = 0; rep < 200; ++rep) {
    const std::size_t n = 2 + rng.below(99);
    std::vector<double> s(n);
    std::vector<int> y(n);
    for (std::size_t i = 0; i < n; ++i) {
      s[i] = static_cast<double>(rng.below(20)) / 20;  // many ties
      y[i] = static_cast<int>(rng.below(2));
    }
    y[0] = 0, y[1] = 1;
    CHECK(std::abs(auc_binary(s, y) - oracle::auc_pairs(s, y)) <= 1e-12);
    // Strictly increasing transform.
    std::vector<double> t(n);
    for (std::size_t i = 0; i < n; ++i) t[i] = std::exp(3 * s[i]) - 7;
    CHECK(auc_binary(t, y) == auc_binary(s, y));
  }
}

TEST_CASE("incomplete beta and t distribution") {
  CHECK(regularized_incomplete_beta(2, 3, 0) == 0.0);
  CHECK(regularized_incomplete_beta(2, 3, 1) == 1.0);
  Rng rng(3);
  for (int i = 0; i < 200; ++i) {
    const double a = 0.5 + 20 * rng.uniform(), b = 0.5 + 20 * rng.uniform(), x = rng.uniform();
    const double want = static_cast<double>(
        boost::math::ibeta(oracle::Big(a), oracle::Big(b), oracle::Big(x)));
    CHECK(std::abs(regularized_incomplete_beta(a, b, x) - want) <= 1e-12);
  }
  for (double df : {1.0, 2.0, 5.0, 19.0, 99.0}) {
    CHECK(student_t_cdf(0.0, df) == 0.5);
    for (double x = -4; x <= 4; x += 0.25)
      CHECK(std::abs(student_t_cdf(x, df) + student_t_cdf(-x, df) - 1.0) <= 1e-12);
  }
  for (double x = -3; x <= 3; x += 0.5)
    CHECK(std::abs(student_t_cdf(x, 1e6) - normal_cdf(x)) <= 1e-3);
}

TEST_CASE("paired t-test") {
  const auto a = dist({0.8, 0.82, 0.79, 0.85});
  const auto same = paired_t_test(a, a);
  CHECK(same.t_statistic == 0.0);
  CHECK(same.p_value == 1.0);
  CHECK(same.degenerate);

  const auto sym = paired_t_test(dist({1.0, 0.0}), dist({0.0, 1.0}));
  CHECK(sym.t_statistic == 0.0);
  CHECK(sym.p_value == 1.0);

  const auto shifted = paired_t_test(dist({2, 3, 4}), dist({1, 2, 3}));
  CHECK(shifted.degenerate);
  CHECK(std::isinf(shifted.t_statistic));
  CHECK(shifted.p_value == 0.0);

  Rng rng(42);
  std::vector<double> x(10), z(10, 0.0);
  for (auto& v : x) v = rng.normal() + 0.5;
  const auto r = paired_t_test(dist(x), dist(z));
  CHECK(r.degrees_of_freedom == 9);
  CHECK(std::abs(r.t_statistic - oracle::paired_t(x, z)) <= 1e-12 * std::abs(r.t_statistic));
  CHECK(std::abs(r.p_value - oracle::t_two_sided_p(r.t_statistic, 9)) <= 1e-9);

  const auto back = paired_t_test(dist(z), dist(x));
  CHECK(back.t_statistic == -r.t_statistic);
  CHECK(std::abs(back.p_value - r.p_value) <= 1e-12);

  CHECK_THROWS_AS(paired_t_test(dist({1, 2, 3}), dist({1, 2})), ValidationError);
  auto reseeded = dist({1, 2, 3});
  reseeded.run_seeds = {5, 6, 7};
  CHECK_THROWS_AS(paired_t_test(dist({1, 2, 3}), reseeded), ValidationError);
}

TEST_CASE("ten standard deviations apart") {
  Rng rng(9);
  std::vector<double> a(20), b(20);
  for (std::size_t i = 0; i < 20; ++i) {
    b[i] = 0.8 + 0.01 * rng.normal();
    a[i] = b[i] + 0.1 + 0.01 * rng.normal();
  }
  CHECK(paired_t_test(dist(a), dist(b)).p_value < 1e-6);
}

TEST_CASE("describe and spearman") {
  const std::vector<double> v{1, 2, 3, 4};
  const auto d = describe(v);
  CHECK(d.mean == 2.5);
  CHECK(d.sd == doctest::Approx(std::sqrt(5.0 / 3.0)).epsilon(1e-15));
  const std::vector<double> up{1, 4, 9, 16};
  CHECK(*spearman(v, up) == doctest::Approx(1.0));
  const std::vector<double> flat{2, 2, 2, 2};
  CHECK_FALSE(spearman(v, flat).has_value());
}

TEST_CASE("compare_models pairing") {
  auto run = [](std::uint64_t seed, int cls) {
    PredictiveSummary s;
    s.sample_id = "a";
    s.mean = {0.4, 0.6};
    s.predicted_class = cls;
    PredictiveSummary t = s;
    t.sample_id = "b";
    t.mean = {0.7, 0.3};
    t.predicted_class = 0;
    return RunEvaluation{seed, {s, t}, LabelSet({"a", "b"}, {1, 0})};
  };
  const std::vector<RunEvaluation> a{run(1, 1), run(2, 0), run(3, 1)};
  const auto cmp = compare_models(a, a);
  CHECK(cmp.accuracy.test.p_value == 1.0);
  REQUIRE(cmp.auc.has_value());
  CHECK(cmp.auc->test.p_value == 1.0);
  const std::vector<RunEvaluation> shorter{run(1, 1), run(2, 0)};
  CHECK_THROWS_AS(compare_models(a, shorter), ValidationError);
}
