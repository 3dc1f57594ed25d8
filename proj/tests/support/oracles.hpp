#pragma once

// Independent reference computations used by the unit and acceptance tests.
// None of these call into the library's numeric code.

#include <algorithm>
#include <boost/math/special_functions/beta.hpp>
#include <boost/multiprecision/cpp_bin_float.hpp>
#include <cmath>
#include <cstddef>
#include <optional>
#include <span>
#include <vector>

namespace oracle {

using Big = boost::multiprecision::cpp_bin_float_50;

// -sum p log2 p in 50-digit arithmetic.
inline double entropy_bits(std::span<const double> p) {
  Big h = 0;
  const Big ln2 = boost::multiprecision::log(Big(2));
  for (double v : p) {
    if (v <= 0.0) continue;
    const Big b(v);
    h -= b * boost::multiprecision::log(b);
  }
  return static_cast<double>(h / ln2);
}

// Two-sided Student-t p-value I_{df/(df+t^2)}(df/2, 1/2) in 50 digits.
inline double t_two_sided_p(double t, double df) {
  const Big tt(t);
  const Big x = Big(df) / (Big(df) + tt * tt);
  return static_cast<double>(boost::math::ibeta(Big(df) / 2, Big(0.5), x));
}

// Paired t statistic in 50-digit arithmetic.
inline double paired_t(std::span<const double> a, std::span<const double> b) {
  const std::size_t n = a.size();
  Big mean = 0;
  for (std::size_t i = 0; i < n; ++i) mean += Big(a[i]) - Big(b[i]);
  mean /= n;
  Big ss = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const Big d = Big(a[i]) - Big(b[i]) - mean;
    ss += d * d;
  }
  const Big sd = boost::multiprecision::sqrt(ss / (n - 1));
  return static_cast<double>(mean / (sd / boost::multiprecision::sqrt(Big(n))));
}

inline std::optional<double> ratio(std::size_t num, std::size_t den) {
  if (den == 0) return std::nullopt;
  return static_cast<double>(static_cast<long double>(num) / static_cast<long double>(den));
}

struct Counts {
  std::size_t tc = 0, tu = 0, fu = 0, fc = 0;
};

// Per-sample enumeration straight from the definitions.
inline Counts recount(const std::vector<bool>& correct, std::span<const double> u, double thr) {
  Counts c;
  for (std::size_t i = 0; i < correct.size(); ++i) {
    const bool uncertain = !(u[i] < thr);
    if (correct[i] && !uncertain) ++c.tc;
    else if (!correct[i] && uncertain) ++c.tu;
    else if (correct[i]) ++c.fu;
    else ++c.fc;
  }
  return c;
}

// Pair-enumeration AUC.
inline double auc_pairs(std::span<const double> s, std::span<const int> y) {
  double wins = 0;
  std::size_t pairs = 0;
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (y[i] != 1) continue;
    for (std::size_t j = 0; j < s.size(); ++j) {
      if (y[j] != 0) continue;
      ++pairs;
      if (s[i] > s[j]) wins += 1.0;
      else if (s[i] == s[j]) wins += 0.5;
    }
  }
  return wins / static_cast<double>(pairs);
}

// Bin index by explicit interval membership: bin m holds (m-1)/M < c <= m/M.
inline std::size_t bin_of(double c, std::size_t M) {
  if (c <= 0.0) return 1;
  for (std::size_t m = 1; m <= M; ++m) {
    const double lo = static_cast<double>(m - 1) / static_cast<double>(M);
    const double hi = static_cast<double>(m) / static_cast<double>(M);
    if (c > lo && c <= hi) return m;
  }
  return M;
}

// ECE by direct definition with long double accumulators.
inline double ece(std::span<const double> conf, const std::vector<bool>& correct, std::size_t M) {
  std::vector<long double> acc(M + 1), cs(M + 1);
  std::vector<std::size_t> n(M + 1);
  for (std::size_t i = 0; i < conf.size(); ++i) {
    const auto m = bin_of(conf[i], M);
    ++n[m];
    acc[m] += correct[i] ? 1.0L : 0.0L;
    cs[m] += conf[i];
  }
  long double e = 0;
  for (std::size_t m = 1; m <= M; ++m) {
    if (n[m] == 0) continue;
    e += static_cast<long double>(n[m]) / conf.size() * std::fabs(acc[m] / n[m] - cs[m] / n[m]);
  }
  return static_cast<double>(e);
}

// Central finite differences of f around x.
template <typename F>
std::vector<double> numeric_gradient(F&& f, std::vector<double> x, double h = 1e-5) {
  std::vector<double> g(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double keep = x[i];
    x[i] = keep + h;
    const double up = f(x);
    x[i] = keep - h;
    const double down = f(x);
    x[i] = keep;
    g[i] = (up - down) / (2 * h);
  }
  return g;
}

inline double relative_error(double a, double b, double floor = 1e-8) {
  return std::fabs(a - b) / std::max({std::fabs(a), std::fabs(b), floor});
}

}  // namespace oracle
