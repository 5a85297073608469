// Copyright 2026 The darnwalk Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef DARNWALK_STATS_HPP_
#define DARNWALK_STATS_HPP_

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <vector>

#include <boost/math/distributions/chi_squared.hpp>

namespace darnwalk::stats {

/// Two-sample Kolmogorov-Smirnov statistic sup |F_a - F_b|. Ties are handled
/// by stepping both empirical CDFs past each distinct value.
inline double ks_statistic(std::vector<double> a, std::vector<double> b) {
  if (a.empty() || b.empty()) throw std::invalid_argument("ks_statistic: empty sample");
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  const auto na = static_cast<double>(a.size());
  const auto nb = static_cast<double>(b.size());
  std::size_t i = 0;
  std::size_t k = 0;
  double d = 0.0;
  while (i < a.size() && k < b.size()) {
    const double v = std::min(a[i], b[k]);
    while (i < a.size() && a[i] == v) ++i;
    while (k < b.size() && b[k] == v) ++k;
    d = std::max(d, std::abs(static_cast<double>(i) / na - static_cast<double>(k) / nb));
  }
  return d;
}

/// Asymptotic two-sample KS critical value at level alpha.
inline double ks_critical_value(double alpha, std::size_t na, std::size_t nb) {
  const double c = std::sqrt(-0.5 * std::log(alpha / 2.0));
  const auto a = static_cast<double>(na);
  const auto b = static_cast<double>(nb);
  return c * std::sqrt((a + b) / (a * b));
}

struct ChiSquareResult {
  double statistic = 0.0;
  int dof = 0;
  double p_value = 1.0;
  double critical = 0.0;
  bool rejected = false;
  int bins = 0;
};

/// Pearson goodness-of-fit of observed counts against cell probabilities.
/// Cells with expected count below min_expected are pooled into one cell;
/// a pool that stays below the threshold joins the smallest kept cell.
inline ChiSquareResult chi_square_gof(std::span<const std::uint64_t> observed,
                                      std::span<const double> probs, double alpha,
                                      double min_expected = 5.0) {
  if (observed.size() != probs.size()) throw std::invalid_argument("chi_square_gof: size mismatch");
  std::uint64_t n = 0;
  for (auto o : observed) n += o;
  if (n == 0) throw std::invalid_argument("chi_square_gof: no observations");
  double psum = 0.0;
  for (double p : probs) psum += p;
  const auto total = static_cast<double>(n);
  std::vector<double> obs_bins;
  std::vector<double> exp_bins;
  double pool_obs = 0.0;
  double pool_exp = 0.0;
  for (std::size_t i = 0; i < observed.size(); ++i) {
    const double e = total * probs[i] / psum;
    const auto o = static_cast<double>(observed[i]);
    if (e < min_expected) {
      pool_obs += o;
      pool_exp += e;
    } else {
      obs_bins.push_back(o);
      exp_bins.push_back(e);
    }
  }
  if (pool_exp > 0.0 || pool_obs > 0.0) {
    if (pool_exp >= min_expected || exp_bins.empty()) {
      obs_bins.push_back(pool_obs);
      exp_bins.push_back(pool_exp);
    } else {
      const auto smallest = static_cast<std::size_t>(
          std::min_element(exp_bins.begin(), exp_bins.end()) - exp_bins.begin());
      obs_bins[smallest] += pool_obs;
      exp_bins[smallest] += pool_exp;
    }
  }
  ChiSquareResult r;
  for (std::size_t i = 0; i < obs_bins.size(); ++i) {
    const double diff = obs_bins[i] - exp_bins[i];
    r.statistic += exp_bins[i] > 0.0 ? diff * diff / exp_bins[i] : 0.0;
  }
  r.bins = static_cast<int>(obs_bins.size());
  r.dof = std::max(1, r.bins - 1);
  boost::math::chi_squared dist(r.dof);
  r.p_value = boost::math::cdf(boost::math::complement(dist, r.statistic));
  r.critical = boost::math::quantile(boost::math::complement(dist, alpha));
  r.rejected = r.statistic > r.critical;
  return r;
}

/// Total-variation distance between two count vectors.
inline double tv_distance(std::span<const std::uint64_t> a, std::span<const std::uint64_t> b) {
  if (a.size() != b.size()) throw std::invalid_argument("tv_distance: size mismatch");
  double na = 0.0;
  double nb = 0.0;
  for (auto x : a) na += static_cast<double>(x);
  for (auto x : b) nb += static_cast<double>(x);
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    s += std::abs(static_cast<double>(a[i]) / na - static_cast<double>(b[i]) / nb);
  }
  return 0.5 * s;
}

struct Proportion {
  std::uint64_t hits = 0;
  std::uint64_t trials = 0;
  double value() const { return trials ? static_cast<double>(hits) / static_cast<double>(trials) : 0.0; }
  /// Binomial standard error sqrt(p(1-p)/n).
  double se() const {
    if (trials == 0) return 0.0;
    const double p = value();
    return std::sqrt(p * (1.0 - p) / static_cast<double>(trials));
  }
};

/// Counts inversions of a should-be-decreasing sequence.
inline int decreasing_inversions(std::span<const double> xs) {
  int inv = 0;
  for (std::size_t i = 1; i < xs.size(); ++i) {
    if (xs[i] > xs[i - 1]) ++inv;
  }
  return inv;
}

}  // namespace darnwalk::stats

#endif  // DARNWALK_STATS_HPP_
