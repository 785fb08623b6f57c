#pragma once

#include <cmath>
#include <cstdint>
#include <map>
#include <stdexcept>
#include <vector>

#include <boost/math/distributions/students_t.hpp>

namespace crisiskit {

/// Inverse standard normal CDF (Acklam's rational approximation with one
/// Halley refinement; good to ~1e-13).
inline double probit(double p) {
  if (!(p > 0.0 && p < 1.0)) throw std::invalid_argument("probit domain is (0,1)");
  static const double a[] = {-3.969683028665376e+01, 2.209460984245205e+02,
                             -2.759285104469687e+02, 1.383577518672690e+02,
                             -3.066479806614716e+01, 2.506628277459239e+00};
  static const double b[] = {-5.447609879822406e+01, 1.615858368580409e+02,
                             -1.556989798598866e+02, 6.680131188771972e+01,
                             -1.328068155288572e+01};
  static const double c[] = {-7.784894002430293e-03, -3.223964580411365e-01,
                             -2.400758277161838e+00, -2.549732539343734e+00,
                             4.374664141464968e+00,  2.938163982698783e+00};
  static const double d[] = {7.784695709041462e-03, 3.224671290700398e-01,
                             2.445134137142996e+00, 3.754408661907416e+00};
  const double plow = 0.02425, phigh = 1 - plow;
  double x;
  if (p < plow) {
    const double q = std::sqrt(-2 * std::log(p));
    x = (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
        ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1);
  } else if (p <= phigh) {
    const double q = p - 0.5, r = q * q;
    x = (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q /
        (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1);
  } else {
    const double q = std::sqrt(-2 * std::log(1 - p));
    x = -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
        ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1);
  }
  // one Halley step against erfc
  const double e = 0.5 * std::erfc(-x / std::sqrt(2.0)) - p;
  const double u = e * std::sqrt(2 * 3.14159265358979323846) * std::exp(x * x / 2);
  return x - u / (1 + x * u / 2);
}

/// Two-sided Student-t critical value, e.g. t_quantile(0.975, r - 1).
inline double t_quantile(double p, int dof) {
  if (dof < 1) throw std::invalid_argument("t quantile needs dof >= 1");
  boost::math::students_t dist{double(dof)};
  return boost::math::quantile(dist, p);
}

inline double mean(const std::vector<double>& xs) {
  double s = 0;
  for (double x : xs) s += x;
  return s / double(xs.size());
}

/// Sample standard deviation (n - 1 denominator).
inline double sample_stddev(const std::vector<double>& xs) {
  if (xs.size() < 2) return 0.0;
  const double m = mean(xs);
  double s = 0;
  for (double x : xs) s += (x - m) * (x - m);
  return std::sqrt(s / double(xs.size() - 1));
}

/// Student-t 95% confidence-interval half-width for a set of run scores:
/// t_{0.975, n-1} * s / sqrt(n). Zero when fewer than two scores.
inline double ci95_half_width(const std::vector<double>& scores) {
  if (scores.size() < 2) return 0.0;
  return t_quantile(0.975, int(scores.size()) - 1) * sample_stddev(scores) /
         std::sqrt(double(scores.size()));
}

/// Splits `total` across keys proportionally to `counts` by the largest
/// remainder method. Each key receives at most its cap (its count when
/// `caps` is empty). Remainder ties break on key order, so results are
/// deterministic.
template <class K>
std::map<K, std::int64_t> largest_remainder_allocation(
    const std::map<K, std::int64_t>& counts, std::int64_t total,
    const std::map<K, std::int64_t>& caps = {}) {
  std::int64_t population = 0;
  for (const auto& [key, count] : counts) population += count;
  if (population <= 0) throw std::invalid_argument("allocation over empty counts");

  auto cap_of = [&](const K& key, std::int64_t count) {
    auto it = caps.find(key);
    return it == caps.end() ? count : it->second;
  };

  std::map<K, std::int64_t> alloc;
  std::vector<std::pair<double, K>> remainders;
  std::int64_t assigned = 0;
  for (const auto& [key, count] : counts) {
    const double exact = double(total) * double(count) / double(population);
    const auto base = std::int64_t(std::floor(exact));
    alloc[key] = std::min(base, cap_of(key, count));
    assigned += alloc[key];
    remainders.push_back({exact - double(base), key});
  }
  std::sort(remainders.begin(), remainders.end(), [](const auto& a, const auto& b) {
    if (a.first != b.first) return a.first > b.first;
    return a.second < b.second;
  });
  bool progressed = true;
  while (assigned < total && progressed) {
    progressed = false;
    for (auto& [rem, key] : remainders) {
      if (assigned >= total) break;
      if (alloc[key] < cap_of(key, counts.at(key))) {
        alloc[key] += 1;
        ++assigned;
        progressed = true;
      }
    }
  }
  return alloc;
}

}  // namespace crisiskit
