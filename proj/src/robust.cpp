#include "ccdos/robust.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace ccdos {

namespace {

double median_inplace(std::vector<double>& v) {
  if (v.empty()) return 0.0;
  const auto n = v.size();
  const auto mid = static_cast<std::ptrdiff_t>(n / 2);
  std::nth_element(v.begin(), v.begin() + mid, v.end());
  double med = v[n / 2];
  if (n % 2 == 0) {
    const double lower = *std::max_element(v.begin(), v.begin() + mid);
    med = 0.5 * (med + lower);
  }
  return med;
}

}  // namespace

double median(std::span<const double> values) {
  std::vector<double> tmp(values.begin(), values.end());
  return median_inplace(tmp);
}

double mad(std::span<const double> values, double center) {
  std::vector<double> dev;
  dev.reserve(values.size());
  for (double x : values) dev.push_back(std::fabs(x - center));
  return median_inplace(dev);
}

double madn(std::span<const double> values) {
  return mad(values, median(values)) / kMadnConstant;
}

double quantile(std::span<const double> values, double q) {
  if (values.empty()) return 0.0;
  q = std::clamp(q, 0.0, 1.0);
  std::vector<double> v(values.begin(), values.end());
  std::sort(v.begin(), v.end());
  const double idx = q * static_cast<double>(v.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(idx));
  const auto hi = static_cast<std::size_t>(std::ceil(idx));
  const double t = idx - static_cast<double>(lo);
  return v[lo] + (v[hi] - v[lo]) * t;
}

double mean(std::span<const double> values) {
  if (values.empty()) return 0.0;
  return std::accumulate(values.begin(), values.end(), 0.0) /
         static_cast<double>(values.size());
}

double stddev(std::span<const double> values) {
  if (values.size() < 2) return 0.0;
  const double m = mean(values);
  double acc = 0.0;
  for (double x : values) acc += (x - m) * (x - m);
  return std::sqrt(acc / static_cast<double>(values.size() - 1));
}

}  // namespace ccdos
