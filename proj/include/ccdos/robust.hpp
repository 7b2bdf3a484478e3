#pragma once

#include <span>
#include <vector>

namespace ccdos {

// Normal-consistency constant: MAD / 0.6745 estimates sigma for Gaussian data.
inline constexpr double kMadnConstant = 0.6745;

// Median of a sample; even sizes average the two middle order statistics.
// Empty input returns 0.
double median(std::span<const double> values);

// Median absolute deviation about `center` (not normalized).
double mad(std::span<const double> values, double center);

// MAD about the median, divided by 0.6745.
double madn(std::span<const double> values);

// Linearly interpolated empirical quantile at q*(n-1); q clamped to [0,1].
double quantile(std::span<const double> values, double q);

double mean(std::span<const double> values);

// Sample standard deviation (n-1 denominator); 0 for fewer than two values.
double stddev(std::span<const double> values);

}  // namespace ccdos
