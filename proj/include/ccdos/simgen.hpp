#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "ccdos/dataset.hpp"
#include "ccdos/rng.hpp"
#include "ccdos/scores.hpp"

namespace ccdos {

enum class Regime { uniform, gaussian, matern, thomas, mixed };

Regime parse_regime(std::string_view name);
std::string to_string(Regime regime);
// Threshold column for a regime: uniform/matern -> uniform,
// gaussian/thomas -> gaussian, mixed -> mixed.
ClusterShape shape_of(Regime regime);

// Synthetic data settings. The domain is the unit d-cube. Cluster "scale" is
// the ball radius for uniform/Matern clusters and 3 sigma for Gaussian/Thomas
// clusters; separations are multiples of it.
struct SimConfig {
  Regime regime = Regime::uniform;
  std::size_t d = 2;
  std::size_t n = 200;  // inliers + round(outlier_fraction * n) outliers
  std::size_t n_clusters = 3;
  double parent_intensity = 5.0;  // expected parents in the unit cube
  double cluster_radius = 0.1;
  double gaussian_scale = 0.04;
  double correlation = 0.0;  // constant off-diagonal correlation, gaussian only
  double center_separation = 2.5;
  double outlier_fraction = 0.05;
  double outlier_min_separation = 1.0;
  std::size_t collective_size = 0;  // 0: no collective group
  std::uint64_t seed = 1;

  void validate() const;
  std::size_t outlier_count() const;
  nlohmann::json to_json() const;
  // Unknown keys raise ConfigError naming the key.
  static SimConfig from_json(const nlohmann::json& j);
  static SimConfig from_json(const nlohmann::json& j, const SimConfig& base);
};

inline constexpr int kSingleOutlier = -1;
inline constexpr int kCollectiveOutlier = -2;

struct Simulated {
  PointSet points;
  std::vector<double> scale;  // per point; 0 for planted outliers
  std::vector<int> group;     // cluster/parent index, or kSingleOutlier / kCollectiveOutlier
  std::vector<std::vector<double>> centers;
  std::vector<Regime> center_kind;  // per center: uniform/gaussian/matern/thomas
};

// Uniform d-ball or correlated Gaussian clusters at separated random centers;
// all points labeled inlier.
Simulated gen_clusters(const SimConfig& cfg);

// Matern / Thomas / mixed Neyman-Scott process in the unit cube.
Simulated gen_neyman_scott(const SimConfig& cfg);

// Adds round(outlier_fraction * n) single outliers, uniform over the domain
// grown by 20% and at least outlier_min_separation * scale away from every
// inlier, plus an optional collective group of collective_size points.
Simulated inject_outliers(Simulated inliers, const SimConfig& cfg);

// Full generator: clusters or Neyman-Scott process, then outliers.
Simulated generate(const SimConfig& cfg);

// Uniform point in the d-ball of the given radius around center.
std::vector<double> sample_in_ball(CounterRng& rng, std::span<const double> center, double radius);

struct Fixture {
  PointSet points;
  std::vector<std::string> role;  // "C1".."C3" for inliers, "O1".."O9" for outliers
  std::vector<double> gaussian_center;
  double gaussian_sigma = 0.0;
  double gaussian_correlation = 0.0;

  std::size_t index_of(std::string_view role_name) const;
};

// Three clusters (two uniform disks of different density and one Gaussian
// cluster with correlation 0.5) plus nine outliers: a tight collective group
// O1-O4 and singles O5-O9. O7 and O8 sit at the same Euclidean distance from
// the Gaussian center, O7 across the correlation axis and O8 along it.
Fixture figure1_fixture(std::uint64_t seed);

}  // namespace ccdos
