#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "ccdos/dataset.hpp"
#include "ccdos/digraph.hpp"

namespace ccdos {

// Two readings of the vicinity density:
//   root_of_ratio      rho_i = (|B_i| / r_i)^(1/d)   (default)
//   count_over_volume  rho_i = |B_i| / r_i^d
enum class DensityForm { root_of_ratio, count_over_volume };

DensityForm parse_density_form(std::string_view name);
std::string to_string(DensityForm form);

std::vector<double> vicinity_density(const CatchDigraph& dg,
                                     DensityForm form = DensityForm::root_of_ratio);

// Mean outbound-neighbor density over own density. An empty outbound set
// yields +infinity.
std::vector<double> outbound_scores(const CatchDigraph& dg, const std::vector<double>& rho);

// Sum of the densities of same-cluster points whose balls cover x_i.
std::vector<double> cumulative_influence(const CatchDigraph& dg, const Clustering& cl,
                                         const std::vector<double>& rho);

// 1 / (CI_i + rho_i) with the denominator summed in one canonical pass, so
// points whose inbound-plus-self density multisets agree get equal scores.
std::vector<double> inbound_scores_raw(const CatchDigraph& dg, const Clustering& cl,
                                       const std::vector<double>& rho);
// Same formula from precomputed CI.
std::vector<double> inbound_scores_raw(const std::vector<double>& ci,
                                       const std::vector<double>& rho);

// Per cluster: (IOS - Med) / MADN. Clusters with MADN == 0 map to 0.
std::vector<double> standardize_ios(const Clustering& cl, const std::vector<double>& ios_raw);

// Mean / sample-SD standardization per cluster. Reported for comparison only;
// never used for flagging.
std::vector<double> standardize_ios_naive(const Clustering& cl,
                                          const std::vector<double>& ios_raw);

// Linearized tie-break within each cluster. A maximal group of m exactly
// equal scores at ascending ranks k..k+m-1 becomes
//   s_(k+m) - (s_(k+m) - s_(k-1)) * rho_i / sum(rho over the group),
// with s_(k-1) := s_(k) when the group is the minimum and s_(k+m) := s_(k)
// when it is the maximum. Brackets come from the scores before tie-breaking.
std::vector<double> break_ties(const Clustering& cl, const std::vector<double>& scores,
                               const std::vector<double>& rho);

// ---------------------------------------------------------------------------
// Thresholds

enum class ScoreKind { oos, ios };
enum class DigraphKind { rk, un };
enum class ClusterShape { uniform, gaussian, mixed };

ScoreKind parse_score_kind(std::string_view name);
ClusterShape parse_cluster_shape(std::string_view name);
std::string to_string(ScoreKind kind);
std::string to_string(ClusterShape shape);
std::string to_string(DigraphKind kind);

// fixed-k and rk-approx radii both read the rk rows; un-approx reads un.
DigraphKind threshold_family(RadiusStrategy::Kind kind);

// Elbow thresholds tabulated at d in {2, 3, 5, 10, 20, 50, 100}. Mixed shapes
// average the uniform and Gaussian entries. Other d use the nearest listed
// dimension, ties toward the smaller one.
class ThresholdTable {
 public:
  static const std::vector<std::size_t>& dimensions();

  double lookup(ScoreKind score, DigraphKind digraph, ClusterShape shape, std::size_t d) const;
};

// Table lookup unless `override_value` is set.
double default_threshold(ScoreKind score, DigraphKind digraph, ClusterShape shape,
                         std::size_t d, std::optional<double> override_value = std::nullopt);

// score > threshold; for IOS additionally every member of a cluster holding
// less than s_min * n points.
std::vector<bool> flag_outliers(const std::vector<double>& scores, double threshold,
                                const Clustering& cl, double s_min, ScoreKind kind);

// 1 = most outlying; equal scores ordered by id.
std::vector<std::size_t> descending_ranks(const std::vector<double>& scores);

// ---------------------------------------------------------------------------
// Pipeline

struct CcdConfig {
  RadiusStrategy radius;
  ClusterOptions clustering;
  DensityForm density = DensityForm::root_of_ratio;
  IndexBackend backend = IndexBackend::kd_tree;
  unsigned workers = 1;
};

struct ScoreReport {
  std::vector<std::size_t> cluster;
  std::vector<double> rho;
  std::vector<double> oos;
  std::vector<double> ci;
  std::vector<double> ios_raw;
  std::vector<double> ios_naive;
  std::vector<double> ios_std;  // robust standardization, ties broken
  std::vector<std::size_t> oos_rank;
  std::vector<std::size_t> ios_rank;
  std::vector<bool> oos_outlier;
  std::vector<bool> ios_outlier;
  double oos_threshold = 0.0;
  double ios_threshold = 0.0;
  double s_min = 0.0;

  std::size_t size() const { return rho.size(); }
};

struct CcdResult {
  CatchDigraph digraph;
  Clustering clustering;
  ScoreReport report;
};

struct FlagSettings {
  double oos_threshold = 2.0;
  double ios_threshold = 2.0;
  double s_min = 0.0;
};

// Scores computed from an existing digraph and clustering.
ScoreReport score_digraph(const CatchDigraph& dg, const Clustering& cl,
                          const FlagSettings& flags, DensityForm density = DensityForm::root_of_ratio);

// radii -> digraph -> clustering -> scores -> flags.
CcdResult run_ccd(const PointSet& ps, const CcdConfig& cfg, const FlagSettings& flags);

// Non-finite values are written as the string "inf".
std::string report_to_csv(const ScoreReport& report);
nlohmann::json report_to_json(const ScoreReport& report);

}  // namespace ccdos
