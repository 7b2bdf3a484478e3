#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "ccdos/baselines.hpp"
#include "ccdos/digraph.hpp"
#include "ccdos/scores.hpp"
#include "ccdos/simgen.hpp"

namespace ccdos {

struct Confusion {
  std::size_t tp = 0;
  std::size_t fp = 0;
  std::size_t tn = 0;
  std::size_t fn = 0;

  std::size_t total() const { return tp + fp + tn + fn; }
  bool operator==(const Confusion&) const = default;
};

Confusion confusion(const std::vector<bool>& flagged, const std::vector<Label>& truth);

struct Metrics {
  double tpr = 0.0;
  double tnr = 0.0;
  double ba = 0.0;
  double precision = 0.0;
  double f_beta = 0.0;
};

// Throws DegenerateLabels unless both classes are present.
Metrics metrics(const Confusion& c, double beta = 2.0);

// ---------------------------------------------------------------------------
// Detection methods

struct MethodSpec {
  enum class Kind { ccd_oos, ccd_ios, lof, odin };

  std::string id;
  Kind kind = Kind::ccd_ios;
  RadiusStrategy radius;
  ClusterOptions clustering;
  DensityForm density = DensityForm::root_of_ratio;
  std::optional<double> threshold;  // table lookup when unset
  double s_min = 0.0;
  BaselineConfig baseline;

  nlohmann::json to_json() const;
};

// Names such as "UNCCD-IOS", "RKCCD-OOS", "FKCCD-IOS" (fixed-k), "LOF", "ODIN".
// CCD-IOS methods built this way carry s_min = default_s_min.
MethodSpec method_from_name(const std::string& name, double default_s_min = 0.04);
// A name string or an object {"id", "score", "digraph", "k", "threshold", "s_min", ...}.
MethodSpec method_from_json(const nlohmann::json& j, double default_s_min = 0.04);

// Flags for one method on one data set; `shape` selects the threshold column.
std::vector<bool> run_method(const MethodSpec& method, const PointSet& ps, ClusterShape shape,
                             unsigned workers = 1);

// ---------------------------------------------------------------------------
// Monte Carlo harness

struct BenchRow {
  std::size_t config = 0;
  std::size_t replicate = 0;
  std::size_t method = 0;
  std::uint64_t seed = 0;
  bool ok = false;
  std::string error;
  Confusion counts;
  Metrics m;
  double wall_seconds = 0.0;
};

struct BenchAggregate {
  std::size_t config = 0;
  std::size_t method = 0;
  std::size_t replicates_ok = 0;
  double tpr_mean = 0, tpr_sd = 0;
  double tnr_mean = 0, tnr_sd = 0;
  double ba_mean = 0, ba_sd = 0;
  double f2_mean = 0, f2_sd = 0;
};

struct RankRow {
  std::size_t config = 0;
  std::size_t method = 0;
  double f2_mean = 0.0;
  std::size_t rank = 0;
  bool top3 = false;
};

struct BenchPlan {
  std::vector<MethodSpec> methods;
  std::vector<SimConfig> configs;
  std::size_t replicates = 10;
  std::uint64_t seed = 1;
  double beta = 2.0;

  // Keys: seed, replicates, beta, s_min (default for IOS methods), methods,
  // base, grid, configs. Unknown keys raise ConfigError naming the key.
  static BenchPlan from_json(const nlohmann::json& j);
  nlohmann::json to_json() const;
};

struct BenchTable {
  BenchPlan plan;
  std::vector<BenchRow> rows;  // ordered by (config, replicate, method)
  std::vector<BenchAggregate> aggregates;  // ordered by (config, method)

  std::size_t succeeded() const;
};

// Each (config, replicate) cell generates one data set from
// derive_seed(plan.seed, config, replicate) and runs every method on it.
BenchTable run_monte_carlo(const BenchPlan& plan, unsigned workers = 1);

std::vector<BenchAggregate> aggregate(const std::vector<BenchRow>& rows, std::size_t configs,
                                      std::size_t methods);

// Dense ranks by descending mean F2 within each config; equal values share
// the better rank.
std::vector<RankRow> rank_methods(const std::vector<BenchAggregate>& aggregates);

std::string config_label(const SimConfig& cfg);
std::string raw_csv(const BenchTable& t);
std::string aggregate_csv(const BenchTable& t);
std::string ranking_csv(const BenchTable& t, const std::vector<RankRow>& ranks);
nlohmann::json bench_to_json(const BenchTable& t, const std::vector<RankRow>& ranks);

}  // namespace ccdos
