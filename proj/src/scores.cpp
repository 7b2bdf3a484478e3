#include "ccdos/scores.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numeric>

#include <fmt/format.h>

#include "ccdos/error.hpp"
#include "ccdos/robust.hpp"

namespace ccdos {

DensityForm parse_density_form(std::string_view name) {
  if (name == "root-of-ratio" || name == "root") return DensityForm::root_of_ratio;
  if (name == "count-over-volume" || name == "volume") return DensityForm::count_over_volume;
  throw ConfigError(fmt::format("unknown density form '{}'", name));
}

std::string to_string(DensityForm form) {
  return form == DensityForm::root_of_ratio ? "root-of-ratio" : "count-over-volume";
}

std::vector<double> vicinity_density(const CatchDigraph& dg, DensityForm form) {
  const double d = static_cast<double>(dg.dim);
  std::vector<double> rho(dg.size());
  for (std::size_t i = 0; i < dg.size(); ++i) {
    const double count = static_cast<double>(dg.covered_count[i]);
    rho[i] = form == DensityForm::root_of_ratio ? std::pow(count / dg.radii[i], 1.0 / d)
                                                : count / std::pow(dg.radii[i], d);
  }
  return rho;
}

namespace {

// Sums in ascending order so that equal multisets give bitwise-equal totals
// whatever the point ids are.
double canonical_sum(std::vector<double>& terms) {
  std::sort(terms.begin(), terms.end());
  double sum = 0.0;
  for (double t : terms) sum += t;
  return sum;
}

}  // namespace

std::vector<double> outbound_scores(const CatchDigraph& dg, const std::vector<double>& rho) {
  std::vector<double> out(dg.size());
  for (std::size_t i = 0; i < dg.size(); ++i) {
    const auto& nb = dg.covers[i];
    if (nb.empty()) {
      out[i] = std::numeric_limits<double>::infinity();
      continue;
    }
    std::vector<double> terms;
    terms.reserve(nb.size());
    for (std::size_t j : nb) terms.push_back(rho[j]);
    out[i] = (canonical_sum(terms) / static_cast<double>(nb.size())) / rho[i];
  }
  return out;
}

std::vector<double> cumulative_influence(const CatchDigraph& dg, const Clustering& cl,
                                         const std::vector<double>& rho) {
  const auto inbound = all_inbound_neighbors(dg, cl);
  std::vector<double> ci(dg.size(), 0.0);
  std::vector<double> terms;
  for (std::size_t i = 0; i < dg.size(); ++i) {
    terms.clear();
    for (std::size_t j : inbound[i]) terms.push_back(rho[j]);
    ci[i] = canonical_sum(terms);
  }
  return ci;
}

std::vector<double> inbound_scores_raw(const CatchDigraph& dg, const Clustering& cl,
                                       const std::vector<double>& rho) {
  const auto inbound = all_inbound_neighbors(dg, cl);
  std::vector<double> ios(dg.size());
  std::vector<double> terms;
  for (std::size_t i = 0; i < dg.size(); ++i) {
    terms.clear();
    terms.push_back(rho[i]);
    for (std::size_t j : inbound[i]) terms.push_back(rho[j]);
    ios[i] = 1.0 / canonical_sum(terms);
  }
  return ios;
}

std::vector<double> inbound_scores_raw(const std::vector<double>& ci,
                                       const std::vector<double>& rho) {
  std::vector<double> ios(ci.size());
  for (std::size_t i = 0; i < ci.size(); ++i) ios[i] = 1.0 / (ci[i] + rho[i]);
  return ios;
}

std::vector<double> standardize_ios(const Clustering& cl, const std::vector<double>& ios_raw) {
  std::vector<double> out(ios_raw.size(), 0.0);
  std::vector<double> values;
  for (const auto& members : cl.members) {
    values.clear();
    for (std::size_t i : members) values.push_back(ios_raw[i]);
    const double med = median(values);
    const double scale = mad(values, med) / kMadnConstant;
    if (!(scale > 0.0)) continue;  // degenerate cluster: all zero
    for (std::size_t i : members) out[i] = (ios_raw[i] - med) / scale;
  }
  return out;
}

std::vector<double> standardize_ios_naive(const Clustering& cl,
                                          const std::vector<double>& ios_raw) {
  std::vector<double> out(ios_raw.size(), 0.0);
  std::vector<double> values;
  for (const auto& members : cl.members) {
    values.clear();
    for (std::size_t i : members) values.push_back(ios_raw[i]);
    const double m = mean(values);
    const double sd = stddev(values);
    if (!(sd > 0.0)) continue;
    for (std::size_t i : members) out[i] = (ios_raw[i] - m) / sd;
  }
  return out;
}

std::vector<double> break_ties(const Clustering& cl, const std::vector<double>& scores,
                               const std::vector<double>& rho) {
  std::vector<double> out = scores;
  std::vector<std::size_t> order;
  for (const auto& members : cl.members) {
    order = members;
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
      return scores[a] < scores[b] || (scores[a] == scores[b] && a < b);
    });
    const std::size_t nc = order.size();
    std::size_t start = 0;
    while (start < nc) {
      std::size_t stop = start + 1;
      while (stop < nc && scores[order[stop]] == scores[order[start]]) ++stop;
      if (stop - start >= 2) {
        const double tied = scores[order[start]];
        const double below = start > 0 ? scores[order[start - 1]] : tied;
        const double above = stop < nc ? scores[order[stop]] : tied;
        double rho_sum = 0.0;
        for (std::size_t p = start; p < stop; ++p) rho_sum += rho[order[p]];
        for (std::size_t p = start; p < stop; ++p) {
          const std::size_t i = order[p];
          out[i] = above - (above - below) * rho[i] / rho_sum;
        }
      }
      start = stop;
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Thresholds

ScoreKind parse_score_kind(std::string_view name) {
  if (name == "oos" || name == "OOS") return ScoreKind::oos;
  if (name == "ios" || name == "IOS") return ScoreKind::ios;
  throw ConfigError(fmt::format("unknown score kind '{}'", name));
}

ClusterShape parse_cluster_shape(std::string_view name) {
  if (name == "uniform") return ClusterShape::uniform;
  if (name == "gaussian") return ClusterShape::gaussian;
  if (name == "mixed") return ClusterShape::mixed;
  throw ConfigError(fmt::format("unknown cluster shape '{}'", name));
}

std::string to_string(ScoreKind kind) { return kind == ScoreKind::oos ? "oos" : "ios"; }

std::string to_string(ClusterShape shape) {
  switch (shape) {
    case ClusterShape::uniform: return "uniform";
    case ClusterShape::gaussian: return "gaussian";
    case ClusterShape::mixed: return "mixed";
  }
  return "?";
}

std::string to_string(DigraphKind kind) { return kind == DigraphKind::rk ? "rk" : "un"; }

DigraphKind threshold_family(RadiusStrategy::Kind kind) {
  return kind == RadiusStrategy::Kind::un_approx ? DigraphKind::un : DigraphKind::rk;
}

namespace {

using Row = std::array<double, 7>;

// Rows: RK-OOS, UN-OOS, RK-IOS, UN-IOS.
constexpr std::array<Row, 4> kUniform{{
    {6, 6.5, 5, 4, 4, 14, 13},
    {4, 4, 4, 3, 3, 5, 13},
    {4.5, 4, 4.5, 5, 4.5, 6, 7},
    {6, 4.5, 4, 3.5, 4.5, 3.5, 6},
}};

constexpr std::array<Row, 4> kGaussian{{
    {6, 5.5, 4.5, 3.5, 3.5, 6.5, 10},
    {5.5, 4.5, 4, 3.5, 3, 3, 2.5},
    {35, 17, 13, 6.5, 2.5, 2.5, 2.5},
    {35, 17, 13, 6.5, 6, 2.5, 2.5},
}};

std::size_t dimension_column(std::size_t d) {
  const auto& dims = ThresholdTable::dimensions();
  std::size_t best = 0;
  for (std::size_t c = 1; c < dims.size(); ++c) {
    const auto gap = [d](std::size_t v) { return v > d ? v - d : d - v; };
    if (gap(dims[c]) < gap(dims[best])) best = c;
  }
  return best;
}

}  // namespace

const std::vector<std::size_t>& ThresholdTable::dimensions() {
  static const std::vector<std::size_t> dims{2, 3, 5, 10, 20, 50, 100};
  return dims;
}

double ThresholdTable::lookup(ScoreKind score, DigraphKind digraph, ClusterShape shape,
                              std::size_t d) const {
  const std::size_t row = (score == ScoreKind::ios ? 2 : 0) + (digraph == DigraphKind::un ? 1 : 0);
  const std::size_t col = dimension_column(d);
  switch (shape) {
    case ClusterShape::uniform: return kUniform[row][col];
    case ClusterShape::gaussian: return kGaussian[row][col];
    case ClusterShape::mixed: return 0.5 * (kUniform[row][col] + kGaussian[row][col]);
  }
  return kUniform[row][col];
}

double default_threshold(ScoreKind score, DigraphKind digraph, ClusterShape shape,
                         std::size_t d, std::optional<double> override_value) {
  if (override_value) return *override_value;
  return ThresholdTable{}.lookup(score, digraph, shape, d);
}

std::vector<bool> flag_outliers(const std::vector<double>& scores, double threshold,
                                const Clustering& cl, double s_min, ScoreKind kind) {
  std::vector<bool> flags(scores.size());
  for (std::size_t i = 0; i < scores.size(); ++i) flags[i] = scores[i] > threshold;
  if (kind == ScoreKind::ios && s_min > 0.0) {
    const double n = static_cast<double>(scores.size());
    for (const auto& members : cl.members)
      if (static_cast<double>(members.size()) < s_min * n)
        for (std::size_t i : members) flags[i] = true;
  }
  return flags;
}

std::vector<std::size_t> descending_ranks(const std::vector<double>& scores) {
  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });
  std::vector<std::size_t> rank(scores.size());
  for (std::size_t p = 0; p < order.size(); ++p) rank[order[p]] = p + 1;
  return rank;
}

// ---------------------------------------------------------------------------
// Pipeline

ScoreReport score_digraph(const CatchDigraph& dg, const Clustering& cl,
                          const FlagSettings& flags, DensityForm density) {
  ScoreReport rep;
  rep.cluster = cl.cluster_of;
  rep.rho = vicinity_density(dg, density);
  rep.oos = outbound_scores(dg, rep.rho);
  rep.ci = cumulative_influence(dg, cl, rep.rho);
  rep.ios_raw = inbound_scores_raw(dg, cl, rep.rho);
  rep.ios_naive = standardize_ios_naive(cl, rep.ios_raw);
  rep.ios_std = break_ties(cl, standardize_ios(cl, rep.ios_raw), rep.rho);
  rep.oos_rank = descending_ranks(rep.oos);
  rep.ios_rank = descending_ranks(rep.ios_std);
  rep.oos_threshold = flags.oos_threshold;
  rep.ios_threshold = flags.ios_threshold;
  rep.s_min = flags.s_min;
  rep.oos_outlier = flag_outliers(rep.oos, flags.oos_threshold, cl, 0.0, ScoreKind::oos);
  rep.ios_outlier = flag_outliers(rep.ios_std, flags.ios_threshold, cl, flags.s_min, ScoreKind::ios);
  return rep;
}

CcdResult run_ccd(const PointSet& ps, const CcdConfig& cfg, const FlagSettings& flags) {
  const NeighborIndex idx(ps, cfg.backend);
  auto radii = estimate_radii(idx, cfg.radius, cfg.workers);
  CcdResult res;
  res.digraph = build_catch_digraph(idx, std::move(radii), cfg.workers);
  res.clustering = cluster(res.digraph, ps, cfg.clustering);
  res.report = score_digraph(res.digraph, res.clustering, flags, cfg.density);
  return res;
}

namespace {

std::string num(double v) {
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  return fmt::format("{}", v);
}

nlohmann::json jnum(double v) {
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  return v;
}

}  // namespace

std::string report_to_csv(const ScoreReport& r) {
  std::string out =
      "id,cluster,rho,oos,ci,ios_raw,ios_naive,ios_std,oos_rank,ios_rank,oos_outlier,ios_outlier\n";
  for (std::size_t i = 0; i < r.size(); ++i) {
    out += fmt::format("{},{},{},{},{},{},{},{},{},{},{},{}\n", i, r.cluster[i], num(r.rho[i]),
                       num(r.oos[i]), num(r.ci[i]), num(r.ios_raw[i]), num(r.ios_naive[i]),
                       num(r.ios_std[i]), r.oos_rank[i], r.ios_rank[i], r.oos_outlier[i] ? 1 : 0,
                       r.ios_outlier[i] ? 1 : 0);
  }
  return out;
}

nlohmann::json report_to_json(const ScoreReport& r) {
  nlohmann::json j;
  j["oos_threshold"] = r.oos_threshold;
  j["ios_threshold"] = r.ios_threshold;
  j["s_min"] = r.s_min;
  j["points"] = nlohmann::json::array();
  for (std::size_t i = 0; i < r.size(); ++i) {
    j["points"].push_back({{"id", i},
                           {"cluster", r.cluster[i]},
                           {"rho", jnum(r.rho[i])},
                           {"oos", jnum(r.oos[i])},
                           {"ci", jnum(r.ci[i])},
                           {"ios_raw", jnum(r.ios_raw[i])},
                           {"ios_naive", jnum(r.ios_naive[i])},
                           {"ios_std", jnum(r.ios_std[i])},
                           {"oos_rank", r.oos_rank[i]},
                           {"ios_rank", r.ios_rank[i]},
                           {"oos_outlier", static_cast<bool>(r.oos_outlier[i])},
                           {"ios_outlier", static_cast<bool>(r.ios_outlier[i])}});
  }
  return j;
}

}  // namespace ccdos
