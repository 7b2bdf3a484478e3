#include "ccdos/baselines.hpp"

#include <algorithm>
#include <cmath>

#include <fmt/format.h>

#include "ccdos/error.hpp"
#include "ccdos/parallel.hpp"

namespace ccdos {

namespace {

// Keeps lrd finite when a point and its neighbors coincide.
constexpr double kReachFloor = 1e-10;

std::vector<std::vector<Neighbor>> all_knn(const NeighborIndex& idx, std::size_t k,
                                           unsigned workers) {
  std::vector<std::vector<Neighbor>> nn(idx.points().size());
  parallel_for(nn.size(), workers, [&](std::size_t i) { nn[i] = idx.knn(i, k); });
  return nn;
}

// LOF for neighborhood size k using the first k entries of each list.
std::vector<double> lof_from_lists(const std::vector<std::vector<Neighbor>>& nn, std::size_t k) {
  const std::size_t n = nn.size();
  std::vector<double> kdist(n);
  for (std::size_t i = 0; i < n; ++i) kdist[i] = nn[i][k - 1].distance;
  std::vector<double> lrd(n);
  for (std::size_t i = 0; i < n; ++i) {
    double reach = 0.0;
    for (std::size_t m = 0; m < k; ++m) {
      const auto& o = nn[i][m];
      reach += std::max(kdist[o.id], o.distance);
    }
    lrd[i] = 1.0 / (reach / static_cast<double>(k) + kReachFloor);
  }
  std::vector<double> out(n);
  for (std::size_t i = 0; i < n; ++i) {
    double sum = 0.0;
    for (std::size_t m = 0; m < k; ++m) sum += lrd[nn[i][m].id];
    out[i] = sum / static_cast<double>(k) / lrd[i];
  }
  return out;
}

}  // namespace

std::size_t OdinConfig::resolved_k(std::size_t n) const {
  return k.value_or(static_cast<std::size_t>(std::llround(std::pow(static_cast<double>(n), 0.5))));
}

std::size_t OdinConfig::resolved_t(std::size_t n) const {
  return t.value_or(static_cast<std::size_t>(std::llround(std::pow(static_cast<double>(n), 0.33))));
}

std::vector<double> lof_scores(const NeighborIndex& idx, std::size_t k) {
  const std::size_t n = idx.points().size();
  if (k < 1 || k >= n) throw BadK(fmt::format("LOF needs 1 <= k < n (k = {}, n = {})", k, n));
  return lof_from_lists(all_knn(idx, k, 1), k);
}

Detection lof(const NeighborIndex& idx, const LofConfig& cfg, unsigned workers) {
  const std::size_t n = idx.points().size();
  if (cfg.k_min < 1 || cfg.k_min > cfg.k_max)
    throw BadK(fmt::format("LOF needs 1 <= k_min <= k_max (got {}..{})", cfg.k_min, cfg.k_max));
  if (n <= cfg.k_max)
    throw BadK(fmt::format("LOF needs n > k_max (n = {}, k_max = {})", n, cfg.k_max));

  const auto nn = all_knn(idx, cfg.k_max, workers);
  Detection det;
  det.score.assign(n, 0.0);
  for (std::size_t k = cfg.k_min; k <= cfg.k_max; ++k) {
    const auto s = lof_from_lists(nn, k);
    for (std::size_t i = 0; i < n; ++i) det.score[i] = std::max(det.score[i], s[i]);
  }
  det.flag.resize(n);
  for (std::size_t i = 0; i < n; ++i) det.flag[i] = det.score[i] > cfg.threshold;
  return det;
}

Detection odin(const NeighborIndex& idx, const OdinConfig& cfg, unsigned workers) {
  const std::size_t n = idx.points().size();
  const std::size_t k = cfg.resolved_k(n);
  if (k < 1 || k >= n) throw BadK(fmt::format("ODIN needs 1 <= k < n (k = {}, n = {})", k, n));
  const std::size_t t = cfg.resolved_t(n);

  const auto nn = all_knn(idx, k, workers);
  std::vector<std::size_t> indegree(n, 0);
  for (const auto& list : nn)
    for (const auto& nb : list) ++indegree[nb.id];
  Detection det;
  det.score.resize(n);
  det.flag.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    det.score[i] = static_cast<double>(indegree[i]);
    det.flag[i] = indegree[i] <= t;
  }
  return det;
}

}  // namespace ccdos
