#pragma once

#include <cstddef>
#include <optional>
#include <vector>

#include "ccdos/neighbors.hpp"

namespace ccdos {

struct LofConfig {
  std::size_t k_min = 11;
  std::size_t k_max = 30;
  double threshold = 1.5;
};

// k and t default to round(n^0.5) and round(n^0.33).
struct OdinConfig {
  std::optional<std::size_t> k;
  std::optional<std::size_t> t;

  std::size_t resolved_k(std::size_t n) const;
  std::size_t resolved_t(std::size_t n) const;
};

struct BaselineConfig {
  LofConfig lof;
  OdinConfig odin;
};

struct Detection {
  std::vector<double> score;
  std::vector<bool> flag;
};

// LOF_k for a single k, with exactly k nearest neighbors per point (ties by id).
std::vector<double> lof_scores(const NeighborIndex& idx, std::size_t k);

// Per point, the maximum of LOF_k over every k in [k_min, k_max]; flagged
// when that maximum exceeds the threshold.
Detection lof(const NeighborIndex& idx, const LofConfig& cfg = {}, unsigned workers = 1);

// In-degree in the directed kNN graph; flagged when in-degree <= t.
Detection odin(const NeighborIndex& idx, const OdinConfig& cfg = {}, unsigned workers = 1);

}  // namespace ccdos
