#pragma once

// Slow, literal transcriptions used as independent references in tests.
// Nothing here calls into the library's neighbor index or score code.

#include <cstddef>
#include <vector>

#include "ccdos/dataset.hpp"

namespace oracle {

struct Pair {
  std::size_t id;
  double dist;
};

// Full sort of all other points by (distance, id).
std::vector<Pair> sorted_others(const ccdos::PointSet& ps, std::size_t i);

std::vector<Pair> knn(const ccdos::PointSet& ps, std::size_t i, std::size_t k);

// Closed ball, center included.
std::vector<std::size_t> ball(const ccdos::PointSet& ps, std::vector<double> center, double r);

// covers[i] = {j != i : |x_j - x_i| <= r_i}, by double loop.
std::vector<std::vector<std::size_t>> covers(const ccdos::PointSet& ps,
                                             const std::vector<double>& radii);

struct Scores {
  std::vector<double> rho, oos, ci, ios;
};

// rho_i = (|B_i| / r_i)^(1/d); OOS, CI and IOS straight from their
// definitions with double loops over all pairs.
Scores ccd_scores(const ccdos::PointSet& ps, const std::vector<double>& radii,
                  const std::vector<std::size_t>& cluster_of);

// Textbook LOF_k: k-distance, reachability distance, lrd = 1 / mean reach.
std::vector<double> lof(const ccdos::PointSet& ps, std::size_t k);

// In-degree in the directed kNN graph.
std::vector<std::size_t> knn_indegree(const ccdos::PointSet& ps, std::size_t k);

// Components of the mutual-catch graph by repeated flood fill; returns a
// component id per point (ids in order of first member).
std::vector<std::size_t> mutual_components(const std::vector<std::vector<std::size_t>>& covers);

}  // namespace oracle
