#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "ccdos/dataset.hpp"
#include "ccdos/neighbors.hpp"

namespace ccdos {

// How covering-ball radii are chosen.
//
//   fixed_k    r_i = distance to the k-th nearest neighbor.
//   rk_approx  r_i = largest k-NN candidate radius whose observed count is not
//              significantly below the count expected under complete spatial
//              randomness (global intensity n / bounding-box volume, one-sided
//              binomial envelope at `significance`).
//   un_approx  r_i = multiplier * (nnd_quantile)-quantile of the 1-NN
//              distances of x_i's k nearest neighbors.
//
// `k` defaults to max(2, round(sqrt(n))), clamped to n-1.
struct RadiusStrategy {
  enum class Kind { fixed_k, rk_approx, un_approx };

  Kind kind = Kind::fixed_k;
  std::optional<std::size_t> k;
  double significance = 0.01;
  double nnd_quantile = 0.5;
  double multiplier = 2.0;

  std::size_t resolved_k(std::size_t n) const;
  nlohmann::json to_json() const;
};

RadiusStrategy::Kind parse_radius_kind(std::string_view name);
std::string to_string(RadiusStrategy::Kind kind);

// Radii are strictly positive: a zero radius (x_i coincides with its
// neighbors) is replaced by the smallest positive distance from x_i.
std::vector<double> estimate_radii(const NeighborIndex& idx, const RadiusStrategy& strategy,
                                   unsigned workers = 1);

struct CatchDigraph {
  std::vector<double> radii;
  // covers[i]: sorted ids j != i with |x_j - x_i| <= r_i.
  std::vector<std::vector<std::size_t>> covers;
  // |B(x_i, r_i)|, the center included.
  std::vector<std::size_t> covered_count;
  std::size_t dim = 0;

  std::size_t size() const { return radii.size(); }
  bool catches(std::size_t i, std::size_t j) const;
};

CatchDigraph build_catch_digraph(const NeighborIndex& idx, std::vector<double> radii,
                                 unsigned workers = 1);

struct Clustering {
  std::vector<std::size_t> cluster_of;
  std::vector<std::vector<std::size_t>> members;

  std::size_t cluster_count() const { return members.size(); }
  std::size_t cluster_size(std::size_t c) const { return members[c].size(); }
};

struct ClusterOptions {
  // A dissolved component joins the cluster of the nearest valid point if that
  // point lies within attach_factor * r of one of its members.
  double attach_factor = 3.0;
  // Mutual-catch components smaller than max(2, ceil(fraction * n)) are
  // dissolved and re-attached as a unit. With fraction 0 only isolated
  // vertices are re-attached.
  double min_cluster_fraction = 0.02;

  std::size_t min_cluster_size(std::size_t n) const;
};

// Connected components of the mutual-catch graph (i -- j iff each covers the
// other), with small components attached to nearby valid clusters. Cluster
// ids are ordered by decreasing size, ties by smallest member id.
Clustering cluster(const CatchDigraph& dg, const PointSet& ps, const ClusterOptions& opts = {});

// Clustering with every point in cluster 0.
Clustering single_cluster(std::size_t n);
// Clustering from explicit labels; ids are compacted in order of first use.
Clustering clustering_from_labels(const std::vector<std::size_t>& labels);

std::vector<std::size_t> outbound_neighbors(const CatchDigraph& dg, std::size_t i);
// Same-cluster j != i whose ball covers x_i.
std::vector<std::size_t> inbound_neighbors(const CatchDigraph& dg, const Clustering& cl,
                                           std::size_t i);
// inbound_neighbors for every point in one pass.
std::vector<std::vector<std::size_t>> all_inbound_neighbors(const CatchDigraph& dg,
                                                            const Clustering& cl);

nlohmann::json to_json(const CatchDigraph& dg, const Clustering& cl);

}  // namespace ccdos
