#pragma once

#include <cstddef>
#include <memory>
#include <span>
#include <string_view>
#include <vector>

#include "ccdos/dataset.hpp"

namespace ccdos {

struct Neighbor {
  std::size_t id;
  double distance;

  bool operator==(const Neighbor&) const = default;
};

enum class IndexBackend { brute_force, kd_tree };

IndexBackend parse_index_backend(std::string_view name);

// Exact Euclidean neighbor queries over an immutable snapshot of a PointSet.
// Both backends return identical answers: kNN lists are ordered by
// (distance, id) and range queries return sorted ids of the closed ball.
class NeighborIndex {
 public:
  NeighborIndex(const PointSet& ps, IndexBackend backend = IndexBackend::kd_tree);

  IndexBackend backend() const { return backend_; }
  const PointSet& points() const { return *points_; }

  // k nearest points to point i, self excluded. Throws BadK unless
  // 1 <= k <= n-1; a single-point set yields an empty list.
  std::vector<Neighbor> knn(std::size_t i, std::size_t k) const;

  // All j with |x_j - x_center| <= r, the center included.
  std::vector<std::size_t> range_query(std::size_t center, double r) const;
  std::vector<std::size_t> range_query(std::span<const double> location, double r) const;

 private:
  struct Node {
    std::size_t begin = 0;
    std::size_t end = 0;
    std::size_t left = 0;
    std::size_t right = 0;
    bool leaf = true;
  };

  std::size_t build(std::size_t begin, std::size_t end);
  double box_sq_distance(std::size_t node, std::span<const double> q) const;
  void knn_search(std::size_t node, std::span<const double> q, std::size_t skip,
                  std::size_t k, std::vector<std::pair<double, std::size_t>>& heap) const;
  void range_search(std::size_t node, std::span<const double> q, double r,
                    std::vector<std::size_t>& out) const;

  std::shared_ptr<const PointSet> points_;
  IndexBackend backend_;
  std::vector<std::size_t> order_;
  std::vector<Node> nodes_;
  std::vector<double> box_lo_;
  std::vector<double> box_hi_;
};

}  // namespace ccdos
