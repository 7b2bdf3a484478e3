#include "ccdos/neighbors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <fmt/format.h>

#include "ccdos/error.hpp"

namespace ccdos {

namespace {

constexpr std::size_t kLeafSize = 12;
constexpr std::size_t kNoSkip = std::numeric_limits<std::size_t>::max();

using Candidate = std::pair<double, std::size_t>;  // (squared distance, id)

}  // namespace

IndexBackend parse_index_backend(std::string_view name) {
  if (name == "brute" || name == "brute-force") return IndexBackend::brute_force;
  if (name == "kd" || name == "kd-tree" || name == "spatial-tree") return IndexBackend::kd_tree;
  throw ConfigError(fmt::format("unknown index backend '{}'", name));
}

NeighborIndex::NeighborIndex(const PointSet& ps, IndexBackend backend)
    : points_(std::make_shared<const PointSet>(ps)), backend_(backend) {
  order_.resize(ps.size());
  for (std::size_t i = 0; i < order_.size(); ++i) order_[i] = i;
  if (backend_ == IndexBackend::kd_tree) {
    nodes_.reserve(2 * ps.size() / kLeafSize + 2);
    build(0, ps.size());
  }
}

std::size_t NeighborIndex::build(std::size_t begin, std::size_t end) {
  const std::size_t d = points_->dim();
  const std::size_t id = nodes_.size();
  nodes_.push_back(Node{begin, end, 0, 0, true});
  box_lo_.resize((id + 1) * d, std::numeric_limits<double>::infinity());
  box_hi_.resize((id + 1) * d, -std::numeric_limits<double>::infinity());
  for (std::size_t p = begin; p < end; ++p) {
    const auto x = points_->point(order_[p]);
    for (std::size_t a = 0; a < d; ++a) {
      box_lo_[id * d + a] = std::min(box_lo_[id * d + a], x[a]);
      box_hi_[id * d + a] = std::max(box_hi_[id * d + a], x[a]);
    }
  }
  if (end - begin <= kLeafSize) return id;

  std::size_t axis = 0;
  double widest = -1.0;
  for (std::size_t a = 0; a < d; ++a) {
    const double w = box_hi_[id * d + a] - box_lo_[id * d + a];
    if (w > widest) {
      widest = w;
      axis = a;
    }
  }
  if (!(widest > 0.0)) return id;  // all coincident

  const std::size_t mid = begin + (end - begin) / 2;
  std::nth_element(order_.begin() + static_cast<std::ptrdiff_t>(begin),
                   order_.begin() + static_cast<std::ptrdiff_t>(mid),
                   order_.begin() + static_cast<std::ptrdiff_t>(end),
                   [&](std::size_t a, std::size_t b) {
                     const double va = points_->at(a, axis);
                     const double vb = points_->at(b, axis);
                     return va < vb || (va == vb && a < b);
                   });
  const std::size_t left = build(begin, mid);
  const std::size_t right = build(mid, end);
  nodes_[id].leaf = false;
  nodes_[id].left = left;
  nodes_[id].right = right;
  return id;
}

// Lower bound on the squared distance from q to any point in the node. Each
// term is no larger than the matching term of a contained point, so the
// rounded sum never exceeds that point's squared distance.
double NeighborIndex::box_sq_distance(std::size_t node, std::span<const double> q) const {
  const std::size_t d = points_->dim();
  double s = 0.0;
  for (std::size_t a = 0; a < d; ++a) {
    const double lo = box_lo_[node * d + a];
    const double hi = box_hi_[node * d + a];
    double diff = 0.0;
    if (q[a] < lo)
      diff = lo - q[a];
    else if (q[a] > hi)
      diff = q[a] - hi;
    s += diff * diff;
  }
  return s;
}

void NeighborIndex::knn_search(std::size_t node, std::span<const double> q, std::size_t skip,
                               std::size_t k, std::vector<Candidate>& heap) const {
  const Node& nd = nodes_[node];
  if (heap.size() == k && box_sq_distance(node, q) > heap.front().first) return;
  if (nd.leaf) {
    for (std::size_t p = nd.begin; p < nd.end; ++p) {
      const std::size_t j = order_[p];
      if (j == skip) continue;
      const Candidate c{squared_distance(q, points_->point(j)), j};
      if (heap.size() < k) {
        heap.push_back(c);
        std::push_heap(heap.begin(), heap.end());
      } else if (c < heap.front()) {
        std::pop_heap(heap.begin(), heap.end());
        heap.back() = c;
        std::push_heap(heap.begin(), heap.end());
      }
    }
    return;
  }
  const double dl = box_sq_distance(nd.left, q);
  const double dr = box_sq_distance(nd.right, q);
  if (dl <= dr) {
    knn_search(nd.left, q, skip, k, heap);
    knn_search(nd.right, q, skip, k, heap);
  } else {
    knn_search(nd.right, q, skip, k, heap);
    knn_search(nd.left, q, skip, k, heap);
  }
}

void NeighborIndex::range_search(std::size_t node, std::span<const double> q, double r,
                                 std::vector<std::size_t>& out) const {
  const Node& nd = nodes_[node];
  if (std::sqrt(box_sq_distance(node, q)) > r) return;
  if (nd.leaf) {
    for (std::size_t p = nd.begin; p < nd.end; ++p) {
      const std::size_t j = order_[p];
      if (std::sqrt(squared_distance(q, points_->point(j))) <= r) out.push_back(j);
    }
    return;
  }
  range_search(nd.left, q, r, out);
  range_search(nd.right, q, r, out);
}

std::vector<Neighbor> NeighborIndex::knn(std::size_t i, std::size_t k) const {
  const std::size_t n = points_->size();
  if (i >= n) throw ConfigError(fmt::format("point id {} out of range", i));
  if (n == 1) return {};
  if (k < 1 || k > n - 1)
    throw BadK(fmt::format("k = {} outside [1, {}]", k, n - 1));

  const auto q = points_->point(i);
  std::vector<Candidate> found;
  if (backend_ == IndexBackend::brute_force) {
    found.reserve(n - 1);
    for (std::size_t j = 0; j < n; ++j)
      if (j != i) found.emplace_back(squared_distance(q, points_->point(j)), j);
    std::partial_sort(found.begin(), found.begin() + static_cast<std::ptrdiff_t>(k),
                      found.end());
    found.resize(k);
  } else {
    found.reserve(k);
    knn_search(0, q, i, k, found);
    std::sort(found.begin(), found.end());
  }
  std::vector<Neighbor> out;
  out.reserve(k);
  for (const auto& [sq, j] : found) out.push_back({j, std::sqrt(sq)});
  return out;
}

std::vector<std::size_t> NeighborIndex::range_query(std::span<const double> location,
                                                    double r) const {
  if (!(r >= 0.0) || !std::isfinite(r))
    throw ConfigError("range query radius must be finite and non-negative");
  std::vector<std::size_t> out;
  if (backend_ == IndexBackend::brute_force) {
    for (std::size_t j = 0; j < points_->size(); ++j)
      if (std::sqrt(squared_distance(location, points_->point(j))) <= r) out.push_back(j);
  } else {
    range_search(0, location, r, out);
    std::sort(out.begin(), out.end());
  }
  return out;
}

std::vector<std::size_t> NeighborIndex::range_query(std::size_t center, double r) const {
  if (center >= points_->size())
    throw ConfigError(fmt::format("point id {} out of range", center));
  return range_query(points_->point(center), r);
}

}  // namespace ccdos
