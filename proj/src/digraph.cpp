#include "ccdos/digraph.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include <boost/math/distributions/normal.hpp>
#include <fmt/format.h>

#include "ccdos/error.hpp"
#include "ccdos/parallel.hpp"
#include "ccdos/robust.hpp"

namespace ccdos {

std::size_t RadiusStrategy::resolved_k(std::size_t n) const {
  if (n < 2) return 0;
  std::size_t kk = k.value_or(std::max<std::size_t>(
      2, static_cast<std::size_t>(std::llround(std::sqrt(static_cast<double>(n))))));
  if (kk == 0) throw BadK("radius strategy needs k >= 1");
  return std::min(kk, n - 1);
}

nlohmann::json RadiusStrategy::to_json() const {
  nlohmann::json j{{"kind", to_string(kind)}};
  j["k"] = k ? nlohmann::json(*k) : nlohmann::json("auto");
  if (kind == Kind::rk_approx) j["significance"] = significance;
  if (kind == Kind::un_approx) {
    j["nnd_quantile"] = nnd_quantile;
    j["multiplier"] = multiplier;
  }
  return j;
}

RadiusStrategy::Kind parse_radius_kind(std::string_view name) {
  if (name == "fixed-k" || name == "fixed_k") return RadiusStrategy::Kind::fixed_k;
  if (name == "rk-approx" || name == "rk" || name == "rk_approx")
    return RadiusStrategy::Kind::rk_approx;
  if (name == "un-approx" || name == "un" || name == "un_approx")
    return RadiusStrategy::Kind::un_approx;
  throw ConfigError(fmt::format("unknown digraph kind '{}'", name));
}

std::string to_string(RadiusStrategy::Kind kind) {
  switch (kind) {
    case RadiusStrategy::Kind::fixed_k: return "fixed-k";
    case RadiusStrategy::Kind::rk_approx: return "rk-approx";
    case RadiusStrategy::Kind::un_approx: return "un-approx";
  }
  return "?";
}

// ---------------------------------------------------------------------------
// Radii

namespace {

double log_unit_ball_volume(std::size_t d) {
  const double dd = static_cast<double>(d);
  return 0.5 * dd * std::log(M_PI) - std::lgamma(0.5 * dd + 1.0);
}

// Log of the bounding-box volume; zero-width sides are floored relative to the
// widest side so a flat feature does not make the intensity infinite.
double log_bounding_volume(const PointSet& ps) {
  const std::size_t d = ps.dim();
  std::vector<double> lo(d, std::numeric_limits<double>::infinity());
  std::vector<double> hi(d, -std::numeric_limits<double>::infinity());
  for (std::size_t i = 0; i < ps.size(); ++i)
    for (std::size_t a = 0; a < d; ++a) {
      lo[a] = std::min(lo[a], ps.at(i, a));
      hi[a] = std::max(hi[a], ps.at(i, a));
    }
  double widest = 0.0;
  for (std::size_t a = 0; a < d; ++a) widest = std::max(widest, hi[a] - lo[a]);
  double logv = 0.0;
  for (std::size_t a = 0; a < d; ++a)
    logv += std::log(std::max(hi[a] - lo[a], widest * 1e-9));
  return logv;
}

bool all_coincident(const PointSet& ps) {
  for (std::size_t i = 1; i < ps.size(); ++i)
    if (squared_distance(ps.point(i), ps.point(0)) > 0.0) return false;
  return true;
}

double smallest_positive_distance(const PointSet& ps, std::size_t i) {
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t j = 0; j < ps.size(); ++j) {
    const double dist = distance(ps.point(i), ps.point(j));
    if (dist > 0.0) best = std::min(best, dist);
  }
  return best;
}

double rk_radius(const std::vector<Neighbor>& nn, std::size_t n, std::size_t d,
                 double log_intensity, double z) {
  const double trials = static_cast<double>(n - 1);
  const double log_vd = log_unit_ball_volume(d);
  double chosen = nn.front().distance;
  for (std::size_t m = 0; m < nn.size(); ++m) {
    const double r = nn[m].distance;
    if (!(r > 0.0)) continue;
    // Neighbors at distance <= r, counting trailing ties in the list.
    std::size_t observed = m + 1;
    while (observed < nn.size() && nn[observed].distance <= r) ++observed;
    // p = lambda * V_d * r^d / n: probability a CSR point falls in the ball.
    const double log_expected_one =
        log_intensity + log_vd + static_cast<double>(d) * std::log(r) -
        std::log(static_cast<double>(n));
    const double p = std::min(1.0, std::exp(log_expected_one));
    const double expected = trials * p;
    const double envelope = z * std::sqrt(trials * p * (1.0 - p));
    if (static_cast<double>(observed) >= expected - envelope) chosen = r;
  }
  return chosen;
}

}  // namespace

std::vector<double> estimate_radii(const NeighborIndex& idx, const RadiusStrategy& strategy,
                                   unsigned workers) {
  const PointSet& ps = idx.points();
  const std::size_t n = ps.size();
  if (n < 2) throw DegenerateData("radius estimation needs at least two points");
  if (all_coincident(ps)) throw DegenerateData("all points coincide; radii undefined");
  const std::size_t k = strategy.resolved_k(n);

  std::vector<double> radii(n, 0.0);
  switch (strategy.kind) {
    case RadiusStrategy::Kind::fixed_k:
      parallel_for(n, workers, [&](std::size_t i) { radii[i] = idx.knn(i, k).back().distance; });
      break;

    case RadiusStrategy::Kind::rk_approx: {
      if (!(strategy.significance > 0.0 && strategy.significance < 1.0))
        throw ConfigError("rk-approx significance must lie in (0, 1)");
      const double z = boost::math::quantile(boost::math::normal(), 1.0 - strategy.significance);
      const double log_intensity = std::log(static_cast<double>(n)) - log_bounding_volume(ps);
      parallel_for(n, workers, [&](std::size_t i) {
        radii[i] = rk_radius(idx.knn(i, k), n, ps.dim(), log_intensity, z);
      });
      break;
    }

    case RadiusStrategy::Kind::un_approx: {
      if (!(strategy.multiplier > 0.0)) throw ConfigError("un-approx multiplier must be > 0");
      std::vector<double> nnd(n);
      parallel_for(n, workers, [&](std::size_t i) { nnd[i] = idx.knn(i, 1).front().distance; });
      parallel_for(n, workers, [&](std::size_t i) {
        const auto nn = idx.knn(i, k);
        std::vector<double> local;
        local.reserve(nn.size());
        for (const auto& nb : nn) local.push_back(nnd[nb.id]);
        radii[i] = strategy.multiplier * quantile(local, strategy.nnd_quantile);
      });
      break;
    }
  }

  for (std::size_t i = 0; i < n; ++i)
    if (!(radii[i] > 0.0)) radii[i] = smallest_positive_distance(ps, i);
  return radii;
}

// ---------------------------------------------------------------------------
// Digraph

bool CatchDigraph::catches(std::size_t i, std::size_t j) const {
  return std::binary_search(covers[i].begin(), covers[i].end(), j);
}

CatchDigraph build_catch_digraph(const NeighborIndex& idx, std::vector<double> radii,
                                 unsigned workers) {
  const std::size_t n = idx.points().size();
  if (radii.size() != n) throw ConfigError("radius vector length differs from point count");
  for (double r : radii)
    if (!(r > 0.0) || !std::isfinite(r)) throw ConfigError("radii must be finite and positive");

  CatchDigraph dg;
  dg.dim = idx.points().dim();
  dg.covers.resize(n);
  dg.covered_count.resize(n);
  parallel_for(n, workers, [&](std::size_t i) {
    auto ball = idx.range_query(i, radii[i]);
    dg.covered_count[i] = ball.size();
    ball.erase(std::remove(ball.begin(), ball.end(), i), ball.end());
    dg.covers[i] = std::move(ball);
  });
  dg.radii = std::move(radii);
  return dg;
}

// ---------------------------------------------------------------------------
// Clustering

std::size_t ClusterOptions::min_cluster_size(std::size_t n) const {
  const auto by_fraction =
      static_cast<std::size_t>(std::ceil(min_cluster_fraction * static_cast<double>(n) - 1e-12));
  return std::max<std::size_t>(2, by_fraction);
}

namespace {

struct DisjointSet {
  std::vector<std::size_t> parent;
  explicit DisjointSet(std::size_t n) : parent(n) { std::iota(parent.begin(), parent.end(), 0); }
  std::size_t find(std::size_t x) {
    while (parent[x] != x) {
      parent[x] = parent[parent[x]];
      x = parent[x];
    }
    return x;
  }
  void unite(std::size_t a, std::size_t b) {
    a = find(a);
    b = find(b);
    if (a == b) return;
    if (b < a) std::swap(a, b);
    parent[b] = a;
  }
};

Clustering finalize(std::vector<std::vector<std::size_t>> groups) {
  for (auto& g : groups) std::sort(g.begin(), g.end());
  std::erase_if(groups, [](const auto& g) { return g.empty(); });
  std::sort(groups.begin(), groups.end(), [](const auto& a, const auto& b) {
    if (a.size() != b.size()) return a.size() > b.size();
    return a.front() < b.front();
  });
  Clustering cl;
  std::size_t n = 0;
  for (const auto& g : groups) n += g.size();
  cl.cluster_of.assign(n, 0);
  for (std::size_t c = 0; c < groups.size(); ++c)
    for (std::size_t i : groups[c]) cl.cluster_of[i] = c;
  cl.members = std::move(groups);
  return cl;
}

}  // namespace

Clustering cluster(const CatchDigraph& dg, const PointSet& ps, const ClusterOptions& opts) {
  const std::size_t n = dg.size();
  DisjointSet sets(n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j : dg.covers[i])
      if (j > i && dg.catches(j, i)) sets.unite(i, j);

  std::vector<std::vector<std::size_t>> comps(n);
  for (std::size_t i = 0; i < n; ++i) comps[sets.find(i)].push_back(i);

  const std::size_t min_size = opts.min_cluster_size(n);
  std::vector<std::size_t> valid_points;
  for (const auto& c : comps)
    if (c.size() >= min_size) valid_points.insert(valid_points.end(), c.begin(), c.end());
  std::sort(valid_points.begin(), valid_points.end());

  if (!valid_points.empty()) {
    // Attach each small component, as a whole, to the component of the valid
    // point nearest to any of its members, provided that point is within reach.
    // Decisions use the original components only, so attachment never chains.
    std::vector<std::size_t> target(n, n);
    for (std::size_t root = 0; root < n; ++root) {
      const auto& comp = comps[root];
      if (comp.empty() || comp.size() >= min_size) continue;
      double best = std::numeric_limits<double>::infinity();
      std::size_t best_point = n;
      bool reachable = false;
      for (std::size_t i : comp) {
        for (std::size_t j : valid_points) {
          const double dist = distance(ps.point(i), ps.point(j));
          if (dist < best || (dist == best && j < best_point)) {
            best = dist;
            best_point = j;
            reachable = dist <= opts.attach_factor * dg.radii[i];
          }
        }
      }
      if (reachable) target[root] = sets.find(best_point);
    }
    for (std::size_t root = 0; root < n; ++root) {
      if (target[root] == n) continue;
      auto& dst = comps[target[root]];
      dst.insert(dst.end(), comps[root].begin(), comps[root].end());
      comps[root].clear();
    }
  }
  return finalize(std::move(comps));
}

Clustering single_cluster(std::size_t n) {
  std::vector<std::size_t> all(n);
  std::iota(all.begin(), all.end(), 0);
  return finalize({std::move(all)});
}

Clustering clustering_from_labels(const std::vector<std::size_t>& labels) {
  std::vector<std::size_t> remap;
  std::vector<std::vector<std::size_t>> groups;
  std::vector<std::size_t> id_of;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] >= id_of.size()) id_of.resize(labels[i] + 1, labels.size());
    if (id_of[labels[i]] == labels.size()) {
      id_of[labels[i]] = groups.size();
      groups.emplace_back();
    }
    groups[id_of[labels[i]]].push_back(i);
  }
  Clustering cl;
  cl.cluster_of.resize(labels.size());
  for (std::size_t c = 0; c < groups.size(); ++c)
    for (std::size_t i : groups[c]) cl.cluster_of[i] = c;
  cl.members = std::move(groups);
  return cl;
}

std::vector<std::size_t> outbound_neighbors(const CatchDigraph& dg, std::size_t i) {
  return dg.covers.at(i);
}

std::vector<std::size_t> inbound_neighbors(const CatchDigraph& dg, const Clustering& cl,
                                           std::size_t i) {
  std::vector<std::size_t> out;
  for (std::size_t j : cl.members[cl.cluster_of.at(i)])
    if (j != i && dg.catches(j, i)) out.push_back(j);
  return out;
}

std::vector<std::vector<std::size_t>> all_inbound_neighbors(const CatchDigraph& dg,
                                                            const Clustering& cl) {
  std::vector<std::vector<std::size_t>> in(dg.size());
  for (std::size_t j = 0; j < dg.size(); ++j)
    for (std::size_t i : dg.covers[j])
      if (cl.cluster_of[i] == cl.cluster_of[j]) in[i].push_back(j);
  return in;  // j ascends in the outer loop, so every list is sorted
}

nlohmann::json to_json(const CatchDigraph& dg, const Clustering& cl) {
  nlohmann::json j;
  j["radii"] = dg.radii;
  j["covers"] = dg.covers;
  j["covered_count"] = dg.covered_count;
  j["cluster_of"] = cl.cluster_of;
  std::vector<std::size_t> sizes;
  for (const auto& m : cl.members) sizes.push_back(m.size());
  j["cluster_sizes"] = sizes;
  return j;
}

}  // namespace ccdos
