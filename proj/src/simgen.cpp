#include "ccdos/simgen.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <fmt/format.h>

#include "ccdos/error.hpp"

namespace ccdos {

namespace {

// Stream purposes; each random decision family draws from its own stream.
enum Purpose : std::uint64_t {
  kCenters = 1,
  kMembers = 2,
  kParents = 3,
  kOffspring = 4,
  kOutliers = 5,
  kCollective = 6,
  kParentKind = 7,
  kFixture = 8,
};

constexpr int kCenterAttempts = 1000;
constexpr int kOutlierAttempts = 10000;
constexpr int kParentRetries = 100;

double regime_scale(Regime kind, const SimConfig& cfg) {
  switch (kind) {
    case Regime::uniform:
    case Regime::matern: return cfg.cluster_radius;
    case Regime::gaussian:
    case Regime::thomas: return 3.0 * cfg.gaussian_scale;
    case Regime::mixed: break;
  }
  return cfg.cluster_radius;
}

std::vector<double> correlated_gaussian(CounterRng& rng, std::span<const double> center,
                                        double sigma, double corr) {
  // Covariance sigma^2 [(1 - corr) I + corr 11^T] via one shared factor.
  const double shared = rng.normal();
  const double a = std::sqrt(1.0 - corr);
  const double b = std::sqrt(corr);
  std::vector<double> x(center.begin(), center.end());
  for (double& v : x) v += sigma * (a * rng.normal() + b * shared);
  return x;
}

struct Builder {
  std::size_t d;
  std::vector<double> coords;
  std::vector<Label> labels;
  std::vector<double> scale;
  std::vector<int> group;

  void add(std::span<const double> x, Label label, double s, int g) {
    coords.insert(coords.end(), x.begin(), x.end());
    labels.push_back(label);
    scale.push_back(s);
    group.push_back(g);
  }
  std::size_t size() const { return labels.size(); }
};

Simulated finish(Builder&& b, std::vector<std::vector<double>> centers,
                 std::vector<Regime> kinds) {
  const std::size_t n = b.size();
  Simulated out{PointSet(n, b.d, std::move(b.coords), std::move(b.labels)),
                std::move(b.scale), std::move(b.group), std::move(centers), std::move(kinds)};
  return out;
}

Builder builder_from(const Simulated& s) {
  Builder b{s.points.dim(), s.points.coords(), s.points.labels(), s.scale, s.group};
  return b;
}

}  // namespace

Regime parse_regime(std::string_view name) {
  if (name == "uniform") return Regime::uniform;
  if (name == "gaussian") return Regime::gaussian;
  if (name == "matern") return Regime::matern;
  if (name == "thomas") return Regime::thomas;
  if (name == "mixed") return Regime::mixed;
  throw ConfigError(fmt::format("unknown regime '{}'", name));
}

std::string to_string(Regime regime) {
  switch (regime) {
    case Regime::uniform: return "uniform";
    case Regime::gaussian: return "gaussian";
    case Regime::matern: return "matern";
    case Regime::thomas: return "thomas";
    case Regime::mixed: return "mixed";
  }
  return "?";
}

ClusterShape shape_of(Regime regime) {
  switch (regime) {
    case Regime::uniform:
    case Regime::matern: return ClusterShape::uniform;
    case Regime::gaussian:
    case Regime::thomas: return ClusterShape::gaussian;
    case Regime::mixed: return ClusterShape::mixed;
  }
  return ClusterShape::uniform;
}

// ---------------------------------------------------------------------------
// SimConfig

void SimConfig::validate() const {
  if (d < 1) throw ConfigError("d must be >= 1");
  if (n < 1) throw ConfigError("n must be >= 1");
  if (n_clusters < 1) throw ConfigError("n_clusters must be >= 1");
  if (!(parent_intensity > 0.0)) throw ConfigError("parent_intensity must be > 0");
  if (!(cluster_radius > 0.0)) throw ConfigError("cluster_radius must be > 0");
  if (!(gaussian_scale > 0.0)) throw ConfigError("gaussian_scale must be > 0");
  if (!(correlation >= 0.0 && correlation < 1.0)) throw ConfigError("correlation must lie in [0, 1)");
  if (!(center_separation >= 0.0)) throw ConfigError("center_separation must be >= 0");
  if (!(outlier_fraction >= 0.0 && outlier_fraction < 0.5))
    throw ConfigError("outlier_fraction must lie in [0, 0.5)");
  if (!(outlier_min_separation >= 0.0)) throw ConfigError("outlier_min_separation must be >= 0");
  if (outlier_count() >= n) throw ConfigError("no inliers left after outlier allocation");
}

std::size_t SimConfig::outlier_count() const {
  return static_cast<std::size_t>(std::llround(outlier_fraction * static_cast<double>(n)));
}

nlohmann::json SimConfig::to_json() const {
  return {{"regime", to_string(regime)},
          {"d", d},
          {"n", n},
          {"n_clusters", n_clusters},
          {"parent_intensity", parent_intensity},
          {"cluster_radius", cluster_radius},
          {"gaussian_scale", gaussian_scale},
          {"correlation", correlation},
          {"center_separation", center_separation},
          {"outlier_fraction", outlier_fraction},
          {"outlier_min_separation", outlier_min_separation},
          {"collective_size", collective_size},
          {"seed", seed}};
}

SimConfig SimConfig::from_json(const nlohmann::json& j) { return from_json(j, SimConfig{}); }

SimConfig SimConfig::from_json(const nlohmann::json& j, const SimConfig& base) {
  if (!j.is_object()) throw ConfigError("simulation config must be a JSON object");
  SimConfig c = base;
  for (const auto& [key, value] : j.items()) {
    try {
      if (key == "regime") c.regime = parse_regime(value.get<std::string>());
      else if (key == "d") c.d = value.get<std::size_t>();
      else if (key == "n") c.n = value.get<std::size_t>();
      else if (key == "n_clusters") c.n_clusters = value.get<std::size_t>();
      else if (key == "parent_intensity") c.parent_intensity = value.get<double>();
      else if (key == "cluster_radius") c.cluster_radius = value.get<double>();
      else if (key == "gaussian_scale") c.gaussian_scale = value.get<double>();
      else if (key == "correlation") c.correlation = value.get<double>();
      else if (key == "center_separation") c.center_separation = value.get<double>();
      else if (key == "outlier_fraction") c.outlier_fraction = value.get<double>();
      else if (key == "outlier_min_separation") c.outlier_min_separation = value.get<double>();
      else if (key == "collective_size") c.collective_size = value.get<std::size_t>();
      else if (key == "seed") c.seed = value.get<std::uint64_t>();
      else throw ConfigError(fmt::format("unknown simulation key '{}'", key));
    } catch (const nlohmann::json::exception& e) {
      throw ConfigError(fmt::format("bad value for simulation key '{}': {}", key, e.what()));
    } catch (const ConfigError& e) {
      if (key == "regime")
        throw ConfigError(fmt::format("key 'regime': {}", e.what()));
      throw;
    }
  }
  return c;
}

// ---------------------------------------------------------------------------
// Generators

std::vector<double> sample_in_ball(CounterRng& rng, std::span<const double> center,
                                   double radius) {
  const std::size_t d = center.size();
  std::vector<double> dir(d);
  double norm = 0.0;
  do {
    norm = 0.0;
    for (double& v : dir) {
      v = rng.normal();
      norm += v * v;
    }
  } while (!(norm > 0.0));
  norm = std::sqrt(norm);
  const double r = radius * std::pow(rng.uniform(), 1.0 / static_cast<double>(d));
  std::vector<double> x(center.begin(), center.end());
  for (std::size_t a = 0; a < d; ++a) x[a] += r * dir[a] / norm;
  return x;
}

Simulated gen_clusters(const SimConfig& cfg) {
  cfg.validate();
  if (cfg.regime != Regime::uniform && cfg.regime != Regime::gaussian)
    throw ConfigError("gen_clusters handles the uniform and gaussian regimes");

  const double extent = regime_scale(cfg.regime, cfg);
  const double min_gap = cfg.center_separation * extent;
  auto crng = CounterRng::stream(cfg.seed, kCenters);
  std::vector<std::vector<double>> centers;
  for (std::size_t c = 0; c < cfg.n_clusters; ++c) {
    bool placed = false;
    for (int attempt = 0; attempt < kCenterAttempts && !placed; ++attempt) {
      std::vector<double> cand(cfg.d);
      for (double& v : cand) v = crng.uniform();
      placed = std::all_of(centers.begin(), centers.end(),
                           [&](const auto& other) { return distance(cand, other) >= min_gap; });
      if (placed) centers.push_back(std::move(cand));
    }
    if (!placed)
      throw ConfigError(fmt::format(
          "cannot place {} cluster centers {} apart in the unit {}-cube after {} attempts",
          cfg.n_clusters, min_gap, cfg.d, kCenterAttempts));
  }

  const std::size_t inliers = cfg.n - cfg.outlier_count();
  Builder b{cfg.d, {}, {}, {}, {}};
  for (std::size_t c = 0; c < cfg.n_clusters; ++c) {
    const std::size_t size = inliers / cfg.n_clusters + (c < inliers % cfg.n_clusters ? 1 : 0);
    auto rng = CounterRng::stream(cfg.seed, kMembers, c);
    for (std::size_t m = 0; m < size; ++m) {
      const auto x = cfg.regime == Regime::uniform
                         ? sample_in_ball(rng, centers[c], cfg.cluster_radius)
                         : correlated_gaussian(rng, centers[c], cfg.gaussian_scale, cfg.correlation);
      b.add(x, Label::inlier, extent, static_cast<int>(c));
    }
  }
  std::vector<Regime> kinds(centers.size(), cfg.regime);
  return finish(std::move(b), std::move(centers), std::move(kinds));
}

Simulated gen_neyman_scott(const SimConfig& cfg) {
  cfg.validate();
  if (cfg.regime != Regime::matern && cfg.regime != Regime::thomas && cfg.regime != Regime::mixed)
    throw ConfigError("gen_neyman_scott handles the matern, thomas and mixed regimes");

  const double inliers = static_cast<double>(cfg.n - cfg.outlier_count());
  const double offspring_mean = inliers / cfg.parent_intensity;

  for (int attempt = 0; attempt < kParentRetries; ++attempt) {
    auto prng = CounterRng::stream(cfg.seed, kParents, static_cast<std::uint64_t>(attempt));
    const auto parents = prng.poisson(cfg.parent_intensity);
    if (parents == 0) continue;

    std::vector<std::vector<double>> centers;
    std::vector<Regime> kinds;
    auto krng = CounterRng::stream(cfg.seed, kParentKind, static_cast<std::uint64_t>(attempt));
    for (std::uint64_t p = 0; p < parents; ++p) {
      std::vector<double> c(cfg.d);
      for (double& v : c) v = prng.uniform();
      centers.push_back(std::move(c));
      Regime kind = cfg.regime;
      if (kind == Regime::mixed) kind = krng.bernoulli(0.5) ? Regime::matern : Regime::thomas;
      kinds.push_back(kind);
    }

    Builder b{cfg.d, {}, {}, {}, {}};
    for (std::uint64_t p = 0; p < parents; ++p) {
      auto rng = CounterRng::stream(derive_seed(cfg.seed, static_cast<std::uint64_t>(attempt)),
                                    kOffspring, p);
      const auto count = rng.poisson(offspring_mean);
      const double scale = regime_scale(kinds[p], cfg);
      for (std::uint64_t m = 0; m < count; ++m) {
        const auto x = kinds[p] == Regime::matern
                           ? sample_in_ball(rng, centers[p], cfg.cluster_radius)
                           : correlated_gaussian(rng, centers[p], cfg.gaussian_scale, 0.0);
        b.add(x, Label::inlier, scale, static_cast<int>(p));
      }
    }
    if (b.size() == 0) continue;
    return finish(std::move(b), std::move(centers), std::move(kinds));
  }
  throw ConfigError(fmt::format("Neyman-Scott draw produced no points after {} retries",
                                kParentRetries));
}

Simulated inject_outliers(Simulated data, const SimConfig& cfg) {
  const std::size_t singles = cfg.outlier_count();
  if (singles == 0 && cfg.collective_size == 0) return data;

  const PointSet& ps = data.points;
  const std::size_t d = ps.dim();
  const std::size_t inliers = ps.size();

  // Unit cube joined with the inlier bounding box, grown by 10% per side.
  std::vector<double> lo(d, 0.0), hi(d, 1.0);
  for (std::size_t i = 0; i < inliers; ++i)
    for (std::size_t a = 0; a < d; ++a) {
      lo[a] = std::min(lo[a], ps.at(i, a));
      hi[a] = std::max(hi[a], ps.at(i, a));
    }
  for (std::size_t a = 0; a < d; ++a) {
    const double pad = 0.1 * (hi[a] - lo[a]);
    lo[a] -= pad;
    hi[a] += pad;
  }

  // Accepts c when |c - x_j| >= margin(j) for every inlier j.
  auto clear_of_inliers = [&](std::span<const double> c, auto&& margin) {
    for (std::size_t j = 0; j < inliers; ++j)
      if (distance(c, ps.point(j)) < margin(j)) return false;
    return true;
  };
  auto draw = [&](CounterRng& rng, auto&& margin, const char* what) {
    std::vector<double> c(d);
    for (int attempt = 0; attempt < kOutlierAttempts; ++attempt) {
      for (std::size_t a = 0; a < d; ++a) c[a] = rng.uniform(lo[a], hi[a]);
      if (clear_of_inliers(c, margin)) return c;
    }
    throw ConfigError(fmt::format("could not place {} after {} attempts; lower "
                                  "outlier_min_separation", what, kOutlierAttempts));
  };

  Builder b = builder_from(data);
  auto orng = CounterRng::stream(cfg.seed, kOutliers);
  const double sep = cfg.outlier_min_separation;
  for (std::size_t o = 0; o < singles; ++o) {
    const auto x = draw(orng, [&](std::size_t j) { return sep * data.scale[j]; }, "an outlier");
    b.add(x, Label::outlier, 0.0, kSingleOutlier);
  }

  if (cfg.collective_size > 0) {
    double smallest = std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < inliers; ++j) smallest = std::min(smallest, data.scale[j]);
    const double group_radius = 0.25 * smallest;
    const double gap = std::max(sep, 1.0);
    auto grng = CounterRng::stream(cfg.seed, kCollective);
    const auto center = draw(
        grng, [&](std::size_t j) { return gap * data.scale[j] + group_radius; },
        "the collective group");
    for (std::size_t m = 0; m < cfg.collective_size; ++m)
      b.add(sample_in_ball(grng, center, group_radius), Label::outlier, 0.0, kCollectiveOutlier);
  }

  auto centers = std::move(data.centers);
  auto kinds = std::move(data.center_kind);
  return finish(std::move(b), std::move(centers), std::move(kinds));
}

Simulated generate(const SimConfig& cfg) {
  cfg.validate();
  Simulated inliers = (cfg.regime == Regime::uniform || cfg.regime == Regime::gaussian)
                          ? gen_clusters(cfg)
                          : gen_neyman_scott(cfg);
  return inject_outliers(std::move(inliers), cfg);
}

// ---------------------------------------------------------------------------
// Illustration fixture

std::size_t Fixture::index_of(std::string_view role_name) const {
  for (std::size_t i = 0; i < role.size(); ++i)
    if (role[i] == role_name) return i;
  throw ConfigError(fmt::format("fixture has no point with role '{}'", role_name));
}

Fixture figure1_fixture(std::uint64_t seed) {
  constexpr std::size_t kSparse = 150;
  constexpr std::size_t kDense = 120;
  constexpr std::size_t kGauss = 150;
  const std::vector<double> c1{0.0, 0.0};
  const std::vector<double> c2{4.0, 0.5};
  const std::vector<double> c3{2.0, -3.5};
  const double sigma = 0.3;
  const double corr = 0.5;

  Fixture fx;
  fx.gaussian_center = c3;
  fx.gaussian_sigma = sigma;
  fx.gaussian_correlation = corr;

  std::vector<double> coords;
  std::vector<Label> labels;
  auto add = [&](std::span<const double> x, Label lab, std::string role) {
    coords.insert(coords.end(), x.begin(), x.end());
    labels.push_back(lab);
    fx.role.push_back(std::move(role));
  };

  auto rng1 = CounterRng::stream(seed, kFixture, 1);
  for (std::size_t i = 0; i < kSparse; ++i) add(sample_in_ball(rng1, c1, 1.0), Label::inlier, "C1");
  auto rng2 = CounterRng::stream(seed, kFixture, 2);
  for (std::size_t i = 0; i < kDense; ++i) add(sample_in_ball(rng2, c2, 0.5), Label::inlier, "C2");
  auto rng3 = CounterRng::stream(seed, kFixture, 3);
  for (std::size_t i = 0; i < kGauss; ++i)
    add(correlated_gaussian(rng3, c3, sigma, corr), Label::inlier, "C3");

  // Collective group: four points in a small ball up and left of C1.
  auto rng4 = CounterRng::stream(seed, kFixture, 4);
  const std::vector<double> group_center{-2.0, 2.0};
  for (int m = 1; m <= 4; ++m)
    add(sample_in_ball(rng4, group_center, 0.08), Label::outlier, fmt::format("O{}", m));

  const std::vector<double> o5{1.3, 1.3};
  const std::vector<double> o6{-1.9, -1.0};
  add(o5, Label::outlier, "O5");
  add(o6, Label::outlier, "O6");

  // Positive correlation puts the major axis along (1, 1).
  const double reach = 6.0 * sigma;
  const double h = reach / std::sqrt(2.0);
  const std::vector<double> o7{c3[0] + h, c3[1] - h};
  const std::vector<double> o8{c3[0] + h, c3[1] + h};
  add(o7, Label::outlier, "O7");
  add(o8, Label::outlier, "O8");

  const std::vector<double> o9{4.0, 1.6};
  add(o9, Label::outlier, "O9");

  const std::size_t n = labels.size();
  fx.points = PointSet(n, 2, std::move(coords), std::move(labels));
  return fx;
}

}  // namespace ccdos
