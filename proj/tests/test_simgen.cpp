#include <doctest.h>

#include <cmath>
#include <numeric>
#include <set>

#include "ccdos/error.hpp"
#include "ccdos/neighbors.hpp"
#include "ccdos/rng.hpp"
#include "ccdos/simgen.hpp"

using namespace ccdos;

namespace {

double min_dist_to_inliers(const Simulated& s, std::size_t i) {
  double best = INFINITY;
  for (std::size_t j = 0; j < s.points.size(); ++j)
    if (s.points.labels()[j] == Label::inlier)
      best = std::min(best, distance(s.points.point(i), s.points.point(j)));
  return best;
}

}  // namespace

TEST_CASE("rng is a pure function of key and counter") {
  CounterRng a(123), b(123);
  for (int i = 0; i < 100; ++i) CHECK(a.next() == b.next());
  CHECK(CounterRng(1).next() != CounterRng(2).next());
  CHECK(derive_seed(1, 2, 3) != derive_seed(1, 3, 2));
  CounterRng r(5);
  for (int i = 0; i < 1000; ++i) {
    const double u = r.uniform();
    CHECK(u > 0.0);
    CHECK(u < 1.0);
    CHECK(r.below(7) < 7);
  }
}

TEST_CASE("rng distributions have the right moments") {
  CounterRng r(11);
  double s = 0, s2 = 0, p = 0, p_big = 0;
  const int n = 50000;
  for (int i = 0; i < n; ++i) {
    const double z = r.normal();
    s += z;
    s2 += z * z;
    p += static_cast<double>(r.poisson(3.5));
    p_big += static_cast<double>(r.poisson(80.0));
  }
  CHECK(std::fabs(s / n) < 0.02);
  CHECK(std::fabs(s2 / n - 1.0) < 0.03);
  CHECK(std::fabs(p / n - 3.5) < 0.05);
  CHECK(std::fabs(p_big / n - 80.0) < 0.3);
}

TEST_CASE("uniform ball cluster") {
  SimConfig cfg;
  cfg.regime = Regime::uniform;
  cfg.n_clusters = 1;
  cfg.n = 1000;
  cfg.cluster_radius = 1.0;
  cfg.outlier_fraction = 0.0;
  const auto s = gen_clusters(cfg);
  const auto& c = s.centers[0];
  std::size_t inside = 0;
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < 1000; ++i) {
    inside += distance(s.points.point(i), c) <= 1.0 ? 1 : 0;
    mx += s.points.at(i, 0) / 1000.0;
    my += s.points.at(i, 1) / 1000.0;
  }
  CHECK(inside >= 990);
  CHECK(std::hypot(mx - c[0], my - c[1]) < 0.05);
}

TEST_CASE("correlated gaussian cluster") {
  SimConfig cfg;
  cfg.regime = Regime::gaussian;
  cfg.n_clusters = 1;
  cfg.n = 5000;
  cfg.correlation = 0.5;
  cfg.outlier_fraction = 0.0;
  const auto s = gen_clusters(cfg);
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < 5000; ++i) {
    mx += s.points.at(i, 0);
    my += s.points.at(i, 1);
  }
  mx /= 5000;
  my /= 5000;
  double sxy = 0, sxx = 0, syy = 0;
  for (std::size_t i = 0; i < 5000; ++i) {
    const double a = s.points.at(i, 0) - mx, b = s.points.at(i, 1) - my;
    sxy += a * b;
    sxx += a * a;
    syy += b * b;
  }
  const double r = sxy / std::sqrt(sxx * syy);
  CHECK(r >= 0.45);
  CHECK(r <= 0.55);
}

TEST_CASE("infeasible packing is a config error") {
  SimConfig cfg;
  cfg.n_clusters = 50;
  cfg.cluster_radius = 0.3;
  cfg.center_separation = 3.0;
  CHECK_THROWS_AS(gen_clusters(cfg), ConfigError);
}

TEST_CASE("neyman-scott processes") {
  SUBCASE("matern offspring stay inside their parent's ball") {
    SimConfig cfg;
    cfg.regime = Regime::matern;
    cfg.d = 3;
    cfg.n = 600;
    cfg.outlier_fraction = 0.0;
    const auto s = gen_neyman_scott(cfg);
    for (std::size_t i = 0; i < s.points.size(); ++i)
      CHECK(distance(s.points.point(i), s.centers[s.group[i]]) <= cfg.cluster_radius + 1e-12);
  }
  SUBCASE("thomas offspring within three sigma per coordinate") {
    SimConfig cfg;
    cfg.regime = Regime::thomas;
    cfg.n = 20000;
    cfg.outlier_fraction = 0.0;
    const auto s = gen_neyman_scott(cfg);
    std::size_t in = 0, total = 0;
    for (std::size_t i = 0; i < s.points.size(); ++i)
      for (std::size_t c = 0; c < 2; ++c) {
        ++total;
        in += std::fabs(s.points.at(i, c) - s.centers[s.group[i]][c]) <=
                      3.0 * cfg.gaussian_scale
                  ? 1
                  : 0;
      }
    const double frac = static_cast<double>(in) / static_cast<double>(total);
    CHECK(frac > 0.994);
    CHECK(frac < 0.9995);
  }
  SUBCASE("mixed parents are matern about half the time") {
    SimConfig cfg;
    cfg.regime = Regime::mixed;
    cfg.parent_intensity = 10000;
    cfg.n = 20000;
    cfg.outlier_fraction = 0.0;
    const auto s = gen_neyman_scott(cfg);
    const double m = static_cast<double>(
        std::count(s.center_kind.begin(), s.center_kind.end(), Regime::matern));
    const double frac = m / static_cast<double>(s.center_kind.size());
    CHECK(s.center_kind.size() > 9000);
    CHECK(frac >= 0.47);
    CHECK(frac <= 0.53);
  }
}

TEST_CASE("outlier injection") {
  SimConfig cfg;
  cfg.regime = Regime::uniform;
  cfg.n = 200;
  cfg.outlier_fraction = 0.05;
  const auto s = generate(cfg);
  CHECK(s.points.size() == 200);
  CHECK(s.points.outlier_count() == 10);
  for (std::size_t i = 0; i < 200; ++i)
    if (s.points.labels()[i] == Label::outlier)
      CHECK(min_dist_to_inliers(s, i) >= cfg.outlier_min_separation * cfg.cluster_radius);

  cfg.collective_size = 4;
  const auto g = generate(cfg);
  CHECK(g.points.outlier_count() == 14);
  std::vector<std::size_t> members;
  for (std::size_t i = 0; i < g.points.size(); ++i)
    if (g.group[i] == kCollectiveOutlier) members.push_back(i);
  REQUIRE(members.size() == 4);
  double diameter = 0, gap = INFINITY;
  for (auto a : members) {
    gap = std::min(gap, min_dist_to_inliers(g, a));
    for (auto b : members) diameter = std::max(diameter, distance(g.points.point(a), g.points.point(b)));
  }
  CHECK(diameter < gap);

  cfg.collective_size = 0;
  cfg.outlier_fraction = 0.0;
  const auto none = generate(cfg);
  CHECK(none.points.outlier_count() == 0);
  SimConfig same = cfg;
  CHECK(gen_clusters(same).points == none.points);
}

TEST_CASE("generation is deterministic and seed-sensitive") {
  for (auto regime : {Regime::uniform, Regime::gaussian, Regime::matern, Regime::thomas,
                      Regime::mixed}) {
    SimConfig cfg;
    cfg.regime = regime;
    cfg.d = 5;
    cfg.n = 300;
    cfg.seed = 7;
    const auto a = generate(cfg);
    const auto b = generate(cfg);
    CHECK(a.points == b.points);
    cfg.seed = 8;
    const auto c = generate(cfg);
    CHECK_FALSE(c.points == a.points);
    CHECK(c.points.outlier_count() == a.points.outlier_count());
  }
}

TEST_CASE("config json") {
  SimConfig cfg;
  cfg.regime = Regime::thomas;
  cfg.d = 5;
  cfg.seed = 99;
  const auto back = SimConfig::from_json(cfg.to_json());
  CHECK(back.to_json() == cfg.to_json());
  try {
    SimConfig::from_json(nlohmann::json{{"regime", "gauss"}});
    FAIL("expected ConfigError");
  } catch (const ConfigError& e) {
    CHECK(std::string(e.what()).find("regime") != std::string::npos);
  }
  try {
    SimConfig::from_json(nlohmann::json{{"dims", 3}});
    FAIL("expected ConfigError");
  } catch (const ConfigError& e) {
    CHECK(std::string(e.what()).find("dims") != std::string::npos);
  }
  SimConfig bad;
  bad.outlier_fraction = 0.6;
  CHECK_THROWS_AS(bad.validate(), ConfigError);
}

TEST_CASE("masking fixture construction") {
  const auto fx = figure1_fixture(1);
  CHECK(fx.points.outlier_count() == 9);
  std::set<std::string> clusters;
  for (std::size_t i = 0; i < fx.points.size(); ++i) {
    const bool outlier = fx.points.labels()[i] == Label::outlier;
    CHECK(outlier == (fx.role[i][0] == 'O'));
    if (!outlier) clusters.insert(fx.role[i]);
  }
  CHECK(clusters.size() == 3);

  const auto o7 = fx.points.point(fx.index_of("O7"));
  const auto o8 = fx.points.point(fx.index_of("O8"));
  const auto& c = fx.gaussian_center;
  CHECK(std::fabs(distance(o7, c) - distance(o8, c)) < 1e-9);

  // Mahalanobis distance under sigma^2 [[1, rho], [rho, 1]].
  const double rho = fx.gaussian_correlation;
  const auto maha = [&](std::span<const double> p) {
    const double x = p[0] - c[0], y = p[1] - c[1];
    return (x * x - 2 * rho * x * y + y * y) / (1 - rho * rho);
  };
  CHECK(maha(o7) > maha(o8));
  CHECK(figure1_fixture(1).points == fx.points);
}
