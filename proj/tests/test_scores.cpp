#include <doctest.h>

#include <cmath>
#include <limits>

#include "ccdos/error.hpp"
#include "ccdos/rng.hpp"
#include "ccdos/robust.hpp"
#include "ccdos/scores.hpp"
#include "helpers.hpp"
#include "oracles.hpp"

using namespace ccdos;

namespace {

// Digraph with explicit counts and radii, for arithmetic examples.
CatchDigraph synthetic(std::vector<std::size_t> counts, std::vector<double> radii,
                       std::size_t d) {
  CatchDigraph dg;
  dg.radii = std::move(radii);
  dg.covered_count = std::move(counts);
  dg.covers.resize(dg.radii.size());
  dg.dim = d;
  return dg;
}

}  // namespace

TEST_CASE("vicinity density examples") {
  const NeighborIndex idx(testing::line({0, 1, 3}));
  const auto dg = build_catch_digraph(idx, {1, 1, 2});
  CHECK(vicinity_density(dg)[1] == 2.0);

  CHECK(vicinity_density(synthetic({8}, {2.0}, 2))[0] == doctest::Approx(2.0).epsilon(1e-15));
  CHECK(vicinity_density(synthetic({16}, {1.0}, 4))[0] == doctest::Approx(2.0).epsilon(1e-15));
  CHECK(vicinity_density(synthetic({8}, {2.0}, 2), DensityForm::count_over_volume)[0] == 2.0);
}

TEST_CASE("outbound score examples") {
  auto dg = synthetic({1, 1, 1}, {1, 1, 1}, 1);
  dg.covers = {{1, 2}, {}, {}};
  const auto oos = outbound_scores(dg, {1.0, 2.0, 4.0});
  CHECK(oos[0] == 3.0);
  CHECK(std::isinf(oos[1]));

  const NeighborIndex idx(testing::line({0, 1, 2, 3, 4, 5}));
  const auto grid = build_catch_digraph(idx, std::vector<double>(6, 1.0));
  const auto o = outbound_scores(grid, std::vector<double>(6, 1.5));
  for (double v : o) CHECK(v == 1.0);
}

TEST_CASE("cumulative influence and raw IOS") {
  const NeighborIndex idx(testing::line({0, 1, 3}));
  const auto dg = build_catch_digraph(idx, {1, 1, 2});
  const auto cl = single_cluster(3);
  const std::vector<double> rho{1.0, 5.0, 2.0};
  const auto ci = cumulative_influence(dg, cl, rho);
  CHECK(ci[1] == 3.0);  // inbound {0, 2}
  CHECK(ci[2] == 0.0);
  const auto ios = inbound_scores_raw({0.0, 3.0}, {0.5, 1.0});
  CHECK(ios[0] == 2.0);
  CHECK(ios[1] == 0.25);
}

TEST_CASE("robust standardization") {
  const auto cl = single_cluster(3);
  const auto s = standardize_ios(cl, {0.1, 0.2, 0.3});
  CHECK(s[1] == 0.0);
  CHECK(s[2] == doctest::Approx(0.6745).epsilon(1e-12));
  CHECK(standardize_ios(single_cluster(1), {0.7})[0] == 0.0);

  // Mean/SD variant for comparison output.
  const auto naive = standardize_ios_naive(cl, {0.1, 0.2, 0.3});
  CHECK(naive[2] == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("standardized normal sample has median 0 and MADN 1") {
  CounterRng rng(8);
  std::vector<double> v(20000);
  for (auto& x : v) x = 3.0 + 0.5 * rng.normal();
  const auto s = standardize_ios(single_cluster(v.size()), v);
  CHECK(std::fabs(median(s)) < 0.05);
  CHECK(std::fabs(madn(s) - 1.0) < 0.05);
}

TEST_CASE("tie-break examples") {
  const auto cl = single_cluster(4);
  // Sorted: 1 | 1.5 1.5 | 2 -> bracket (1, 2).
  const auto t = break_ties(cl, {1.0, 1.5, 1.5, 2.0}, {1.0, 1.0, 3.0, 1.0});
  CHECK(t[1] == doctest::Approx(1.75).epsilon(1e-15));
  CHECK(t[2] == doctest::Approx(1.25).epsilon(1e-15));
  CHECK(t[0] == 1.0);
  CHECK(t[3] == 2.0);

  const auto same = break_ties(cl, {1.0, 1.5, 1.5, 2.0}, {1.0, 2.0, 2.0, 1.0});
  CHECK(same[1] == same[2]);

  // A fully tied cluster has no bracket and stays put.
  const auto flat = break_ties(single_cluster(3), {0.0, 0.0, 0.0}, {1.0, 2.0, 3.0});
  CHECK(flat == std::vector<double>{0.0, 0.0, 0.0});

  // Ties across clusters are left alone.
  const auto two = clustering_from_labels({0, 1});
  CHECK(break_ties(two, {1.0, 1.0}, {1.0, 2.0}) == std::vector<double>{1.0, 1.0});
}

TEST_CASE("tie-break at the boundaries") {
  const auto cl = single_cluster(3);
  // Minimum group: below := the tied value, above = 3.
  const auto lo = break_ties(cl, {1.0, 1.0, 3.0}, {1.0, 3.0, 1.0});
  CHECK(lo[0] == doctest::Approx(3.0 - 2.0 * 0.25));
  CHECK(lo[1] == doctest::Approx(3.0 - 2.0 * 0.75));
  // Maximum group: above := the tied value, below = 1.
  const auto hi = break_ties(cl, {1.0, 3.0, 3.0}, {1.0, 1.0, 3.0});
  CHECK(hi[1] == doctest::Approx(3.0 - 2.0 * 0.25));
  CHECK(hi[2] == doctest::Approx(3.0 - 2.0 * 0.75));
}

TEST_CASE("threshold table") {
  const ThresholdTable t;
  CHECK(t.lookup(ScoreKind::oos, DigraphKind::rk, ClusterShape::uniform, 2) == 6.0);
  CHECK(t.lookup(ScoreKind::ios, DigraphKind::un, ClusterShape::gaussian, 100) == 2.5);
  CHECK(t.lookup(ScoreKind::oos, DigraphKind::rk, ClusterShape::mixed, 100) == 11.5);
  // Nearest listed d, ties toward the smaller one.
  CHECK(t.lookup(ScoreKind::oos, DigraphKind::rk, ClusterShape::uniform, 4) ==
        t.lookup(ScoreKind::oos, DigraphKind::rk, ClusterShape::uniform, 3));
  CHECK(t.lookup(ScoreKind::oos, DigraphKind::rk, ClusterShape::uniform, 1) == 6.0);
  CHECK(t.lookup(ScoreKind::oos, DigraphKind::rk, ClusterShape::uniform, 1000) == 13.0);
  CHECK(t.lookup(ScoreKind::oos, DigraphKind::rk, ClusterShape::uniform, 75) == 14.0);
  CHECK(default_threshold(ScoreKind::ios, DigraphKind::rk, ClusterShape::uniform, 2, 3.25) ==
        3.25);
  CHECK(threshold_family(RadiusStrategy::Kind::fixed_k) == DigraphKind::rk);
  CHECK(threshold_family(RadiusStrategy::Kind::un_approx) == DigraphKind::un);
}

TEST_CASE("flagging") {
  const auto one = single_cluster(2);
  CHECK(flag_outliers({1.9, 2.1}, 2.0, one, 0.0, ScoreKind::oos) == std::vector<bool>{false, true});
  CHECK(flag_outliers({std::numeric_limits<double>::infinity(), 0.0}, 1e300, one, 0.0,
                      ScoreKind::oos)[0]);

  std::vector<std::size_t> lab(100, 0);
  lab[97] = lab[98] = lab[99] = 1;
  const auto cl = clustering_from_labels(lab);
  const auto f = flag_outliers(std::vector<double>(100, -5.0), 2.0, cl, 0.04, ScoreKind::ios);
  CHECK(f[97]);
  CHECK(f[98]);
  CHECK(f[99]);
  CHECK_FALSE(f[0]);
  // s_min never applies to OOS.
  CHECK_FALSE(flag_outliers(std::vector<double>(100, -5.0), 2.0, cl, 0.04, ScoreKind::oos)[99]);
}

TEST_CASE("ranks") {
  CHECK(descending_ranks({0.5, 2.0, 0.5, 9.0}) == std::vector<std::size_t>{3, 2, 4, 1});
}

TEST_CASE("pipeline matches the definition oracle") {
  for (std::uint64_t seed = 1; seed <= 30; ++seed) {
    const std::size_t d = seed % 3 == 0 ? 5 : 2 + seed % 3 - 1;
    const auto ps = testing::random_points(seed * 31, 20 + seed, d);
    CcdConfig cfg;
    cfg.radius.kind = RadiusStrategy::Kind::fixed_k;
    cfg.radius.k = 1 + seed % 6;
    const auto res = run_ccd(ps, cfg, {});
    const auto want = oracle::ccd_scores(ps, res.digraph.radii, res.clustering.cluster_of);
    for (std::size_t i = 0; i < ps.size(); ++i) {
      CHECK(res.report.rho[i] == doctest::Approx(want.rho[i]).epsilon(1e-12));
      CHECK(res.report.oos[i] == doctest::Approx(want.oos[i]).epsilon(1e-12));
      CHECK(res.report.ci[i] == doctest::Approx(want.ci[i]).epsilon(1e-12));
      CHECK(res.report.ios_raw[i] == doctest::Approx(want.ios[i]).epsilon(1e-12));
    }
  }
}

TEST_CASE("report serialization") {
  const auto ps = testing::random_points(4, 30, 2);
  const auto res = run_ccd(ps, {}, {});
  const auto csv = report_to_csv(res.report);
  CHECK(csv.rfind("id,cluster,rho,oos,ci,ios_raw,ios_naive,ios_std,", 0) == 0);
  std::size_t lines = 0;
  for (char c : csv) lines += c == '\n';
  CHECK(lines == 31);
  const auto j = report_to_json(res.report);
  CHECK(j["points"].size() == 30);
}

TEST_CASE("enum parsing") {
  CHECK(parse_score_kind("oos") == ScoreKind::oos);
  CHECK(parse_cluster_shape("mixed") == ClusterShape::mixed);
  CHECK(parse_density_form("volume") == DensityForm::count_over_volume);
  CHECK_THROWS_AS(parse_cluster_shape("square"), ConfigError);
}
