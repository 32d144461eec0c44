#include <doctest.h>

#include "brute.hpp"
#include "pavoid/builder.hpp"

#include <cmath>
#include <map>

using namespace pavoid;

namespace {

BuildConfig h_only(int levels, Rational factor = Rational(3, 2)) {
  BuildConfig cfg;
  cfg.d = 1;
  cfg.n = 2;
  cfg.alpha = 1.0;
  cfg.family.d = 1;
  cfg.family.n = 2;
  cfg.levels = levels;
  cfg.epsilon.factor = factor;
  cfg.seed = 42;
  return cfg;
}

OraclePtr cantor_pair() {
  return std::make_shared<ProductOracle>(
      std::vector<LineSetPtr>{std::make_shared<CantorLine>(3, std::vector<int>{0, 2}),
                              std::make_shared<CantorLine>(8, std::vector<int>{0, 1})},
      std::log(2.0) / std::log(3.0) + 1.0 / 3.0);
}

// Every final cube's ancestor at each earlier level is in that level's set.
bool nested(const ConstructionTrace& t) {
  for (std::size_t i = 1; i < t.levels.size(); ++i) {
    auto prev = brute::members(t.levels[i - 1].X);
    const int kc = t.levels[i - 1].entry.l.exponent(), kf = t.levels[i].entry.l.exponent();
    for (std::size_t j = 0; j < t.levels[i].X.size(); ++j) {
      auto c = brute::row(t.levels[i].X, j);
      for (auto& a : c) a >>= (kf - kc);
      if (!prev.count(c)) return false;
    }
  }
  return true;
}

}  // namespace

TEST_CASE("strong cover schedule examples") {
  CHECK(strong_cover_schedule(1, 4) == std::vector<int>{0, 0, 0, 0});
  CHECK(strong_cover_schedule(3, 6) == std::vector<int>{0, 0, 1, 0, 1, 2});
  CHECK(strong_cover_schedule(2, 0).empty());
  CHECK_THROWS_AS(strong_cover_schedule(0, 3), PreconditionError);
}

TEST_CASE("property: schedule repeats every component") {
  for (int m = 1; m <= 6; ++m)
    for (int len = 1; len <= 300; ++len) {
      auto s = strong_cover_schedule(m, len);
      REQUIRE(static_cast<int>(s.size()) == len);
      std::map<int, int> seen;
      for (int v : s) {
        CHECK(v >= 0);
        CHECK(v < m);
        ++seen[v];
      }
      const int bound = std::max(0, static_cast<int>(std::floor(std::sqrt(2.0 * len) - m)));
      for (int i = 0; i < m; ++i) CHECK(seen[i] >= bound);
      if (len > m * (m + 1) / 2)
        for (int i = 0; i < m; ++i) CHECK(seen[i] >= 1);
    }
}

TEST_CASE("epsilon sequence") {
  auto cfg = h_only(2, 1);
  CHECK(epsilon_at(cfg, 1) == Rational(1, 4));
  CHECK(epsilon_at(cfg, 2) == Rational(1, 8));
  for (int k = 1; k < 40; ++k) {
    CHECK(epsilon_at(cfg, k + 1) < epsilon_at(cfg, k));
    CHECK(Rational(1) - 2 * epsilon_at(cfg, k) > 0);
  }
}

TEST_CASE("scale selection examples") {
  auto cfg = h_only(2, 1);
  auto h = hyperplane_augmentation(1, 2);
  auto pick = select_scale(2, *h, DyadicScale(1), Rational(1, 4), cfg);
  CHECK(pick.l.exponent() == 8);
  CHECK(pick.count == pow2(8));
  cfg.max_scale_exponent = 7;
  CHECK_THROWS_AS(select_scale(2, *h, DyadicScale(1), Rational(1, 4), cfg), ScaleBudgetError);
}

TEST_CASE("chosen scales respect the r bound") {
  // C x C has alpha near 1.262; with a large epsilon the first scale passing
  // the counting tests (2^-5) would give r = 1, too coarse.
  BuildConfig cfg = h_only(1, Rational(7, 4));
  cfg.alpha = 2 * std::log(2.0) / std::log(3.0);
  cfg.family.components = {std::make_shared<ProductOracle>(
      std::vector<LineSetPtr>{std::make_shared<CantorLine>(3, std::vector<int>{0, 2}),
                              std::make_shared<CantorLine>(3, std::vector<int>{0, 2})},
      cfg.alpha)};
  const Rational eps = epsilon_at(cfg, 1);
  auto z = level_pattern(cfg, 0);
  auto pick = select_scale(1, *z, DyadicScale(0), eps, cfg);
  const auto r = intermediate_scale_for(1, 2, DyadicScale(0), pick.l, pick.count);
  CHECK(r_bound_holds(1, 2, cfg.alpha, eps, pick.l, r));
  CHECK_FALSE(r_bound_holds(1, 2, cfg.alpha, eps, DyadicScale(5), DyadicScale(0)));
  CHECK(pick.l.exponent() > 5);

  auto t = build(cfg);
  REQUIRE(t.levels.size() == 1);
  CHECK(t.certified());
  CHECK(t.levels[0].entry.l == pick.l);
}

TEST_CASE("config validation and trivial routes") {
  auto cfg = h_only(1);
  cfg.alpha = 2.0;
  CHECK_THROWS_AS(build(cfg), ConfigError);
  cfg.alpha = 2.5;
  CHECK_THROWS_AS(build(cfg), ConfigError);
  cfg = h_only(1);
  cfg.levels = 0;
  CHECK_THROWS_AS(build(cfg), ConfigError);
  cfg = h_only(1, 2);
  CHECK_THROWS_AS(build(cfg), ConfigError);

  // alpha < d: a single projection-complement level.
  cfg = h_only(3);
  cfg.alpha = 0.5;
  cfg.family.components = {std::make_shared<PointCloudOracle>(2, std::vector<std::vector<double>>{{0.3, 0.7}, {0.9, 0.1}})};
  auto t = build(cfg);
  REQUIRE(t.levels.size() == 1);
  CHECK(t.trivial);
  CHECK(t.complete());
  CHECK(t.certified());
  CHECK(t.levels[0].X.size() == 254);
  CHECK_FALSE(t.levels[0].X.contains(std::vector<Index>{static_cast<Index>(std::floor(0.3 * 256))}));
}

TEST_CASE("H-only build: one level, exhaustive pair check") {
  auto t = build(h_only(1, 1));
  REQUIRE(t.levels.size() == 1);
  CHECK(t.complete());
  CHECK(t.certified());
  const auto& x = t.levels[0].X;
  CHECK_FALSE(x.empty());
  auto h = hyperplane_augmentation(1, 2);
  const int k = x.scale().exponent();
  std::size_t bad = 0;
  for (std::size_t a = 0; a < x.size(); ++a)
    for (std::size_t b = 0; b < x.size(); ++b)
      if (a != b && h->contains(std::vector<Index>{x[a][0], x[b][0]}, k)) ++bad;
  CHECK(bad == 0);
}

TEST_CASE("H-only build: two levels with certificates") {
  auto cfg = h_only(2);
  auto t = build(cfg);
  REQUIRE(t.levels.size() == 2);
  CHECK(t.complete());
  CHECK(t.certified());
  CHECK(nested(t));
  for (std::size_t i = 0; i < t.levels.size(); ++i) {
    const auto& e = t.levels[i].entry;
    const DyadicScale before = t.scale_before(i);
    CHECK(before < e.l);
    CHECK(before <= e.r);
    CHECK(e.r <= e.l);
    CHECK(1 - 2 * e.epsilon > 0);
    // Growth: #X_k >= #X_{k-1} (l_{k-1}/r_k)^d / 2.
    const std::size_t prev = i == 0 ? 1 : t.levels[i - 1].X.size();
    CHECK(2 * t.levels[i].X.size() >= prev << (e.r.exponent() - before.exponent()));
  }
  // H meets a pair of cubes only through the cell at the origin.
  const auto& fin = t.levels.back().X;
  CHECK((fin.size() < 2 || !fin.contains(std::vector<Index>{0})));
  auto rep = verify_strong_avoidance(t, cfg, 20000);
  CHECK(rep.clean());
  CHECK(rep.sampled == 20000);
}

TEST_CASE("build is deterministic in the seed") {
  auto cfg = h_only(2);
  auto a = build(cfg), b = build(cfg);
  REQUIRE(a.levels.size() == b.levels.size());
  for (std::size_t i = 0; i < a.levels.size(); ++i) CHECK(a.levels[i].X == b.levels[i].X);
  cfg.seed = 43;
  auto c = build(cfg);
  CHECK_FALSE(c.levels.back().X == a.levels.back().X);
}

TEST_CASE("verify_strong_avoidance flags an injected cube") {
  auto cfg = h_only(2);
  auto t = build(cfg);
  REQUIRE(t.levels.size() == 2);
  auto& x = t.levels[1].X;
  x = set_union(x, CubeSet::from_sorted_unique(1, x.scale(), {0}));
  auto rep = verify_strong_avoidance(t, cfg, 1000);
  CHECK_FALSE(rep.clean());
  CHECK(rep.levels[0].clean);
  CHECK_FALSE(rep.levels[1].clean);
  REQUIRE(rep.levels[1].offending.size() == 2);
  CHECK(rep.levels[1].offending[1] == 0);
}

TEST_CASE("schedule stops with a scale budget error and keeps the certified prefix") {
  auto cfg = h_only(3);
  cfg.max_scale_exponent = 40;
  auto t = build(cfg);
  CHECK(t.levels.size() == 2);
  CHECK(t.stop_code == 4);
  CHECK(t.stop_reason.find("level 3") != std::string::npos);
  CHECK_FALSE(t.complete());
  CHECK(t.certified());
}

TEST_CASE("cantor-product component: two levels, sampled tuples clean") {
  auto cfg = h_only(2);
  cfg.family.components = {cantor_pair()};
  auto t = build(cfg);
  REQUIRE(t.levels.size() == 2);
  CHECK(t.certified());
  CHECK(nested(t));
  for (std::size_t i = 0; i < t.levels.size(); ++i)
    CHECK(r_bound_holds(1, 2, 1.0, t.levels[i].entry.epsilon, t.levels[i].entry.l, t.levels[i].entry.r));
  auto rep = verify_strong_avoidance(t, cfg, 20000);
  CHECK(rep.clean());
  // Direct pair scan over the final level against the component and H.
  const auto& fin = t.levels.back().X;
  if (fin.size() <= 3000) {
    auto z = level_pattern(cfg, 0);
    const int k = fin.scale().exponent();
    std::size_t bad = 0;
    for (std::size_t a = 0; a < fin.size(); ++a)
      for (std::size_t b = 0; b < fin.size(); ++b)
        if (a != b && z->contains(std::vector<Index>{fin[a][0], fin[b][0]}, k)) ++bad;
    CHECK(bad == 0);
  }
}
