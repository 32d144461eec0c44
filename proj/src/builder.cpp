#include "pavoid/builder.hpp"

#include "pavoid/rng.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace pavoid {

void BuildConfig::validate() const {
  if (d < 1 || n < 2 || d * n > kMaxDim) throw ConfigError("config: need d >= 1, n >= 2 and d*n within the dimension cap");
  if (!std::isfinite(alpha) || alpha < 0) throw ConfigError("config: alpha must be a finite non-negative number");
  if (alpha >= d * n)
    throw ConfigError("config: alpha must be below dn; for alpha = dn the problem is trivial, X = empty set avoids every pattern");
  if (levels < 1) throw ConfigError("config: levels must be at least 1");
  if (family.d != d || family.n != n) throw ConfigError("config: pattern family disagrees with d or n");
  if (!family.components.empty()) family.validate();
  if (epsilon.factor <= 0 || epsilon.shift < 0) throw ConfigError("config: epsilon rule needs a positive factor and a non-negative shift");
  if (!trivial() && 2 * epsilon_at(*this, 1) >= Rational(d * n) - exact_rational(alpha))
    throw ConfigError("config: epsilon rule leaves dn - alpha - 2 eps_1 <= 0");
  if (max_scale_exponent < 1 || max_scale_exponent > kMaxExponent) throw ConfigError("config: max_scale_exponent out of range");
  if (min_scale_exponent < 0 || min_scale_exponent > max_scale_exponent) throw ConfigError("config: min_scale_exponent out of range");
  if (count_slack < 1) throw ConfigError("config: count_slack must be at least 1");
  if (trivial_scale_exponent < 1 || trivial_scale_exponent > 24) throw ConfigError("config: trivial_scale_exponent must lie in [1, 24]");
  if (max_attempts < 1) throw ConfigError("config: max_attempts must be positive");
}

bool BuildConfig::trivial() const { return alpha < d; }

bool ConstructionTrace::certified() const {
  return std::all_of(levels.begin(), levels.end(), [](const LevelRecord& r) { return r.cert.all(); });
}

std::vector<int> strong_cover_schedule(int num_components, int length) {
  if (num_components < 1) throw PreconditionError("strong_cover_schedule: need at least one component");
  std::vector<int> out;
  out.reserve(static_cast<std::size_t>(std::max(length, 0)));
  for (int block = 1; static_cast<int>(out.size()) < length; ++block)
    for (int i = 0; i < std::min(block, num_components) && static_cast<int>(out.size()) < length; ++i) out.push_back(i);
  return out;
}

Rational epsilon_at(const BuildConfig& cfg, int k) {
  Rational gap = Rational(cfg.d * cfg.n) - exact_rational(cfg.alpha);
  Rational e = cfg.epsilon.factor * gap / Rational(pow2(static_cast<unsigned long>(k + cfg.epsilon.shift)));
  e.canonicalize();
  return e;
}

ScaleChoice select_scale(int level, const PatternOracle& z, DyadicScale l_prev, const Rational& eps,
                         const BuildConfig& cfg) {
  const Rational alpha = exact_rational(cfg.alpha);
  const long d = cfg.d, dn = cfg.d * cfg.n;
  const long kp = l_prev.exponent();
  const Rational growth = Rational(dn) - alpha - eps;
  std::string last = "no candidate scale finer than the previous level";
  for (int k = std::max<int>(static_cast<int>(kp) + 1, cfg.min_scale_exponent); k <= cfg.max_scale_exponent; ++k) {
    // l^(dn-alpha-eps) <= l_prev^dn / 2
    if (Rational(k) * growth < Rational(1 + dn * kp)) {
      last = "l^(dn-alpha-eps) <= l_prev^dn / 2";
      continue;
    }
    // l^eps <= l_prev^(2d)
    if (Rational(k) * eps < Rational(2 * d * kp)) {
      last = "l^eps <= l_prev^(2d)";
      continue;
    }
    BigInt count;
    try {
      count = z.count(DyadicScale(k), cfg.budget);
    } catch (const BudgetError& e) {
      throw ScaleBudgetError("scale budget exhausted at level " + std::to_string(level) + ": counting the pattern at 2^-" +
                             std::to_string(k) + " exceeded the budget (" + e.what() + ")");
    }
    // #B_l(Z) <= slack * l^(-alpha - eps/2)
    if (!rational_le_pow2(Rational(count) / cfg.count_slack, Rational(k) * (alpha + eps / 2))) {
      last = "#B_l(Z) <= slack * l^(-alpha-eps/2)";
      continue;
    }
    const unsigned long ratio = static_cast<unsigned long>(k - kp);
    if (count < pow2(static_cast<unsigned long>(d) * ratio) || 2 * count > pow2(static_cast<unsigned long>(dn) * ratio)) {
      last = "(l_prev/l)^d <= #G <= (l_prev/l)^(dn) / 2";
      continue;
    }
    const DyadicScale r = intermediate_scale_for(cfg.d, cfg.n, l_prev, DyadicScale(k), count);
    if (!r_bound_holds(cfg.d, cfg.n, cfg.alpha, eps, DyadicScale(k), r)) {
      last = "r <= 4 l^((dn-alpha-eps)/(d(n-1)))";
      continue;
    }
    return {DyadicScale(k), count};
  }
  throw ScaleBudgetError("scale budget exhausted at level " + std::to_string(level) + ": no l up to 2^-" +
                         std::to_string(cfg.max_scale_exponent) + " satisfies " + last);
}

bool r_bound_holds(int d, int n, double alpha, const Rational& eps, DyadicScale l, DyadicScale r) {
  // -m <= log2(C) - k (dn - alpha - eps) / (d (n-1))
  const Rational rhs = Rational(l.exponent()) * (Rational(d * n) - exact_rational(alpha) - eps) / Rational(d * (n - 1));
  return Rational(r.exponent()) + Rational(2) >= rhs;  // log2 of kRBoundConstant is 2
}

namespace {

OraclePtr all_components(const BuildConfig& cfg) {
  const int dim = cfg.d * cfg.n;
  if (cfg.family.components.empty()) return std::make_shared<EmptyOracle>(dim);
  return std::make_shared<UnionOracle>(cfg.family.components);
}

}  // namespace

OraclePtr level_pattern(const BuildConfig& cfg, int pattern_index) {
  if (pattern_index < 0) return all_components(cfg);
  auto h = hyperplane_augmentation(cfg.d, cfg.n);
  if (cfg.family.components.empty()) return h;
  return union_oracle(cfg.family.components.at(static_cast<std::size_t>(pattern_index)), h);
}

namespace {

ConstructionTrace trivial_build(const BuildConfig& cfg, ConstructionTrace trace) {
  const DyadicScale s(cfg.trivial_scale_exponent);
  auto z = all_components(cfg);
  LevelRecord rec;
  rec.entry.level = 1;
  rec.entry.pattern_index = -1;
  rec.entry.epsilon = 0;
  rec.entry.l = s;
  rec.entry.r = s;
  rec.entry.pattern_count = z->count(s, cfg.budget);
  rec.X = trivial_projection_complement(*z, cfg.d, cfg.n, s, cfg.budget);
  if (rec.X.empty()) {
    trace.stop_reason = "projection of the pattern covers the whole grid at 2^-" + std::to_string(s.exponent());
    trace.stop_code = 3;
    return trace;
  }
  auto conflicts = z->conflicts_within(rec.X, cfg.n, 0, cfg.budget);
  rec.cert.scales_ordered = true;
  rec.cert.r_bound = true;
  rec.cert.large_size = true;
  rec.cert.non_concentration = true;
  rec.cert.avoidance = conflicts && conflicts->empty();
  rec.cert.nested = true;
  rec.cert.min_per_parent = rec.X.size();
  rec.cert.worst_cell_count = 1;
  rec.cert.attempts = 1;
  trace.levels.push_back(std::move(rec));
  return trace;
}

}  // namespace

ConstructionTrace build(const BuildConfig& cfg) {
  cfg.validate();
  ConstructionTrace trace;
  trace.d = cfg.d;
  trace.n = cfg.n;
  trace.alpha = cfg.alpha;
  trace.seed = cfg.seed;
  trace.trivial = cfg.trivial();
  trace.requested_levels = cfg.trivial() ? 1 : cfg.levels;
  if (trace.trivial) return trivial_build(cfg, std::move(trace));

  const int components = std::max<int>(1, static_cast<int>(cfg.family.components.size()));
  const auto schedule = strong_cover_schedule(components, cfg.levels);
  CubeSet prev = CubeSet::full_grid(cfg.d, DyadicScale(0), 1);
  DyadicScale l_prev(0);
  for (int k = 1; k <= cfg.levels; ++k) {
    try {
      const Rational eps = epsilon_at(cfg, k);
      const int idx = schedule[static_cast<std::size_t>(k - 1)];
      auto z = level_pattern(cfg, idx);
      const ScaleChoice choice = select_scale(k, *z, l_prev, eps, cfg);
      auto cover = std::make_shared<OracleCover>(z, choice.l, cfg.budget, choice.count);
      AvoidanceInstance inst{cfg.d, cfg.n, l_prev, choice.l, prev, cover};
      AvoidanceResult res = avoid_single_scale(inst, hash_combine(cfg.seed, static_cast<std::uint64_t>(k)), cfg.max_attempts);

      LevelRecord rec;
      rec.entry = {k, idx, eps, choice.l, res.r, choice.count};
      rec.cert.scales_ordered = l_prev <= res.r && res.r <= choice.l;
      rec.cert.r_bound = r_bound_holds(cfg.d, cfg.n, cfg.alpha, eps, choice.l, res.r);
      rec.cert.large_size = res.report.large_size;
      rec.cert.non_concentration = res.report.non_concentration;
      rec.cert.avoidance = res.report.avoidance;
      rec.cert.nested = res.report.inside_e;
      rec.cert.min_per_parent = res.report.min_per_parent;
      rec.cert.worst_cell_count = res.report.worst_cell_count;
      rec.cert.conflicts = res.conflicts;
      rec.cert.attempts = res.attempts;
      rec.cert.draw_seed = res.seed;
      if (!rec.cert.all()) throw IntegrityError("level " + std::to_string(k) + " failed its certificate");
      rec.X = std::move(res.F);
      prev = rec.X;
      l_prev = choice.l;
      trace.levels.push_back(std::move(rec));
    } catch (const HypothesisError& e) {
      trace.stop_reason = e.what();
      trace.stop_code = 3;
      break;
    } catch (const ScaleBudgetError& e) {
      trace.stop_reason = e.what();
      trace.stop_code = 4;
      break;
    } catch (const BudgetError& e) {
      trace.stop_reason = std::string("cube budget exceeded at level ") + std::to_string(k) + ": " + e.what();
      trace.stop_code = 4;
      break;
    } catch (const ResampleError& e) {
      trace.stop_reason = e.what();
      trace.stop_code = 5;
      break;
    }
  }
  return trace;
}

bool StrongAvoidanceReport::clean() const {
  return violations == 0 && std::all_of(levels.begin(), levels.end(), [](const Level& l) { return l.clean; });
}

StrongAvoidanceReport verify_strong_avoidance(const ConstructionTrace& trace, const BuildConfig& cfg, std::size_t samples) {
  StrongAvoidanceReport rep;
  if (trace.levels.empty()) throw PreconditionError("verify_strong_avoidance: trace has no levels");
  const int d = trace.d, n = trace.n;
  const std::size_t ud = static_cast<std::size_t>(d);

  for (const auto& lvl : trace.levels) {
    auto z = level_pattern(cfg, lvl.entry.pattern_index);
    StrongAvoidanceReport::Level out;
    out.level = lvl.entry.level;
    auto scan = z->descend_conflicts(lvl.X, n, 16, cfg.budget);
    out.clean = !scan.truncated && scan.found.empty();
    if (!scan.found.empty()) out.offending.assign(scan.found[0].begin(), scan.found[0].end());
    rep.levels.push_back(std::move(out));
  }

  // Components checked by sampling: each listed one plus H (index -2).
  std::vector<std::pair<int, OraclePtr>> parts;
  for (std::size_t i = 0; i < cfg.family.components.size(); ++i)
    parts.emplace_back(static_cast<int>(i), cfg.family.components[i]);
  if (!trace.trivial) parts.emplace_back(-2, hyperplane_augmentation(d, n));

  const CubeSet& fin = trace.levels.back().X;
  const int kf = fin.scale().exponent();
  if (fin.size() < static_cast<std::size_t>(n)) return rep;
  SplitMix64 rng(hash_combine(trace.seed, 0x7e57ULL));
  std::vector<std::size_t> pick(static_cast<std::size_t>(n));
  std::vector<Index> tuple(ud * static_cast<std::size_t>(n)), anc(tuple.size());
  for (std::size_t t = 0; t < samples; ++t) {
    for (std::size_t a = 0; a < pick.size(); ++a) {
      bool fresh;
      do {
        pick[a] = static_cast<std::size_t>(rng.below(fin.size()));
        fresh = std::find(pick.begin(), pick.begin() + static_cast<std::ptrdiff_t>(a), pick[a]) == pick.begin() + static_cast<std::ptrdiff_t>(a);
      } while (!fresh);
      std::copy(fin[pick[a]].begin(), fin[pick[a]].end(), tuple.begin() + static_cast<std::ptrdiff_t>(a * ud));
    }
    ++rep.sampled;
    bool unresolved = false;
    for (const auto& [idx, part] : parts) {
      bool separated = false;
      for (const auto& lvl : trace.levels) {
        const int p = lvl.entry.pattern_index;
        if (idx != -2 && p != idx && p != -1) continue;
        for (std::size_t a = 0; a < pick.size(); ++a)
          ancestor_into(IndexSpan(tuple.data() + a * ud, ud), kf, lvl.entry.l.exponent(), anc.data() + a * ud);
        if (is_strongly_non_diagonal(anc, d, n)) {
          separated = true;
          break;
        }
      }
      if (!separated) {
        unresolved = true;
        continue;
      }
      if (part->contains(tuple, kf)) {
        if (rep.violations++ == 0) rep.first_violation = tuple;
      }
    }
    rep.unresolved += unresolved;
  }
  return rep;
}

}  // namespace pavoid
