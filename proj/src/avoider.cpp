#include "pavoid/avoider.hpp"

#include "pavoid/rng.hpp"

#include <algorithm>
#include <limits>

namespace pavoid {

std::optional<CubeSet> ExplicitCover::conflicts_within(const CubeSet& u, int n, std::size_t limit) const {
  if (u.dim() * n != g_.dim() || u.scale() != g_.scale())
    throw PreconditionError("conflicts_within: u and G disagree in dimension or scale");
  const std::size_t d = static_cast<std::size_t>(u.dim());
  std::vector<Index> out;
  std::size_t found = 0;
  for (std::size_t i = 0; i < g_.size(); ++i) {
    auto c = g_[i];
    if (!is_strongly_non_diagonal(c, u.dim(), n)) continue;
    bool all_in = true;
    for (int b = 0; b < n && all_in; ++b) all_in = u.contains(c.subspan(static_cast<std::size_t>(b) * d, d));
    if (!all_in) continue;
    if (++found > limit) return std::nullopt;
    out.insert(out.end(), c.begin(), c.end());
  }
  return CubeSet::from_sorted_unique(g_.dim(), g_.scale(), std::move(out));
}

OracleCover::OracleCover(OraclePtr oracle, DyadicScale s, Budget budget, std::optional<BigInt> known_count)
    : oracle_(std::move(oracle)), s_(s), budget_(budget) {
  if (!oracle_) throw PreconditionError("OracleCover: null oracle");
  count_ = known_count ? *known_count : oracle_->count(s_, budget_);
}

std::optional<CubeSet> OracleCover::conflicts_within(const CubeSet& u, int n, std::size_t limit) const {
  if (u.scale() != s_) throw PreconditionError("conflicts_within: u is not at the cover's scale");
  return oracle_->conflicts_within(u, n, limit, budget_);
}

void AvoidanceInstance::validate() const {
  if (d < 1 || n < 2 || d * n > kMaxDim) throw PreconditionError("avoidance instance: bad d or n");
  if (!(l < s)) throw PreconditionError("avoidance instance: l must be strictly coarser than s");
  if (E.empty() || E.dim() != d || E.scale() != l) throw PreconditionError("avoidance instance: E must be a nonempty set of l-cubes in dimension d");
  if (!G || G->dim() != d * n || G->scale() != s) throw PreconditionError("avoidance instance: G must consist of s-cubes in dimension dn");
}

bool check_hypothesis(const AvoidanceInstance& inst) {
  inst.validate();
  const unsigned long ratio = static_cast<unsigned long>(inst.s.exponent() - inst.l.exponent());
  const BigInt g = inst.G->count();
  const unsigned long d = static_cast<unsigned long>(inst.d), n = static_cast<unsigned long>(inst.n);
  return pow2(d * ratio) <= g && 2 * g <= pow2(d * n * ratio);
}

DyadicScale compute_intermediate_scale(const AvoidanceInstance& inst) {
  if (!check_hypothesis(inst)) throw HypothesisError("count of G violates the two-sided hypothesis");
  return intermediate_scale_for(inst.d, inst.n, inst.l, inst.s, inst.G->count());
}

DyadicScale intermediate_scale_for(int d, int n, DyadicScale l, DyadicScale s, const BigInt& count) {
  // r = 2^-m >= R iff m d(n-1) <= dn k_s - d k_l - 1 - ceil_log2 #G; take the largest such m.
  const long c = static_cast<long>(ceil_log2(count));
  const long num = static_cast<long>(d) * n * s.exponent() - static_cast<long>(d) * l.exponent() - 1 - c;
  const long den = static_cast<long>(d) * (n - 1);
  long m = num >= 0 ? num / den : -((-num + den - 1) / den);
  m = std::clamp<long>(m, l.exponent(), s.exponent());
  return DyadicScale(static_cast<int>(m));
}

std::size_t conflict_threshold(int d, DyadicScale l, DyadicScale r) {
  const int bits = d * (r.exponent() - l.exponent());
  if (bits <= 0) return 0;
  if (bits > 62) return std::numeric_limits<std::size_t>::max();
  return std::size_t{1} << (bits - 1);
}

std::uint64_t attempt_seed(std::uint64_t base, int attempt) {
  return hash_combine(base, static_cast<std::uint64_t>(attempt));
}

CubeSet random_select(const AvoidanceInstance& inst, DyadicScale r, std::uint64_t seed, std::size_t budget) {
  if (r < inst.l || r > inst.s) throw PreconditionError("random_select: r must lie between l and s");
  const int d = inst.d;
  const int tr = r.exponent() - inst.l.exponent();
  const int ts = inst.s.exponent() - r.exponent();
  const int bits = d * tr;
  if (bits >= 62 || inst.E.size() > (budget >> bits)) throw BudgetError("random_select: U would exceed the cube budget");
  const std::size_t per = std::size_t{1} << bits;
  const std::uint64_t mask = ts == 0 ? 0 : (ts >= 64 ? ~0ULL : ((std::uint64_t{1} << ts) - 1));
  const std::size_t ud = static_cast<std::size_t>(d);
  std::vector<Index> flat;
  flat.reserve(inst.E.size() * per * ud);
  std::vector<Index> rcube(ud);
  const Index side = Index{1} << tr;
  for (std::size_t e = 0; e < inst.E.size(); ++e) {
    auto base = inst.E[e];
    std::vector<Index> off(ud, 0);
    for (std::size_t q = 0; q < per; ++q) {
      for (std::size_t j = 0; j < ud; ++j) rcube[j] = (base[j] << tr) + off[j];
      for (std::size_t j = 0; j < ud; ++j) {
        const std::uint64_t h = hash_key(seed, rcube, j);
        flat.push_back((rcube[j] << ts) + static_cast<Index>(h & mask));
      }
      for (std::size_t j = ud; j-- > 0;) {
        if (++off[j] < side) break;
        off[j] = 0;
      }
    }
  }
  if (d == 1) return CubeSet::from_sorted_unique(d, inst.s, std::move(flat));
  return CubeSet::from_unsorted(d, inst.s, std::move(flat));
}

CubeSet collect_conflicts(const CubeSet& u, const CubeSet& g, int d, int n) {
  if (u.dim() != d || g.dim() != d * n) throw PreconditionError("collect_conflicts: dimension mismatch");
  return *ExplicitCover(g).conflicts_within(u, n, std::numeric_limits<std::size_t>::max());
}

CubeSet prune(const CubeSet& u, const CubeSet& k, int d, int n) {
  if (k.empty()) return u;
  if (k.dim() != d * n || u.dim() != d) throw PreconditionError("prune: dimension mismatch");
  std::vector<Index> first;
  first.reserve(k.size() * static_cast<std::size_t>(d));
  for (std::size_t i = 0; i < k.size(); ++i) first.insert(first.end(), k[i].begin(), k[i].begin() + d);
  return set_difference(u, CubeSet::from_unsorted(d, u.scale(), std::move(first)));
}

AvoidanceResult avoid_single_scale(const AvoidanceInstance& inst, std::uint64_t seed, int max_attempts) {
  const DyadicScale r = compute_intermediate_scale(inst);
  const std::size_t threshold = conflict_threshold(inst.d, inst.l, r);
  // Draws over the threshold are still counted up to twice it, for the failure report.
  const std::size_t probe = threshold > std::numeric_limits<std::size_t>::max() / 4 ? threshold : 2 * threshold + 16;
  std::optional<std::size_t> best;
  for (int attempt = 1; attempt <= max_attempts; ++attempt) {
    const std::uint64_t draw = attempt_seed(seed, attempt - 1);
    CubeSet u = random_select(inst, r, draw);
    auto k = inst.G->conflicts_within(u, inst.n, probe);
    if (k && (!best || k->size() < *best)) best = k->size();
    if (!k || k->size() > threshold) continue;
    AvoidanceResult res{r, prune(u, *k, inst.d, inst.n), k->size(), attempt, draw, {}};
    res.report = verify_properties(inst.E, *inst.G, res.F, inst.l, inst.s, r, inst.d, inst.n);
    if (!res.report.all()) throw IntegrityError("pruned set failed its own property check");
    return res;
  }
  throw ResampleError("no draw met the conflict threshold " + std::to_string(threshold) + " in " +
                      std::to_string(max_attempts) + " attempts (fewest conflicts seen: " +
                      (best ? std::to_string(*best) : "more than " + std::to_string(probe)) + ")");
}

PropertyReport verify_properties(const CubeSet& E, const PatternCover& G, const CubeSet& F, DyadicScale l,
                                 DyadicScale s, DyadicScale r, int d, int n) {
  PropertyReport rep;
  if (F.dim() != d || F.scale() != s || E.dim() != d || E.scale() != l)
    throw PreconditionError("verify_properties: sets do not match the declared scales");
  const std::size_t ud = static_cast<std::size_t>(d);

  // Avoidance through G itself; the limit leaves room to report a culprit.
  auto k = G.conflicts_within(F, n, 4 * F.size() + 1024);
  rep.avoidance = k && k->empty();
  if (k && !k->empty()) rep.offending.assign((*k)[0].begin(), (*k)[0].end());

  // Non-concentration: F cubes per r-cell.
  std::vector<Index> anc(F.flat().size());
  for (std::size_t i = 0; i < F.size(); ++i) ancestor_into(F[i], s.exponent(), r.exponent(), anc.data() + i * ud);
  {
    std::vector<std::size_t> order(F.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    auto row = [&](std::size_t i) { return IndexSpan(anc.data() + i * ud, ud); };
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return compare_index(row(a), row(b)) < 0; });
    std::size_t run = 0;
    for (std::size_t i = 0; i < order.size(); ++i) {
      run = (i > 0 && compare_index(row(order[i]), row(order[i - 1])) == 0) ? run + 1 : 1;
      rep.worst_cell_count = std::max(rep.worst_cell_count, run);
    }
  }
  rep.non_concentration = rep.worst_cell_count <= 1;

  // Containment in E and the per-E-cube lower bound.
  std::vector<std::size_t> per(E.size(), 0);
  rep.inside_e = true;
  std::vector<Index> up(ud);
  for (std::size_t i = 0; i < F.size(); ++i) {
    ancestor_into(F[i], s.exponent(), l.exponent(), up.data());
    const std::size_t pos = E.find(up);
    if (pos == E.size()) {
      rep.inside_e = false;
      continue;
    }
    ++per[pos];
  }
  const BigInt need = pow2(static_cast<unsigned long>(d * (r.exponent() - l.exponent())));
  rep.large_size = true;
  rep.min_per_parent = per.empty() ? 0 : *std::min_element(per.begin(), per.end());
  for (std::size_t c : per)
    if (BigInt(static_cast<unsigned long>(2 * c)) < need) rep.large_size = false;
  return rep;
}

}  // namespace pavoid
