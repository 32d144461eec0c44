#include "pavoid/line_sets.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace pavoid {

std::vector<Index> LineSet::enumerate(int k, std::size_t budget) const {
  DyadicScale{k};
  std::vector<Index> out;
  std::vector<std::pair<Index, int>> stack{{0, 0}};
  while (!stack.empty()) {
    auto [a, j] = stack.back();
    stack.pop_back();
    if (!meets(a, j, k)) continue;
    if (j == k) {
      if (out.size() >= budget) throw BudgetError("line set cover exceeds budget at k=" + std::to_string(k));
      out.push_back(a);
      continue;
    }
    // Right child first so the left subtree is emitted first.
    stack.emplace_back(2 * a + 1, j + 1);
    stack.emplace_back(2 * a, j + 1);
  }
  return out;
}

BigInt LineSet::count(int k, std::size_t budget) const {
  return BigInt(static_cast<unsigned long>(enumerate(k, budget).size()));
}

std::vector<Index> FullLine::enumerate(int k, std::size_t budget) const {
  const Index side = DyadicScale(k).cells_per_axis();
  if (static_cast<std::uint64_t>(side) > budget) throw BudgetError("full line cover exceeds budget");
  std::vector<Index> out(static_cast<std::size_t>(side));
  for (Index i = 0; i < side; ++i) out[static_cast<std::size_t>(i)] = i;
  return out;
}

BigInt FullLine::count(int k, std::size_t) const { return pow2(static_cast<unsigned long>(DyadicScale(k).exponent())); }

PointLine::PointLine(double p) : p_(p) {
  if (!(p >= 0.0 && p < 1.0)) throw ConfigError("point coordinate must lie in [0,1)");
}

std::string PointLine::describe() const {
  std::ostringstream os;
  os.precision(17);
  os << "point(" << p_ << ")";
  return os.str();
}

bool PointLine::meets(Index a, int k, int) const {
  return static_cast<Index>(std::floor(std::ldexp(p_, k))) == a;
}

std::vector<Index> PointLine::enumerate(int k, std::size_t) const {
  return {static_cast<Index>(std::floor(std::ldexp(p_, DyadicScale(k).exponent())))};
}

BigInt PointLine::count(int, std::size_t) const { return BigInt(1); }

CantorLine::CantorLine(int base, std::vector<int> digits) : base_(base), digits_(std::move(digits)) {
  if (base_ < 2 || base_ > 64) throw ConfigError("cantor base must be in [2, 64]");
  std::sort(digits_.begin(), digits_.end());
  digits_.erase(std::unique(digits_.begin(), digits_.end()), digits_.end());
  if (digits_.empty()) throw ConfigError("cantor digit set is empty");
  if (digits_.front() < 0 || digits_.back() >= base_) throw ConfigError("cantor digit outside [0, base)");
  BigInt p = 1;
  int m = 0;
  for (int k = 0; k <= kMaxExponent; ++k) {
    const BigInt goal = pow2(static_cast<unsigned long>(k));
    while (p < goal) {
      p *= base_;
      ++m;
    }
    generation_[static_cast<std::size_t>(k)] = m;
  }
}

std::string CantorLine::describe() const {
  std::ostringstream os;
  os << "cantor(" << base_ << ";";
  for (std::size_t i = 0; i < digits_.size(); ++i) os << (i ? "," : "") << digits_[i];
  os << ")";
  return os.str();
}

double CantorLine::dimension() const {
  return std::log(static_cast<double>(digits_.size())) / std::log(static_cast<double>(base_));
}


std::vector<Index> CantorLine::enumerate(int k, std::size_t budget) const {
  {
    std::lock_guard<std::mutex> lock(mu_);
    auto it = cache_.find(k);
    if (it != cache_.end()) {
      if (it->second->size() > budget) throw BudgetError("cantor cover exceeds budget at k=" + std::to_string(k));
      return *it->second;
    }
  }
  auto cells = std::make_shared<const std::vector<Index>>(LineSet::enumerate(k, budget));
  std::lock_guard<std::mutex> lock(mu_);
  cache_.emplace(k, cells);
  return *cells;
}

BigInt CantorLine::count(int k, std::size_t budget) const {
  return BigInt(static_cast<unsigned long>(enumerate(k, budget).size()));
}

bool CantorLine::meets(Index a, int k, int target) const {
  if (k > target) throw PreconditionError("CantorLine::meets: k finer than target");
  const __int128 unit = static_cast<__int128>(1) << k;
  return meets_rec(a, static_cast<__int128>(a) + 1, unit, generation(target));
}

// Cell [lo, hi) against the closed generation interval [0, unit], with
// `depth` generations still to descend.
bool CantorLine::meets_rec(__int128 lo, __int128 hi, __int128 unit, int depth) const {
  if (lo > unit || hi <= 0) return false;
  if (depth == 0 || (lo <= 0 && hi > unit)) return true;
  lo = std::max<__int128>(lo, -1);
  hi = std::min<__int128>(hi, unit + 1);
  for (int dd : digits_) {
    const __int128 shift = static_cast<__int128>(dd) * unit;
    if (meets_rec(lo * base_ - shift, hi * base_ - shift, unit, depth - 1)) return true;
  }
  return false;
}

}  // namespace pavoid
