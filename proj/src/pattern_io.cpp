#include "pavoid/pattern_io.hpp"

#include "pavoid/curves.hpp"
#include "pavoid/line_sets.hpp"

#include <cmath>
#include <fstream>

namespace pavoid {

using nlohmann::json;

namespace {

void check_keys(const json& j, const std::set<std::string>& allowed, const std::string& where) {
  for (auto it = j.begin(); it != j.end(); ++it)
    if (!allowed.count(it.key())) throw ConfigError(where + ": unknown key \"" + it.key() + "\"");
}

const json& need(const json& j, const char* key, const std::string& where) {
  if (!j.contains(key)) throw ConfigError(where + ": missing \"" + key + "\"");
  return j.at(key);
}

int get_int(const json& v, const std::string& what) {
  if (!v.is_number_integer()) throw ConfigError(what + " must be an integer");
  const auto x = v.get<long long>();
  if (x < -(1LL << 30) || x > (1LL << 30)) throw ConfigError(what + " out of range");
  return static_cast<int>(x);
}

double get_number(const json& v, const std::string& what) {
  if (!v.is_number()) throw ConfigError(what + " must be a number");
  const double x = v.get<double>();
  if (!std::isfinite(x)) throw ConfigError(what + " must be finite");
  return x;
}

double coordinate(const json& v, const std::string& what) {
  const double x = get_number(v, what);
  if (x < 0 || x >= 1) throw ConfigError(what + " must lie in [0,1)");
  return x;
}

LineSetPtr parse_factor(const json& f) {
  if (f.is_string()) {
    if (f.get<std::string>() == "full") return std::make_shared<FullLine>();
    throw ConfigError("cantor-product factor: unknown name " + f.dump());
  }
  if (!f.is_object()) throw ConfigError("cantor-product factor must be \"full\" or an object");
  if (f.contains("point")) {
    check_keys(f, {"point"}, "cantor-product factor");
    return std::make_shared<PointLine>(coordinate(f["point"], "factor point"));
  }
  check_keys(f, {"base", "digits"}, "cantor-product factor");
  const int base = get_int(need(f, "base", "cantor-product factor"), "base");
  const json& dj = need(f, "digits", "cantor-product factor");
  if (!dj.is_array()) throw ConfigError("cantor-product digits must be an array");
  std::vector<int> digits;
  for (const auto& d : dj) digits.push_back(get_int(d, "digit"));
  return std::make_shared<CantorLine>(base, std::move(digits));
}

// Dimension the structure itself implies; a smaller declared alpha is refused.
double factor_dimension(const LineSetPtr& l) {
  if (l->is_full()) return 1.0;
  if (auto c = std::dynamic_pointer_cast<const CantorLine>(l)) return c->dimension();
  return 0.0;
}

Soundness parse_soundness(const json& v) {
  if (v == "exact") return Soundness::exact;
  if (v == "over_approx") return Soundness::over_approx;
  throw ConfigError("soundness must be \"exact\" or \"over_approx\"");
}

double declared_or(const json& j, double fallback, double floor, const std::string& where) {
  if (!j.contains("alpha")) return fallback;
  const double a = get_number(j["alpha"], where + " alpha");
  if (a < 0) throw ConfigError(where + ": alpha must be non-negative");
  if (a + 1e-12 < floor) throw ConfigError(where + ": declared alpha is below the dimension of the set");
  return a;
}

OraclePtr parse_inner(const json& j, int depth) {
  if (depth > 16) throw ConfigError("pattern nesting too deep");
  if (!j.is_object()) throw ConfigError("pattern must be a JSON object");
  const std::string type = need(j, "type", "pattern").get<std::string>();
  const std::string where = "pattern " + type;
  OraclePtr out;

  if (type == "pointcloud") {
    check_keys(j, {"type", "dim", "points", "alpha", "soundness"}, where);
    const int dim = get_int(need(j, "dim", where), "dim");
    if (dim < 1 || dim > kMaxDim) throw ConfigError(where + ": dim out of range");
    std::vector<std::vector<double>> pts;
    for (const auto& p : need(j, "points", where)) {
      if (!p.is_array() || static_cast<int>(p.size()) != dim) throw ConfigError(where + ": point of wrong length");
      std::vector<double> x;
      for (const auto& c : p) x.push_back(coordinate(c, "point coordinate"));
      pts.push_back(std::move(x));
    }
    out = std::make_shared<PointCloudOracle>(dim, std::move(pts), declared_or(j, 0.0, 0.0, where));
  } else if (type == "zeroset-linear") {
    check_keys(j, {"type", "coefficients", "constant", "alpha", "soundness"}, where);
    const json& cj = need(j, "coefficients", where);
    if (!cj.is_array() || cj.empty() || static_cast<int>(cj.size()) > kMaxDim)
      throw ConfigError(where + ": coefficients must be a non-empty array");
    std::vector<Rational> coef;
    bool nonzero = false;
    for (const auto& c : cj) {
      coef.push_back(parse_rational_value(c));
      nonzero = nonzero || coef.back() != 0;
    }
    if (!nonzero) throw ConfigError(where + ": all coefficients are zero");
    const Rational c0 = j.contains("constant") ? parse_rational_value(j["constant"]) : Rational(0);
    const double dim = static_cast<double>(coef.size()) - 1;
    out = std::make_shared<LinearZeroSetOracle>(std::move(coef), c0, declared_or(j, dim, dim, where));
  } else if (type == "cantor-product") {
    check_keys(j, {"type", "factors", "alpha", "soundness"}, where);
    const json& fj = need(j, "factors", where);
    if (!fj.is_array() || fj.empty() || static_cast<int>(fj.size()) > kMaxDim)
      throw ConfigError(where + ": factors must be a non-empty array");
    std::vector<LineSetPtr> lines;
    double dim = 0;
    for (const auto& f : fj) {
      lines.push_back(parse_factor(f));
      dim += factor_dimension(lines.back());
    }
    out = std::make_shared<ProductOracle>(std::move(lines), declared_or(j, dim, dim, where));
  } else if (type == "hyperplane") {
    check_keys(j, {"type", "d", "n", "soundness"}, where);
    const int d = get_int(need(j, "d", where), "d");
    const int n = get_int(need(j, "n", where), "n");
    if (d < 1 || n < 1 || d * n > kMaxDim) throw ConfigError(where + ": d and n out of range");
    out = hyperplane_augmentation(d, n);
  } else if (type == "union") {
    check_keys(j, {"type", "parts", "soundness"}, where);
    const json& pj = need(j, "parts", where);
    if (!pj.is_array() || pj.empty()) throw ConfigError(where + ": parts must be a non-empty array");
    std::vector<OraclePtr> parts;
    for (const auto& p : pj) {
      parts.push_back(parse_inner(p, depth + 1));
      if (parts.back()->ambient_dim() != parts.front()->ambient_dim())
        throw ConfigError(where + ": parts live in different dimensions");
    }
    out = std::make_shared<UnionOracle>(std::move(parts));
  } else if (type == "sumset") {
    check_keys(j, {"type", "d", "target", "alpha", "soundness"}, where);
    const int d = get_int(need(j, "d", where), "d");
    if (d < 1 || 2 * d > kMaxDim) throw ConfigError(where + ": d out of range");
    OraclePtr y = parse_inner(need(j, "target", where), depth + 1);
    if (y->ambient_dim() != d) throw ConfigError(where + ": target must live in dimension d");
    if (y->declared_alpha() >= d) throw ConfigError(where + ": target dimension must be below d");
    const double a = d + y->declared_alpha();
    out = std::make_shared<SumsetOracle>(y, d, declared_or(j, a, a, where));
  } else if (type == "isosceles") {
    check_keys(j, {"type", "curve", "M", "space_dim", "alpha", "soundness"}, where);
    const std::string name = need(j, "curve", where).get<std::string>();
    const double m = get_number(need(j, "M", where), "M");
    if (!(m > 0)) throw ConfigError(where + ": M must be positive and finite");
    const int space_dim = j.contains("space_dim") ? get_int(j["space_dim"], "space_dim") : 2;
    out = isosceles_pattern(rescale_curve(make_builtin_curve(name, m)), space_dim);
    if (j.contains("alpha"))
      out = std::make_shared<IsoscelesOracle>(std::static_pointer_cast<const IsoscelesOracle>(out)->curve(),
                                              declared_or(j, 2.0, 2.0, where));
  } else {
    throw ConfigError("unknown pattern type \"" + type + "\"");
  }

  if (j.contains("soundness")) {
    const Soundness claimed = parse_soundness(j["soundness"]);
    if (claimed == Soundness::exact && out->soundness() != Soundness::exact)
      throw ConfigError(where + ": declared exact, but this cover is an over-approximation");
  }
  return out;
}

}  // namespace

Rational parse_rational_value(const json& v) {
  if (v.is_number_integer()) return Rational(BigInt(std::to_string(v.get<long long>())));
  if (v.is_number_float()) {
    const double x = v.get<double>();
    if (!std::isfinite(x)) throw ConfigError("rational value must be finite");
    return exact_rational(x);
  }
  if (v.is_string()) {
    Rational q;
    if (q.set_str(v.get<std::string>(), 10) != 0) throw ConfigError("bad rational \"" + v.get<std::string>() + "\"");
    if (q.get_den() == 0) throw ConfigError("rational with zero denominator");
    q.canonicalize();
    return q;
  }
  throw ConfigError("expected an integer, a float or a \"p/q\" string");
}

OraclePtr parse_pattern(const json& j) {
  try {
    return parse_inner(j, 0);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("pattern: ") + e.what());
  }
}

json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open " + path);
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw FormatError(path + ": " + e.what());
  }
}

OraclePtr read_pattern_file(const std::string& path) { return parse_pattern(read_json_file(path)); }

BuildConfig parse_build_config(const json& j, const FlagOverrides& flags, const std::filesystem::path& base_dir,
                               const std::set<std::string>& extra_keys) {
  if (!j.is_object()) throw ConfigError("config must be a JSON object");
  std::set<std::string> allowed{"d", "n", "alpha", "levels", "seed", "patterns", "epsilon_rule",
                                "max_scale_exponent", "min_scale_exponent", "count_slack",
                                "trivial_scale_exponent", "max_attempts", "budget"};
  allowed.insert(extra_keys.begin(), extra_keys.end());
  check_keys(j, allowed, "config");

  BuildConfig cfg;
  try {
    cfg.d = get_int(need(j, "d", "config"), "d");
    cfg.n = get_int(need(j, "n", "config"), "n");
    cfg.alpha = get_number(need(j, "alpha", "config"), "alpha");

    if (flags.seed) cfg.seed = *flags.seed;
    else if (j.contains("seed")) {
      if (!j["seed"].is_number_unsigned()) throw ConfigError("seed must be a non-negative integer");
      cfg.seed = j["seed"].get<std::uint64_t>();
    } else
      throw ConfigError("config: seed is mandatory");

    if (j.contains("levels")) cfg.levels = get_int(j["levels"], "levels");
    else if (flags.levels) cfg.levels = *flags.levels;
    if (j.contains("max_scale_exponent")) cfg.max_scale_exponent = get_int(j["max_scale_exponent"], "max_scale_exponent");
    else if (flags.max_k) cfg.max_scale_exponent = *flags.max_k;
    if (j.contains("min_scale_exponent")) cfg.min_scale_exponent = get_int(j["min_scale_exponent"], "min_scale_exponent");
    if (j.contains("trivial_scale_exponent"))
      cfg.trivial_scale_exponent = get_int(j["trivial_scale_exponent"], "trivial_scale_exponent");
    if (j.contains("max_attempts")) cfg.max_attempts = get_int(j["max_attempts"], "max_attempts");
    if (j.contains("count_slack")) cfg.count_slack = parse_rational_value(j["count_slack"]);

    if (j.contains("epsilon_rule")) {
      const json& e = j["epsilon_rule"];
      if (!e.is_object()) throw ConfigError("epsilon_rule must be an object");
      check_keys(e, {"factor", "shift"}, "epsilon_rule");
      if (e.contains("factor")) cfg.epsilon.factor = parse_rational_value(e["factor"]);
      if (e.contains("shift")) cfg.epsilon.shift = get_int(e["shift"], "epsilon_rule shift");
    }
    if (j.contains("budget")) {
      const json& b = j["budget"];
      if (!b.is_object()) throw ConfigError("budget must be an object");
      check_keys(b, {"max_cubes", "max_visits"}, "budget");
      if (b.contains("max_cubes")) {
        if (!b["max_cubes"].is_number_unsigned()) throw ConfigError("budget max_cubes must be a positive integer");
        cfg.budget.max_cubes = b["max_cubes"].get<std::size_t>();
      }
      if (b.contains("max_visits")) {
        if (!b["max_visits"].is_number_unsigned()) throw ConfigError("budget max_visits must be a positive integer");
        cfg.budget.max_visits = b["max_visits"].get<std::uint64_t>();
      }
    }

    cfg.family.d = cfg.d;
    cfg.family.n = cfg.n;
    if (j.contains("patterns")) {
      const json& pj = j["patterns"];
      if (!pj.is_array()) throw ConfigError("patterns must be an array");
      for (const auto& p : pj) {
        if (p.is_string()) {
          std::filesystem::path f = p.get<std::string>();
          if (f.is_relative()) f = base_dir / f;
          cfg.family.components.push_back(read_pattern_file(f.string()));
        } else {
          cfg.family.components.push_back(parse_pattern(p));
        }
      }
    }
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
  cfg.validate();
  return cfg;
}

}  // namespace pavoid
