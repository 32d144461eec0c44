#include "pavoid/analysis.hpp"
#include "pavoid/demos.hpp"
#include "pavoid/pattern_io.hpp"
#include "pavoid/serialize.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <chrono>
#include <fstream>
#include <iostream>
#include <sstream>

namespace fs = std::filesystem;
using nlohmann::json;
using namespace pavoid;

namespace {

enum Exit { kOk = 0, kInternal = 1, kConfig = 2, kHypothesis = 3, kScale = 4, kResample = 5, kCheckFailed = 6, kInput = 7 };

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw ConfigError("cannot open " + p.string());
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

void put(const fs::path& dir, const std::string& name, const std::string& text) {
  std::ofstream out(dir / name, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + (dir / name).string());
  out << text;
}

template <class Writer>
void put_with(const fs::path& dir, const std::string& name, Writer w) {
  std::ofstream out(dir / name, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + (dir / name).string());
  w(out);
}

fs::path out_dir(const std::string& out) {
  if (out.empty()) throw ConfigError("--out is required");
  fs::create_directories(out);
  return out;
}

json parse_text(const std::string& text, const std::string& what) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(what + " is not valid JSON: " + e.what());
  }
}

ConstructionTrace load_trace(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError("cannot open trace " + path);
  return read_trace(in);
}

MeasureTree load_measure(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError("cannot open measure " + path);
  return read_measure(in);
}

class Clock {
 public:
  double lap() {
    const auto now = std::chrono::steady_clock::now();
    const double ms = std::chrono::duration<double, std::milli>(now - t_).count();
    t_ = now;
    return ms;
  }

 private:
  std::chrono::steady_clock::time_point t_ = std::chrono::steady_clock::now();
};

void finish(RunManifest& m, const fs::path& dir, const std::vector<std::string>& files, int code) {
  m.exit_code = code;
  add_outputs(m, dir, files);
  put(dir, "manifest.json", manifest_json(m));
}

json certificates_json(const ConstructionTrace& t) {
  json arr = json::array();
  for (const auto& l : t.levels) {
    const auto& c = l.cert;
    arr.push_back({{"level", l.entry.level},
                   {"l_exponent", l.entry.l.exponent()},
                   {"r_exponent", l.entry.r.exponent()},
                   {"cubes", l.X.size()},
                   {"scales_ordered", c.scales_ordered},
                   {"r_bound", c.r_bound},
                   {"large_size", c.large_size},
                   {"non_concentration", c.non_concentration},
                   {"avoidance", c.avoidance},
                   {"nested", c.nested},
                   {"min_per_parent", c.min_per_parent},
                   {"worst_cell_count", c.worst_cell_count},
                   {"conflicts", c.conflicts},
                   {"attempts", c.attempts},
                   {"passed", c.all()}});
  }
  return {{"levels", arr}, {"complete", t.complete()}, {"stop_reason", t.stop_reason}};
}

// ---------------------------------------------------------------- construct

struct Common {
  std::string config, out;
  std::optional<std::uint64_t> seed;
  std::optional<int> max_k, levels;
  FlagOverrides flags() const { return {seed, max_k, levels}; }
};

int cmd_construct(const Common& c) {
  Clock clock;
  const std::string text = slurp(c.config);
  const BuildConfig cfg = parse_build_config(parse_text(text, c.config), c.flags(), fs::path(c.config).parent_path());
  const fs::path dir = out_dir(c.out);
  RunManifest m;
  m.command = "construct";
  m.config_sha256 = sha256_hex(text);
  m.seed = cfg.seed;
  m.timings_ms.emplace_back("parse", clock.lap());

  const ConstructionTrace trace = build(cfg);
  m.timings_ms.emplace_back("build", clock.lap());
  std::vector<std::string> files{"trace.json", "certificates.json"};
  put_with(dir, "trace.json", [&](std::ostream& o) { write_trace(o, trace); });
  put(dir, "certificates.json", certificates_json(trace).dump(2) + "\n");
  if (!trace.levels.empty()) {
    const MeasureTree tree = build_measure(trace);
    m.timings_ms.emplace_back("measure", clock.lap());
    put_with(dir, "measure.json", [&](std::ostream& o) { write_measure(o, tree); });
    files.push_back("measure.json");
  }

  int code = kOk;
  if (trace.stop_code != 0) {
    std::cerr << "build stopped after " << trace.levels.size() << " of " << trace.requested_levels
              << " levels: " << trace.stop_reason << "\n";
    code = trace.stop_code;
  } else if (!trace.certified()) {
    std::cerr << "a level failed its certificate\n";
    code = kInput;
  }
  finish(m, dir, files, code);
  for (const auto& l : trace.levels)
    std::cout << "level " << l.entry.level << ": l=2^-" << l.entry.l.exponent() << " r=2^-" << l.entry.r.exponent()
              << " cubes=" << l.X.size() << (l.cert.all() ? " certified" : " FAILED") << "\n";
  return code;
}

// ---------------------------------------------------------------- verify

int cmd_verify(const std::string& trace_path, const Common& c, const std::vector<std::string>& pattern_files,
               std::size_t limit) {
  Clock clock;
  const ConstructionTrace trace = load_trace(trace_path);
  BuildConfig cfg;
  std::string hashed;
  if (!c.config.empty()) {
    if (!pattern_files.empty()) throw ConfigError("verify: give --config or --pattern, not both");
    hashed = slurp(c.config);
    cfg = parse_build_config(parse_text(hashed, c.config), c.flags(), fs::path(c.config).parent_path());
  } else {
    if (pattern_files.empty()) throw ConfigError("verify: a --config or at least one --pattern file is needed");
    cfg.d = trace.d;
    cfg.n = trace.n;
    cfg.alpha = trace.alpha;
    cfg.seed = trace.seed;
    cfg.levels = trace.requested_levels;
    cfg.family.d = trace.d;
    cfg.family.n = trace.n;
    for (const auto& p : pattern_files) {
      hashed += slurp(p);
      cfg.family.components.push_back(read_pattern_file(p));
    }
    cfg.validate();
  }
  const VerifyReport rep = verify_trace(trace, cfg, limit);
  const json j = rep.to_json();
  std::cout << j.dump(2) << "\n";
  const int code = rep.clean() ? kOk : kCheckFailed;
  if (code != kOk) {
    for (const auto& l : rep.levels)
      for (const auto& t : l.offending) {
        std::cerr << "level " << l.level << " offending tuple:";
        for (auto v : t) std::cerr << ' ' << v;
        std::cerr << "\n";
      }
    if (!rep.levels.empty()) std::cerr << "verification failed\n";
  }
  if (!c.out.empty()) {
    const fs::path dir = out_dir(c.out);
    put(dir, "verify.json", j.dump(2) + "\n");
    RunManifest m;
    m.command = "verify";
    m.config_sha256 = sha256_hex(hashed);
    m.seed = trace.seed;
    m.timings_ms.emplace_back("verify", clock.lap());
    finish(m, dir, {"verify.json"}, code);
  }
  return code;
}

// ---------------------------------------------------------------- dimension

int cmd_dimension(const std::string& trace_path, const Common& c) {
  Clock clock;
  const ConstructionTrace trace = load_trace(trace_path);
  const DimensionReport rep = dimension_report(trace);
  std::cout << rep.to_csv();
  if (rep.fit)
    std::cout << "slope " << format_double(rep.fit->slope) << " target " << format_double(rep.target) << "\n";
  else
    std::cout << "no slope: " << rep.refusal << " (target " << format_double(rep.target) << ")\n";
  if (!c.out.empty()) {
    const fs::path dir = out_dir(c.out);
    put(dir, "dimension.csv", rep.to_csv());
    put(dir, "dimension.json", rep.summary().dump(2) + "\n");
    RunManifest m;
    m.command = "dimension";
    m.config_sha256 = sha256_file(trace_path);
    m.seed = trace.seed;
    m.timings_ms.emplace_back("dimension", clock.lap());
    finish(m, dir, {"dimension.csv", "dimension.json"}, kOk);
  }
  return kOk;
}

// ---------------------------------------------------------------- demos

const char* kSumsetDefault = R"({
  "demo": "sumset",
  "seed": 42,
  "target": {"type": "cantor-product", "factors": [{"base": 3, "digits": [0, 2]}]}
})";

const char* kIsoscelesDefault = R"({
  "demo": "isosceles",
  "seed": 42,
  "curves": [{"curve": "zero", "M": 1}, {"curve": "identity", "M": 1}]
})";

// Demo configs carry build keys plus their own; n and alpha follow from the
// demo, so they are filled in before the shared parser runs.
BuildConfig demo_build_config(json j, const Common& c, int d, int n, double alpha, const std::set<std::string>& own) {
  for (const char* k : {"alpha", "patterns"})
    if (j.contains(k)) throw ConfigError(std::string("demo config: '") + k + "' is derived by the demo and may not be set");
  j["d"] = d;
  j["n"] = n;
  j["alpha"] = alpha;
  std::set<std::string> extra(own);
  extra.insert("demo");
  return parse_build_config(j, c.flags(), c.config.empty() ? fs::path{} : fs::path(c.config).parent_path(), extra);
}

int demo_sumset(const json& j, const std::string& hashed, const Common& c) {
  Clock clock;
  if (!j.contains("target")) throw ConfigError("sumset demo: 'target' pattern is required");
  const OraclePtr y = parse_pattern(j["target"]);
  const int d = y->ambient_dim();
  if (j.contains("n") && j["n"] != 2) throw ConfigError("sumset demo: n is 2");
  if (j.contains("d") && j["d"] != d) throw ConfigError("sumset demo: d must match the target's dimension");
  if (!(y->declared_alpha() < d)) throw ConfigError("sumset demo: the target set needs dimension below d");
  json base = j;
  base.erase("target");
  base.erase("n");
  base.erase("d");
  if (!base.contains("levels")) base["levels"] = 1;
  if (!base.contains("min_scale_exponent")) base["min_scale_exponent"] = 24;
  const BuildConfig cfg = demo_build_config(base, c, d, 2, d + y->declared_alpha(), {});
  const SumsetDemo demo = run_sumset_demo(cfg, y);
  const fs::path dir = out_dir(c.out);
  const json report = demo.to_json();
  std::cout << report.dump(2) << "\n";
  put(dir, "sumset.json", report.dump(2) + "\n");
  put_with(dir, "trace.json", [&](std::ostream& o) { write_trace(o, demo.trace); });
  put(dir, "X.json", cubeset_json(demo.trace.levels.back().X));
  RunManifest m;
  m.command = "demo sumset";
  m.config_sha256 = sha256_hex(hashed);
  m.seed = cfg.seed;
  m.timings_ms.emplace_back("demo", clock.lap());
  const int code = demo.trace.stop_code ? demo.trace.stop_code : demo.clean() ? kOk : kCheckFailed;
  finish(m, dir, {"sumset.json", "trace.json", "X.json"}, code);
  return code;
}

int demo_isosceles(const json& j, const std::string& hashed, const Common& c) {
  Clock clock;
  if (j.contains("d") && j["d"] != 1) throw ConfigError("isosceles demo: d is 1");
  const int n = j.value("n", 3);
  if (n != 3) throw ConfigError("isosceles demo: a triangle needs three points, so n must be 3");
  json base = j;
  for (const char* k : {"curves", "scan", "n", "d"}) base.erase(k);
  if (!base.contains("levels")) base["levels"] = 1;
  if (!base.contains("min_scale_exponent")) base["min_scale_exponent"] = 10;
  if (!base.contains("count_slack")) base["count_slack"] = 4;
  if (!base.contains("epsilon_rule")) base["epsilon_rule"] = {{"factor", "15/8"}};
  const BuildConfig cfg = demo_build_config(base, c, 1, 3, 2.0, {});

  int lo = 4, hi = 9;
  if (j.contains("scan")) {
    const json& s = j["scan"];
    if (!s.is_object()) throw ConfigError("isosceles demo: scan must be an object");
    lo = s.value("from", lo);
    hi = s.value("to", hi);
    if (lo < 2 || hi < lo + 3) throw ConfigError("isosceles demo: scan needs from >= 2 and at least four scales");
  }
  if (!j.contains("curves") || !j["curves"].is_array() || j["curves"].empty())
    throw ConfigError("isosceles demo: 'curves' must be a non-empty array");

  const fs::path dir = out_dir(c.out);
  json all = json::array();
  std::vector<std::string> files{"isosceles.json"};
  bool ok = true;
  int stop = 0;
  for (const auto& cj : j["curves"]) {
    if (!cj.is_object() || !cj.contains("curve") || !cj.contains("M"))
      throw ConfigError("isosceles demo: each curve needs 'curve' and 'M'");
    const std::string name = cj["curve"].get<std::string>();
    const double mm = cj["M"].get<double>();
    if (!(mm > 0) || !std::isfinite(mm)) throw ConfigError("isosceles demo: M must be positive and finite");
    const IsoscelesDemo demo = run_isosceles_demo(cfg, name, mm, lo, hi);
    const json r = demo.to_json();
    all.push_back(r);
    ok = ok && demo.clean() && demo.fit_ok();
    if (demo.trace.stop_code && !stop) stop = demo.trace.stop_code;
    put_with(dir, "trace_" + name + ".json", [&](std::ostream& o) { write_trace(o, demo.trace); });
    put(dir, "X_" + name + ".json", demo.parametrizations().dump(2) + "\n");
    files.push_back("trace_" + name + ".json");
    files.push_back("X_" + name + ".json");
  }
  std::cout << all.dump(2) << "\n";
  put(dir, "isosceles.json", all.dump(2) + "\n");
  RunManifest m;
  m.command = "demo isosceles";
  m.config_sha256 = sha256_hex(hashed);
  m.seed = cfg.seed;
  m.timings_ms.emplace_back("demo", clock.lap());
  const int code = stop ? stop : ok ? kOk : kCheckFailed;
  finish(m, dir, files, code);
  return code;
}

int cmd_demo(std::string which, const Common& c) {
  std::string text;
  if (!c.config.empty()) {
    text = slurp(c.config);
  } else {
    if (which == "sumset") text = kSumsetDefault;
    else if (which == "isosceles") text = kIsoscelesDefault;
  }
  json j = text.empty() ? json::object() : parse_text(text, c.config.empty() ? "built-in demo" : c.config);
  if (!j.is_object()) throw ConfigError("demo config must be a JSON object");
  if (j.contains("demo")) {
    const std::string named = j["demo"].get<std::string>();
    if (which.empty()) which = named;
    else if (which != named) throw ConfigError("demo config is for '" + named + "', not '" + which + "'");
  }
  if (which == "sumset") return demo_sumset(j, text, c);
  if (which == "isosceles") return demo_isosceles(j, text, c);
  throw ConfigError("unknown demo '" + which + "' (sumset or isosceles)");
}

// ---------------------------------------------------------------- export-plot

int cmd_export_plot(const std::string& trace_path, const std::string& measure_path, double eps, const Common& c) {
  Clock clock;
  const ConstructionTrace trace = load_trace(trace_path);
  const MeasureTree tree = load_measure(measure_path);
  const PlotBundle b = export_plot(trace, tree, eps);
  const fs::path dir = out_dir(c.out);
  put(dir, "counts.csv", b.counts_csv);
  put(dir, "mass.csv", b.mass_csv);
  put(dir, "frostman.csv", b.frostman_csv);
  RunManifest m;
  m.command = "export-plot";
  m.config_sha256 = sha256_hex(slurp(trace_path) + slurp(measure_path));
  m.seed = trace.seed;
  m.timings_ms.emplace_back("export", clock.lap());
  finish(m, dir, {"counts.csv", "mass.csv", "frostman.csv"}, kOk);
  std::cout << b.rows << " scales exported to " << dir.string() << "\n";
  return kOk;
}

int run(int argc, char** argv) {
  CLI::App app{"Dyadic multiscale construction of pattern-avoiding sets"};
  app.require_subcommand(1);
  app.set_version_flag("--version", kToolVersion);

  Common c;
  std::uint64_t seed = 0;
  int max_k = 0, levels = 0;
  std::string trace_path, measure_path, demo_name;
  std::vector<std::string> patterns;
  std::size_t limit = 200;
  double eps = 0.05;

  auto common = [&](CLI::App* s, bool needs_config) {
    auto* o = s->add_option("--config", c.config, "JSON config file");
    if (needs_config) o->required()->check(CLI::ExistingFile);
    s->add_option("--seed", seed, "seed; overrides the config");
    s->add_option("--out", c.out, "output directory");
    s->add_option("--max-k", max_k, "finest scale exponent, if the config has none");
    s->add_option("--levels", levels, "number of levels, if the config has none");
  };

  auto* construct = app.add_subcommand("construct", "build nested sets, the measure and certificates");
  common(construct, true);
  auto* verify = app.add_subcommand("verify", "re-check a trace against its patterns");
  common(verify, false);
  verify->add_option("--trace", trace_path, "trace.json")->required()->check(CLI::ExistingFile);
  verify->add_option("--pattern", patterns, "pattern file per component, in order")->check(CLI::ExistingFile);
  verify->add_option("--verify-exhaustive-limit", limit, "largest level size for full tuple enumeration");
  auto* dimension = app.add_subcommand("dimension", "box counts and slope fit for a trace");
  common(dimension, false);
  dimension->add_option("--trace", trace_path, "trace.json")->required()->check(CLI::ExistingFile);
  auto* demo = app.add_subcommand("demo", "sumset or isosceles application");
  common(demo, false);
  demo->add_option("name", demo_name, "sumset | isosceles");
  demo->add_option("--demo", demo_name, "sumset | isosceles");
  auto* plot = app.add_subcommand("export-plot", "CSV series for plotting");
  common(plot, false);
  plot->add_option("--trace", trace_path, "trace.json")->required()->check(CLI::ExistingFile);
  plot->add_option("--measure", measure_path, "measure.json")->required()->check(CLI::ExistingFile);
  plot->add_option("--epsilon", eps, "exponent slack of the Frostman ratio");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int r = app.exit(e);
    return r == 0 ? kOk : kConfig;
  }
  auto* active = app.get_subcommands().front();
  if (active->count("--seed")) c.seed = seed;
  if (active->count("--max-k")) c.max_k = max_k;
  if (active->count("--levels")) c.levels = levels;

  if (active == construct) return cmd_construct(c);
  if (active == verify) return cmd_verify(trace_path, c, patterns, limit);
  if (active == dimension) return cmd_dimension(trace_path, c);
  if (active == demo) return cmd_demo(demo_name, c);
  return cmd_export_plot(trace_path, measure_path, eps, c);
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return run(argc, argv);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kConfig;
  } catch (const PreconditionError& e) {
    std::cerr << "invalid input: " << e.what() << "\n";
    return kConfig;
  } catch (const HypothesisError& e) {
    std::cerr << "hypothesis failed: " << e.what() << "\n";
    return kHypothesis;
  } catch (const ScaleBudgetError& e) {
    std::cerr << "scale budget exhausted: " << e.what() << "\n";
    return kScale;
  } catch (const BudgetError& e) {
    std::cerr << "cube budget exhausted: " << e.what() << "\n";
    return kScale;
  } catch (const ResampleError& e) {
    std::cerr << "resampling failed: " << e.what() << "\n";
    return kResample;
  } catch (const FormatError& e) {
    std::cerr << "malformed input: " << e.what() << "\n";
    return kInput;
  } catch (const IntegrityError& e) {
    std::cerr << "integrity error: " << e.what() << "\n";
    return kInput;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return kInternal;
  }
}
