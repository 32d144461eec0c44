#include "pavoid/serialize.hpp"

#include <openssl/evp.h>

#include <charconv>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <memory>
#include <ostream>
#include <sstream>

namespace pavoid {

namespace {

using nlohmann::json;

// Buffered writer; std::ostream formatting is far too slow for 10^7 integers.
class Sink {
 public:
  explicit Sink(std::ostream& out) : out_(out) { buf_.reserve(kChunk + 64); }
  ~Sink() { flush(); }
  Sink& raw(std::string_view s) {
    buf_.append(s);
    spill();
    return *this;
  }
  Sink& ch(char c) {
    buf_.push_back(c);
    return *this;
  }
  Sink& num(long long v) {
    char tmp[24];
    auto res = std::to_chars(tmp, tmp + sizeof tmp, v);
    buf_.append(tmp, res.ptr);
    spill();
    return *this;
  }
  Sink& unum(unsigned long long v) {
    char tmp[24];
    auto res = std::to_chars(tmp, tmp + sizeof tmp, v);
    buf_.append(tmp, res.ptr);
    spill();
    return *this;
  }
  Sink& str(const std::string& s) { return raw(json(s).dump()); }
  void flush() {
    out_.write(buf_.data(), static_cast<std::streamsize>(buf_.size()));
    buf_.clear();
  }

 private:
  static constexpr std::size_t kChunk = 1 << 20;
  void spill() {
    if (buf_.size() >= kChunk) flush();
  }
  std::ostream& out_;
  std::string buf_;
};

void index_row(Sink& s, IndexSpan row) {
  s.ch('[');
  for (std::size_t j = 0; j < row.size(); ++j) {
    if (j) s.ch(',');
    s.num(row[j]);
  }
  s.ch(']');
}

void cubeset_into(Sink& s, const CubeSet& c) {
  s.raw("{\"dim\":").num(c.dim()).raw(",\"k\":").num(c.scale().exponent()).raw(",\"indices\":[");
  for (std::size_t i = 0; i < c.size(); ++i) {
    if (i) s.ch(',');
    index_row(s, c[i]);
  }
  s.raw("]}");
}

const json& field(const json& obj, const char* name) {
  if (!obj.is_object() || !obj.contains(name)) throw FormatError(std::string("missing field \"") + name + "\"");
  return obj.at(name);
}

template <class T>
T get_as(const json& obj, const char* name) {
  try {
    return field(obj, name).get<T>();
  } catch (const json::exception& e) {
    throw FormatError(std::string("field \"") + name + "\" has the wrong type: " + e.what());
  }
}

Rational parse_rational(const std::string& s) {
  Rational q;
  if (s.empty() || q.set_str(s, 10) != 0) throw FormatError("not a rational number: \"" + s + "\"");
  if (q.get_den() == 0) throw FormatError("zero denominator in \"" + s + "\"");
  q.canonicalize();
  return q;
}

BigInt parse_big(const std::string& s) {
  BigInt v;
  if (s.empty() || v.set_str(s, 10) != 0) throw FormatError("not an integer: \"" + s + "\"");
  return v;
}

CubeSet checked_cubeset(int dim, int k, BulkArray& arr) {
  if (dim < 1 || dim > kMaxDim) throw FormatError("cube set dimension out of range");
  if (k < 0 || k > kMaxExponent) throw FormatError("cube set exponent out of range");
  if (arr.rows > 0 && arr.width != static_cast<std::size_t>(dim)) throw FormatError("index rows do not match dim");
  if (!arr.tag.empty()) throw FormatError("unexpected tagged rows in indices");
  const Index side = Index{1} << k;
  for (Index v : arr.flat)
    if (v < 0 || v >= side) throw FormatError("index outside the grid at exponent " + std::to_string(k));
  const std::size_t ud = static_cast<std::size_t>(dim);
  for (std::size_t i = 1; i < arr.rows; ++i)
    if (compare_index(IndexSpan(arr.flat.data() + (i - 1) * ud, ud), IndexSpan(arr.flat.data() + i * ud, ud)) >= 0)
      throw FormatError("indices are not strictly increasing in lexicographic order");
  return CubeSet::from_sorted_unique(dim, DyadicScale(k), std::move(arr.flat));
}

}  // namespace

std::string format_double(double v) {
  if (!std::isfinite(v)) throw PreconditionError("cannot serialize a non-finite number");
  char tmp[40];
  auto res = std::to_chars(tmp, tmp + sizeof tmp, v);
  return std::string(tmp, res.ptr);
}

void write_cubeset(std::ostream& out, const CubeSet& s) {
  Sink sink(out);
  cubeset_into(sink, s);
}

std::string cubeset_json(const CubeSet& s) {
  std::ostringstream out;
  write_cubeset(out, s);
  return out.str();
}

CubeSet cubeset_from(BulkDocument& doc, const json& obj) {
  return checked_cubeset(get_as<int>(obj, "dim"), get_as<int>(obj, "k"), doc.array_at(field(obj, "indices")));
}

CubeSet read_cubeset(std::istream& in) {
  auto doc = read_bulk_json(in);
  return cubeset_from(doc, doc.dom);
}

void write_avoidance(std::ostream& out, const AvoidanceResult& res) {
  Sink s(out);
  s.raw("{\"r_exp\":").num(res.r.exponent()).raw(",\"F\":");
  cubeset_into(s, res.F);
  s.raw(",\"conflicts\":").unum(res.conflicts).raw(",\"attempts\":").num(res.attempts).raw(",\"seed\":").unum(res.seed).raw("}\n");
}

void write_trace(std::ostream& out, const ConstructionTrace& t) {
  Sink s(out);
  s.raw("{\"format\":\"pavoid-trace/1\",\"d\":").num(t.d).raw(",\"n\":").num(t.n);
  s.raw(",\"alpha\":").raw(format_double(t.alpha)).raw(",\"seed\":").unum(t.seed);
  s.raw(",\"trivial\":").raw(t.trivial ? "true" : "false");
  s.raw(",\"requested_levels\":").num(t.requested_levels);
  s.raw(",\"r_bound_constant\":").num(kRBoundConstant);
  s.raw(",\"stop_code\":").num(t.stop_code).raw(",\"stop_reason\":").str(t.stop_reason);
  s.raw(",\"levels\":[");
  for (std::size_t i = 0; i < t.levels.size(); ++i) {
    const auto& lv = t.levels[i];
    const auto& e = lv.entry;
    const auto& c = lv.cert;
    if (i) s.ch(',');
    s.raw("\n{\"level\":").num(e.level).raw(",\"pattern_index\":").num(e.pattern_index);
    s.raw(",\"epsilon\":").str(e.epsilon.get_str()).raw(",\"l_exp\":").num(e.l.exponent()).raw(",\"r_exp\":").num(e.r.exponent());
    s.raw(",\"pattern_count\":").str(e.pattern_count.get_str());
    s.raw(",\"certificate\":{");
    s.raw("\"scales_ordered\":").raw(c.scales_ordered ? "true" : "false");
    s.raw(",\"r_bound\":").raw(c.r_bound ? "true" : "false");
    s.raw(",\"large_size\":").raw(c.large_size ? "true" : "false");
    s.raw(",\"non_concentration\":").raw(c.non_concentration ? "true" : "false");
    s.raw(",\"avoidance\":").raw(c.avoidance ? "true" : "false");
    s.raw(",\"nested\":").raw(c.nested ? "true" : "false");
    s.raw(",\"min_per_parent\":").unum(c.min_per_parent).raw(",\"worst_cell_count\":").unum(c.worst_cell_count);
    s.raw(",\"conflicts\":").unum(c.conflicts).raw(",\"attempts\":").num(c.attempts).raw(",\"draw_seed\":").unum(c.draw_seed);
    s.raw("},\"X\":");
    cubeset_into(s, lv.X);
    s.ch('}');
  }
  s.raw("]}\n");
}

ConstructionTrace read_trace(std::istream& in) {
  auto doc = read_bulk_json(in);
  const json& root = doc.dom;
  if (get_as<std::string>(root, "format") != "pavoid-trace/1") throw FormatError("not a construction trace");
  ConstructionTrace t;
  t.d = get_as<int>(root, "d");
  t.n = get_as<int>(root, "n");
  t.alpha = get_as<double>(root, "alpha");
  t.seed = get_as<std::uint64_t>(root, "seed");
  t.trivial = get_as<bool>(root, "trivial");
  t.requested_levels = get_as<int>(root, "requested_levels");
  t.stop_code = get_as<int>(root, "stop_code");
  t.stop_reason = get_as<std::string>(root, "stop_reason");
  if (t.d < 1 || t.n < 2 || t.d * t.n > kMaxDim) throw FormatError("trace has invalid d or n");
  for (const json& lv : field(root, "levels")) {
    LevelRecord rec;
    rec.entry.level = get_as<int>(lv, "level");
    rec.entry.pattern_index = get_as<int>(lv, "pattern_index");
    rec.entry.epsilon = parse_rational(get_as<std::string>(lv, "epsilon"));
    const int l = get_as<int>(lv, "l_exp"), r = get_as<int>(lv, "r_exp");
    if (l < 0 || l > kMaxExponent || r < 0 || r > kMaxExponent) throw FormatError("level exponents out of range");
    rec.entry.l = DyadicScale(l);
    rec.entry.r = DyadicScale(r);
    rec.entry.pattern_count = parse_big(get_as<std::string>(lv, "pattern_count"));
    const json& c = field(lv, "certificate");
    rec.cert.scales_ordered = get_as<bool>(c, "scales_ordered");
    rec.cert.r_bound = get_as<bool>(c, "r_bound");
    rec.cert.large_size = get_as<bool>(c, "large_size");
    rec.cert.non_concentration = get_as<bool>(c, "non_concentration");
    rec.cert.avoidance = get_as<bool>(c, "avoidance");
    rec.cert.nested = get_as<bool>(c, "nested");
    rec.cert.min_per_parent = get_as<std::size_t>(c, "min_per_parent");
    rec.cert.worst_cell_count = get_as<std::size_t>(c, "worst_cell_count");
    rec.cert.conflicts = get_as<std::size_t>(c, "conflicts");
    rec.cert.attempts = get_as<int>(c, "attempts");
    rec.cert.draw_seed = get_as<std::uint64_t>(c, "draw_seed");
    rec.X = cubeset_from(doc, field(lv, "X"));
    if (rec.X.dim() != t.d || rec.X.scale() != rec.entry.l) throw FormatError("level set disagrees with the level's d or scale");
    t.levels.push_back(std::move(rec));
  }
  return t;
}

void write_measure(std::ostream& out, const MeasureTree& tree) {
  Sink s(out);
  s.raw("{\"format\":\"pavoid-measure/1\",\"d\":").num(tree.d).raw(",\"levels\":[");
  for (std::size_t i = 0; i < tree.levels.size(); ++i) {
    const auto& lv = tree.levels[i];
    if (i) s.ch(',');
    s.raw("\n{\"level\":").unum(i + 1).raw(",\"k\":").num(lv.scale.exponent()).raw(",\"masses\":[");
    std::vector<std::string> num(lv.class_mass.size()), den(num.size());
    for (std::size_t c = 0; c < num.size(); ++c) {
      num[c] = json(lv.class_mass[c].get_num().get_str()).dump();
      den[c] = json(lv.class_mass[c].get_den().get_str()).dump();
    }
    for (std::size_t j = 0; j < lv.cubes.size(); ++j) {
      if (j) s.ch(',');
      s.ch('[');
      index_row(s, lv.cubes[j]);
      s.ch(',').raw(num[lv.mass_class[j]]).ch(',').raw(den[lv.mass_class[j]]).ch(']');
    }
    s.raw("]}");
  }
  s.raw("]}\n");
}

MeasureTree read_measure(std::istream& in) {
  auto doc = read_bulk_json(in);
  const json& root = doc.dom;
  if (get_as<std::string>(root, "format") != "pavoid-measure/1") throw FormatError("not a measure tree");
  MeasureTree tree;
  tree.d = get_as<int>(root, "d");
  if (tree.d < 1 || tree.d > kMaxDim) throw FormatError("measure has invalid d");
  for (const json& lv : field(root, "levels")) {
    const int k = get_as<int>(lv, "k");
    BulkArray& arr = doc.array_at(field(lv, "masses"));
    if (arr.rows > 0 && arr.tag.size() != arr.rows) throw FormatError("mass rows need numerator and denominator");
    MeasureLevel out;
    out.class_mass.reserve(arr.tags.size());
    for (const auto& [n, d] : arr.tags) {
      Rational q(parse_big(n), parse_big(d));
      if (q.get_den() <= 0) throw FormatError("mass with a non-positive denominator");
      q.canonicalize();
      if (q < 0) throw FormatError("negative mass");
      out.class_mass.push_back(q);
    }
    out.mass_class = std::move(arr.tag);
    BulkArray idx;
    idx.rows = arr.rows;
    idx.width = arr.width;
    idx.flat = std::move(arr.flat);
    out.cubes = checked_cubeset(tree.d, k, idx);
    out.scale = DyadicScale(k);
    tree.levels.push_back(std::move(out));
  }
  return tree;
}

std::string sha256_hex(const std::string& bytes) {
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (!EVP_Digest(bytes.data(), bytes.size(), md, &len, EVP_sha256(), nullptr)) throw std::runtime_error("sha256 failed");
  std::ostringstream out;
  for (unsigned int i = 0; i < len; ++i) out << std::hex << std::setw(2) << std::setfill('0') << static_cast<int>(md[i]);
  return out.str();
}

std::string sha256_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError("cannot open " + path.string());
  std::unique_ptr<EVP_MD_CTX, decltype(&EVP_MD_CTX_free)> ctx(EVP_MD_CTX_new(), EVP_MD_CTX_free);
  if (!ctx || !EVP_DigestInit_ex(ctx.get(), EVP_sha256(), nullptr)) throw std::runtime_error("sha256 init failed");
  std::vector<char> buf(1 << 20);
  while (in) {
    in.read(buf.data(), static_cast<std::streamsize>(buf.size()));
    if (in.gcount() > 0) EVP_DigestUpdate(ctx.get(), buf.data(), static_cast<std::size_t>(in.gcount()));
  }
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  EVP_DigestFinal_ex(ctx.get(), md, &len);
  std::ostringstream out;
  for (unsigned int i = 0; i < len; ++i) out << std::hex << std::setw(2) << std::setfill('0') << static_cast<int>(md[i]);
  return out.str();
}

void add_outputs(RunManifest& m, const std::filesystem::path& dir, const std::vector<std::string>& files) {
  for (const auto& f : files) {
    const auto p = dir / f;
    m.outputs.push_back({f, sha256_file(p), std::filesystem::file_size(p)});
  }
}

std::string manifest_json(const RunManifest& m, bool with_timings) {
  json j = json::object();
  j["tool"] = "pavoid";
  j["version"] = kToolVersion;
  j["command"] = m.command;
  j["config_sha256"] = m.config_sha256;
  j["seed"] = m.seed;
  j["exit_code"] = m.exit_code;
  json outs = json::array();
  for (const auto& o : m.outputs) outs.push_back({{"file", o.file}, {"sha256", o.sha256}, {"bytes", o.bytes}});
  j["outputs"] = outs;
  if (with_timings) {
    json t = json::object();
    for (const auto& [k, v] : m.timings_ms) t[k] = std::round(v * 1000.0) / 1000.0;
    j["timings_ms"] = t;
  }
  return j.dump(2) + "\n";
}

}  // namespace pavoid
