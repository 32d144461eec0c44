#include "pavoid/json_stream.hpp"

#include <limits>
#include <map>

namespace pavoid {

namespace {

using nlohmann::json;

class BulkSax {
 public:
  explicit BulkSax(BulkDocument& doc) : doc_(doc) {}

  bool null() { return bulk_ ? fail("null inside a bulk array") : put(json(nullptr)); }
  bool boolean(bool v) { return bulk_ ? fail("boolean inside a bulk array") : put(json(v)); }
  bool number_integer(json::number_integer_t v) { return bulk_ ? push(v) : put(json(v)); }
  bool number_unsigned(json::number_unsigned_t v) {
    if (!bulk_) return put(json(v));
    if (v > static_cast<json::number_unsigned_t>(std::numeric_limits<Index>::max())) return fail("index out of range");
    return push(static_cast<Index>(v));
  }
  bool number_float(json::number_float_t v, const std::string&) {
    return bulk_ ? fail("non-integer inside a bulk array") : put(json(v));
  }
  bool string(std::string& v) {
    if (!bulk_) return put(json(v));
    if (depth_ != 2 || strings_.size() >= 2) return fail("unexpected string inside a bulk array");
    strings_.push_back(v);
    return true;
  }
  bool binary(json::binary_t&) { return fail("binary values are not supported"); }

  bool start_object(std::size_t) {
    if (bulk_) return fail("object inside a bulk array");
    json* slot = place(json::object());
    stack_.push_back(slot);
    return true;
  }
  bool key(std::string& k) {
    key_ = k;
    return true;
  }
  bool end_object() {
    stack_.pop_back();
    return true;
  }
  bool start_array(std::size_t) {
    if (bulk_) {
      ++depth_;
      if (depth_ == 2) {
        row_start_ = cur_->flat.size();
        strings_.clear();
      }
      if (depth_ > 3) return fail("bulk array nested too deeply");
      return true;
    }
    if (!stack_.empty() && stack_.back()->is_object() && (key_ == "indices" || key_ == "masses")) {
      bulk_ = true;
      depth_ = 1;
      doc_.bulk.emplace_back();
      cur_ = &doc_.bulk.back();
      put(json{{"$bulk", doc_.bulk.size() - 1}});
      return true;
    }
    json* slot = place(json::array());
    stack_.push_back(slot);
    return true;
  }
  bool end_array() {
    if (!bulk_) {
      stack_.pop_back();
      return true;
    }
    --depth_;
    if (depth_ == 1) return end_row();
    if (depth_ == 0) {
      bulk_ = false;
      cur_ = nullptr;
    }
    return true;
  }
  bool parse_error(std::size_t pos, const std::string&, const nlohmann::detail::exception& e) {
    throw FormatError("JSON parse error at byte " + std::to_string(pos) + ": " + e.what());
  }

 private:
  bool fail(const std::string& why) { throw FormatError("malformed bulk array: " + why); }

  bool push(Index v) {
    if (depth_ < 2) return fail("integer outside a row");
    cur_->flat.push_back(v);
    return true;
  }

  bool end_row() {
    const std::size_t w = cur_->flat.size() - row_start_;
    if (cur_->rows == 0) cur_->width = w;
    else if (w != cur_->width) return fail("rows of unequal width");
    const bool tagged = !strings_.empty();
    if (cur_->rows > 0 && tagged != !cur_->tag.empty()) return fail("tagged and untagged rows mixed");
    if (tagged) {
      if (strings_.size() != 2) return fail("tagged row needs exactly two strings");
      auto key = std::make_pair(strings_[0], strings_[1]);
      auto it = interned_.find(key);
      if (it == interned_.end()) {
        it = interned_.emplace(key, static_cast<std::uint32_t>(cur_->tags.size())).first;
        cur_->tags.push_back(key);
      }
      cur_->tag.push_back(it->second);
    }
    ++cur_->rows;
    return true;
  }

  json* place(json v) {
    if (stack_.empty()) {
      doc_.dom = std::move(v);
      return &doc_.dom;
    }
    json& parent = *stack_.back();
    if (parent.is_array()) {
      parent.push_back(std::move(v));
      return &parent.back();
    }
    json& slot = parent[key_];
    slot = std::move(v);
    return &slot;
  }
  bool put(json v) {
    place(std::move(v));
    return true;
  }

  BulkDocument& doc_;
  std::vector<json*> stack_;
  std::string key_;
  bool bulk_ = false;
  int depth_ = 0;
  BulkArray* cur_ = nullptr;
  std::size_t row_start_ = 0;
  std::vector<std::string> strings_;
  std::map<std::pair<std::string, std::string>, std::uint32_t> interned_;
};

}  // namespace

const BulkArray& BulkDocument::array_at(const nlohmann::json& placeholder) const {
  if (!placeholder.is_object() || !placeholder.contains("$bulk") || !placeholder["$bulk"].is_number_unsigned())
    throw FormatError("expected a streamed array");
  const std::size_t id = placeholder["$bulk"].get<std::size_t>();
  if (id >= bulk.size()) throw FormatError("dangling streamed array reference");
  return bulk[id];
}

BulkArray& BulkDocument::array_at(const nlohmann::json& placeholder) {
  return const_cast<BulkArray&>(std::as_const(*this).array_at(placeholder));
}

BulkDocument read_bulk_json(std::istream& in) {
  BulkDocument doc;
  BulkSax sax(doc);
  nlohmann::json::sax_parse(in, &sax);
  if (doc.dom.is_null() && doc.bulk.empty()) throw FormatError("empty JSON document");
  return doc;
}

}  // namespace pavoid
