// Run configuration documents: JSON text with a schemaVersion field, parsed
// with the source line of every value kept so schema errors can name it.
#pragma once

#include <algorithm>
#include <cctype>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "fracineq/report.hpp"
#include "fracineq/support.hpp"

namespace fracineq {

inline constexpr int kSchemaVersion = 1;

/// A configuration problem located at a JSON pointer; `line` is 0 when the
/// value did not come from a file.
class ConfigError : public std::runtime_error {
 public:
  ConfigError(std::string where, int line, const std::string& msg)
      : std::runtime_error(msg), pointer_(std::move(where)), line_(line) {}

  const std::string& pointer() const noexcept { return pointer_; }
  int line() const noexcept { return line_; }

 private:
  std::string pointer_;
  int line_;
};

namespace detail {

/// Records the starting line of each value by JSON pointer. Runs over text
/// that nlohmann has already accepted, so it only has to track structure.
class LineIndexer {
 public:
  explicit LineIndexer(const std::string& text) : s_(text) {}

  std::map<std::string, int> run() {
    skip_ws();
    value("");
    return std::move(lines_);
  }

 private:
  void skip_ws() {
    while (i_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[i_]))) {
      if (s_[i_] == '\n') ++line_;
      ++i_;
    }
  }

  std::string string_token() {
    std::string out;
    ++i_;
    while (i_ < s_.size() && s_[i_] != '"') {
      if (s_[i_] == '\\') {
        out += s_[i_++];
      }
      out += s_[i_++];
    }
    ++i_;
    return out;
  }

  static std::string escape(const std::string& key) {
    std::string out;
    for (char c : key) {
      if (c == '~')
        out += "~0";
      else if (c == '/')
        out += "~1";
      else
        out += c;
    }
    return out;
  }

  void value(const std::string& ptr) {
    lines_[ptr] = line_;
    if (i_ >= s_.size()) return;
    const char c = s_[i_];
    if (c == '{') {
      ++i_;
      skip_ws();
      while (i_ < s_.size() && s_[i_] != '}') {
        const std::string key = string_token();
        skip_ws();
        ++i_;  // ':'
        skip_ws();
        value(ptr + "/" + escape(key));
        skip_ws();
        if (s_[i_] == ',') ++i_;
        skip_ws();
      }
      ++i_;
    } else if (c == '[') {
      ++i_;
      skip_ws();
      for (std::size_t k = 0; i_ < s_.size() && s_[i_] != ']'; ++k) {
        value(ptr + "/" + std::to_string(k));
        skip_ws();
        if (s_[i_] == ',') ++i_;
        skip_ws();
      }
      ++i_;
    } else if (c == '"') {
      string_token();
    } else {
      while (i_ < s_.size() && s_[i_] != ',' && s_[i_] != '}' && s_[i_] != ']' &&
             !std::isspace(static_cast<unsigned char>(s_[i_])))
        ++i_;
    }
  }

  const std::string& s_;
  std::size_t i_ = 0;
  int line_ = 1;
  std::map<std::string, int> lines_;
};

}  // namespace detail

/// Parsed configuration plus a pointer-to-line table.
class ConfigDocument {
 public:
  ConfigDocument() = default;

  static ConfigDocument parse(const std::string& text, std::string source = "<config>") {
    ConfigDocument doc;
    doc.source_ = std::move(source);
    try {
      doc.root_ = json::parse(text);
    } catch (const json::parse_error& e) {
      // nlohmann reports a byte offset; convert it to a line.
      const std::size_t upto = std::min<std::size_t>(e.byte, text.size());
      const int line = 1 + static_cast<int>(std::count(text.begin(), text.begin() + static_cast<long>(upto), '\n'));
      throw ConfigError("", line, "malformed JSON: " + std::string(e.what()));
    }
    doc.lines_ = detail::LineIndexer(text).run();
    if (!doc.root_.is_object()) throw ConfigError("", 1, "configuration must be a JSON object");
    return doc;
  }

  static ConfigDocument load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("", 0, "cannot open config file '" + path + "'");
    std::stringstream ss;
    ss << in.rdbuf();
    return parse(ss.str(), path);
  }

  /// An in-memory document without line information.
  static ConfigDocument from_json(json j, std::string source = "<config>") {
    ConfigDocument doc;
    doc.root_ = std::move(j);
    doc.source_ = std::move(source);
    return doc;
  }

  const json& root() const noexcept { return root_; }
  json& root() noexcept { return root_; }
  const std::string& source() const noexcept { return source_; }

  /// Line of the value at `ptr`, or of its nearest recorded ancestor.
  int line_of(std::string ptr) const {
    while (true) {
      if (auto it = lines_.find(ptr); it != lines_.end()) return it->second;
      if (ptr.empty()) return 0;
      ptr.erase(ptr.rfind('/'));
    }
  }

  [[noreturn]] void fail(const std::string& ptr, const std::string& msg) const {
    throw ConfigError(ptr, line_of(ptr), msg);
  }

  bool has(const std::string& ptr) const { return root_.contains(json::json_pointer(ptr)); }

  const json& at(const std::string& ptr) const {
    const json::json_pointer jp(ptr);
    if (!root_.contains(jp)) fail(ptr, "missing required field '" + ptr + "'");
    return root_.at(jp);
  }

  template <class T>
  T get(const std::string& ptr) const {
    const json& v = at(ptr);
    try {
      return v.get<T>();
    } catch (const json::exception&) {
      fail(ptr, "field '" + ptr + "' has the wrong type (" + std::string(v.type_name()) + ")");
    }
  }

  template <class T>
  T get_or(const std::string& ptr, T fallback) const {
    return has(ptr) ? get<T>(ptr) : fallback;
  }

  /// Runs `fn`, turning std::invalid_argument / std::domain_error / json
  /// errors into a ConfigError at `ptr`.
  template <class Fn>
  auto guard(const std::string& ptr, Fn&& fn) const -> decltype(fn()) {
    try {
      return fn();
    } catch (const ConfigError&) {
      throw;
    } catch (const std::invalid_argument& e) {
      fail(ptr, e.what());
    } catch (const std::domain_error& e) {
      fail(ptr, e.what());
    } catch (const json::exception& e) {
      fail(ptr, e.what());
    }
  }

  /// Checks schemaVersion.
  void require_schema() const {
    if (!has("/schemaVersion")) fail("", "missing 'schemaVersion'");
    const int v = get<int>("/schemaVersion");
    if (v != kSchemaVersion)
      fail("/schemaVersion", "unsupported schemaVersion " + std::to_string(v) + " (expected " +
                                 std::to_string(kSchemaVersion) + ")");
  }

 private:
  json root_ = json::object();
  std::string source_;
  std::map<std::string, int> lines_;
};

/// "file:line: message (at /pointer)".
inline std::string format_config_error(const ConfigError& e, const std::string& source) {
  std::string out = source;
  if (e.line() > 0) out += ":" + std::to_string(e.line());
  out += ": ";
  out += e.what();
  if (!e.pointer().empty()) out += " (at " + e.pointer() + ")";
  return out;
}

/// SHA-256 of the compact dump; nlohmann objects keep keys sorted, so equal
/// documents hash equally whatever their formatting.
inline std::string config_digest(const json& j) { return sha256_hex(j.dump()); }

}  // namespace fracineq
