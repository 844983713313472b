// Inequality reports shared by every checker.
#pragma once

#include <cmath>
#include <optional>
#include <string>

#include "json.hpp"

namespace fracineq {

using json = nlohmann::json;

/// Both sides of one inequality instance. `margin` is signed so that
/// margin >= 0 means the inequality holds.
struct InequalityReport {
  std::string kind;
  double lhs = 0.0;
  double rhs = 0.0;
  double margin = 0.0;
  double tol = 0.0;
  bool equality = false;
  std::optional<double> std_error;
  json details = json::object();

  bool holds() const noexcept {
    const double slack = std_error ? std::max(tol, 3.0 * *std_error) : tol;
    return margin >= -slack;
  }

  friend bool operator==(const InequalityReport&, const InequalityReport&) = default;
};

inline InequalityReport make_report(std::string kind, double lhs, double rhs, double margin, double tol) {
  InequalityReport r;
  r.kind = std::move(kind);
  r.lhs = lhs;
  r.rhs = rhs;
  r.margin = margin;
  r.tol = tol;
  r.equality = std::abs(margin) < tol;
  return r;
}

inline constexpr const char* kReportCoreKeys[] = {"kind", "lhs", "rhs", "margin", "tol", "equality", "stdError"};

/// Core fields first, then the detail keys at the same level.
inline void to_json(json& j, const InequalityReport& r) {
  j = json::object();
  j["kind"] = r.kind;
  j["lhs"] = r.lhs;
  j["rhs"] = r.rhs;
  j["margin"] = r.margin;
  j["tol"] = r.tol;
  j["equality"] = r.equality;
  if (r.std_error) j["stdError"] = *r.std_error;
  for (const auto& [k, v] : r.details.items()) j[k] = v;
}

inline void from_json(const json& j, InequalityReport& r) {
  r.kind = j.at("kind").get<std::string>();
  r.lhs = j.at("lhs").get<double>();
  r.rhs = j.at("rhs").get<double>();
  r.margin = j.at("margin").get<double>();
  r.tol = j.at("tol").get<double>();
  r.equality = j.at("equality").get<bool>();
  r.std_error = j.contains("stdError") ? std::optional<double>(j.at("stdError").get<double>()) : std::nullopt;
  r.details = json::object();
  for (const auto& [k, v] : j.items()) {
    bool core = false;
    for (const char* c : kReportCoreKeys) core = core || k == c;
    if (!core) r.details[k] = v;
  }
}

}  // namespace fracineq
