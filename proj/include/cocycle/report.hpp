#pragma once

// Machine-readable run reports.  Keys keep insertion order and nothing time-dependent is
// recorded, so identical inputs give byte-identical output.

#include "cocycle/rational.hpp"

#include <json.hpp>

#include <ostream>
#include <string>
#include <utility>

namespace cocycle {

using Json = nlohmann::ordered_json;

inline constexpr const char* tool_version = "0.1.0";

/// Exact rationals travel as "num/den" strings.
inline Json exact_json(const Rational& r) { return to_fraction_string(r); }

class Report {
 public:
  explicit Report(std::string subcommand) {
    root_["subcommand"] = std::move(subcommand);
    root_["provenance"] = Json::object();
    root_["provenance"]["tool"] = "cocycle";
    root_["provenance"]["version"] = tool_version;
    root_["verdicts"] = Json::array();
    root_["data"] = Json::object();
  }

  Json& provenance() { return root_["provenance"]; }
  Json& data() { return root_["data"]; }
  const Json& json() const { return root_; }

  /// Records `lhs relation rhs` for the named property; both sides are kept.
  void verdict(const std::string& name, const std::string& property, bool pass, Json lhs, const std::string& relation,
               Json rhs, Json extra = Json()) {
    Json v;
    v["name"] = name;
    v["property"] = property;
    v["pass"] = pass;
    v["lhs"] = std::move(lhs);
    v["relation"] = relation;
    v["rhs"] = std::move(rhs);
    if (!extra.is_null()) v["detail"] = std::move(extra);
    root_["verdicts"].push_back(std::move(v));
    all_pass_ = all_pass_ && pass;
  }

  /// A check that could not run at this size; recorded, not counted as a failure.
  void skipped(const std::string& name, const std::string& property, const std::string& reason) {
    Json v;
    v["name"] = name;
    v["property"] = property;
    v["skipped"] = reason;
    root_["verdicts"].push_back(std::move(v));
  }

  bool all_pass() const { return all_pass_; }

  void write_summary(std::ostream& os) const {
    for (const auto& v : root_["verdicts"]) {
      if (v.contains("skipped")) {
        os << "SKIP " << v["name"].get<std::string>() << ": " << v["skipped"].get<std::string>() << '\n';
        continue;
      }
      os << (v["pass"].get<bool>() ? "PASS " : "FAIL ") << v["name"].get<std::string>() << "  ["
         << v["property"].get<std::string>() << "]  " << v["lhs"].dump() << ' ' << v["relation"].get<std::string>()
         << ' ' << v["rhs"].dump() << '\n';
    }
    os << (all_pass_ ? "all checks passed" : "some checks FAILED") << '\n';
  }

 private:
  Json root_;
  bool all_pass_ = true;
};

}  // namespace cocycle
