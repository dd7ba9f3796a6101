#pragma once

#include "cocycle/report.hpp"

#include <CLI11.hpp>

#include <cstdint>
#include <fstream>
#include <functional>
#include <iostream>
#include <optional>
#include <stdexcept>
#include <string>

namespace cocycle::cli {

struct GlobalOptions {
  std::uint64_t seed = 1;
  std::string out;
  bool json = false;
  std::optional<double> tolerance;

  double tolerance_or(double fallback) const { return tolerance ? *tolerance : fallback; }
};

using Runner = std::function<int(const GlobalOptions&)>;

Runner add_blocks(CLI::App& app);
Runner add_odometer(CLI::App& app);
Runner add_rotation(CLI::App& app);
Runner add_evc(CLI::App& app);
Runner add_maharam(CLI::App& app);

/// Raised for inputs that violate a module precondition; maps to the usage exit code.
struct UsageError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

inline void stamp(Report& r, const GlobalOptions& g) {
  r.provenance()["seed"] = g.seed;
  if (g.tolerance) r.provenance()["tolerance"] = *g.tolerance;
}

/// Writes the report where requested; exit 0 iff every verdict passed.
inline int emit(const GlobalOptions& g, const Report& r) {
  if (!g.out.empty()) {
    std::ofstream f(g.out);
    if (!f) throw std::runtime_error("cannot write report to " + g.out);
    f << r.json().dump(2) << '\n';
  }
  if (g.json) {
    std::cout << r.json().dump(2) << '\n';
  } else {
    r.write_summary(std::cout);
  }
  return r.all_pass() ? 0 : 1;
}

inline std::ofstream open_csv(const std::string& path) {
  std::ofstream f(path);
  if (!f) throw std::runtime_error("cannot write " + path);
  return f;
}

}  // namespace cocycle::cli
