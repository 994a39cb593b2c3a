#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

namespace grouprl::verify {

struct CheckResult {
  std::string name;
  bool pass = false;
  std::string detail;
};

struct Options {
  bool full = false;
  std::string data_dir = "data";
  std::uint64_t seed = 1;
};

using Progress = std::function<void(const CheckResult&)>;

/// Runs the named invariant suites (fast set, plus the long checks when full).
std::vector<CheckResult> run_suite(const Options& opts, const Progress& progress = nullptr);

/// Runs one acceptance criterion (1-10); used by the acceptance test binary
/// and by the full verification level.
std::vector<CheckResult> acceptance_criterion(int criterion, const Options& opts,
                                              const Progress& progress = nullptr);

}  // namespace grouprl::verify
