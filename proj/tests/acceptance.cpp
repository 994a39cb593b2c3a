// Acceptance suite: one pass/fail line per criterion.
//
// Usage: acceptance [--criterion N] [--data DIR] [--seed S]
// Runs all ten criteria when no --criterion is given; exits nonzero if any
// executed criterion fails.

#include <cstdio>
#include <cstring>
#include <string>

#include "grouprl/verify.hpp"

int main(int argc, char** argv) {
  int criterion = 0;
  grouprl::verify::Options opts;
  opts.data_dir = GROUPRL_DATA_DIR;
  for (int i = 1; i < argc; ++i) {
    if (!std::strcmp(argv[i], "--criterion") && i + 1 < argc) criterion = std::atoi(argv[++i]);
    else if (!std::strcmp(argv[i], "--data") && i + 1 < argc) opts.data_dir = argv[++i];
    else if (!std::strcmp(argv[i], "--seed") && i + 1 < argc) opts.seed = std::strtoull(argv[++i], nullptr, 10);
    else {
      std::fprintf(stderr, "usage: acceptance [--criterion N] [--data DIR] [--seed S]\n");
      return 2;
    }
  }
  int failures = 0;
  const auto emit = [&](const grouprl::verify::CheckResult& r) {
    std::printf("%-44s %s  %s\n", r.name.c_str(), r.pass ? "PASS" : "FAIL", r.detail.c_str());
    std::fflush(stdout);
    if (!r.pass) ++failures;
  };
  try {
    if (criterion != 0) {
      for (const auto& r : grouprl::verify::acceptance_criterion(criterion, opts)) emit(r);
    } else {
      for (int k = 1; k <= 10; ++k)
        for (const auto& r : grouprl::verify::acceptance_criterion(k, opts)) emit(r);
    }
  } catch (const std::exception& e) {
    std::fprintf(stderr, "acceptance run aborted: %s\n", e.what());
    return 2;
  }
  return failures == 0 ? 0 : 1;
}
