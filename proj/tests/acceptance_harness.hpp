#pragma once

#include <cstdio>
#include <functional>
#include <string>
#include <vector>

// Tiny check harness for the acceptance binaries: one pass/fail line per
// criterion, nonzero exit if anything failed.
namespace acceptance {

struct Runner {
  int failures = 0;
  int passes = 0;

  void criterion(const std::string& name, const std::function<bool()>& body) {
    bool ok = false;
    std::string detail;
    try {
      ok = body();
    } catch (const std::exception& e) {
      detail = std::string(" (exception: ") + e.what() + ")";
    }
    if (ok) {
      ++passes;
      std::printf("[PASS] %s\n", name.c_str());
    } else {
      ++failures;
      std::printf("[FAIL] %s%s\n", name.c_str(), detail.c_str());
    }
    std::fflush(stdout);
  }

  int finish() const {
    std::printf("%d criteria passed, %d failed\n", passes, failures);
    return failures == 0 ? 0 : 1;
  }
};

}  // namespace acceptance
