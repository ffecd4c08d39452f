#pragma once

#include <cstdint>
#include <vector>

#include "abcast/scenario.hpp"

namespace abcast::harness {

struct FuzzResult {
  std::uint64_t seed = 0;
  Time gst = 0;
  std::vector<CheckReport> reports;

  bool passed() const { return all_passed(reports); }
};

/// Runs seeds [first, last] of a template on up to `jobs` threads. Results
/// come back sorted by seed whatever the thread count.
std::vector<FuzzResult> fuzz(const Scenario& tmpl, std::uint64_t first, std::uint64_t last,
                             unsigned jobs = 1);

}  // namespace abcast::harness
