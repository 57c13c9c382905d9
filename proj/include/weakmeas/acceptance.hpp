#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

namespace weakmeas::acceptance {

struct CriterionResult {
  int id = 0;
  std::string title;
  bool passed = false;
  std::vector<std::string> details;
  double seconds = 0.0;
};

struct Options {
  /// Worker threads for ensemble runs; 0 uses every hardware thread.
  unsigned threads = 0;
  std::uint64_t seed = 20261018;
  /// Restrict to these criterion ids; empty runs all ten.
  std::vector<int> only;
};

/// Reference system: s = (1, -1), alpha = (sqrt 0.8, sqrt 0.2), delta_p = 10.
std::vector<CriterionResult> run(
    const Options& options,
    const std::function<void(const CriterionResult&)>& on_result = {});

std::string format_line(const CriterionResult& result);

}  // namespace weakmeas::acceptance
