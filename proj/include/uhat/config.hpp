#pragma once

#include <cstdint>

namespace uhat {

// Integers range over [lo, hi] in every solver query.
struct Domain {
  int64_t lo = -8;
  int64_t hi = 8;
  int64_t size() const { return hi - lo + 1; }
};

struct Config {
  Domain domain;
  int maxBranches = 64;
  int starBound = 2;
  int maxRefineSteps = 500;
  int maxCandidates = 3;
  double timeoutSec = 180.0;
  int unrollBound = 2;
  int assumeRetries = 1000;
  int witnessPool = 4096;
  int64_t stepBudget = 100000;
  uint64_t seed = 0;
};

}  // namespace uhat
