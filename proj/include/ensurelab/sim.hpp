#pragma once

#include <cstdint>
#include <vector>

#include "ensurelab/core.hpp"
#include "ensurelab/oracle.hpp"
#include "ensurelab/sets.hpp"

namespace pp::sim {

struct Trace {
  std::vector<Config> configs;  // configs[0] is the start; one per step after
  std::vector<int> steps;       // indices into the protocol's transitions
};

// Random scheduler: each step picks uniformly among (transition, ordered
// agent pair) options. Stops at maxSteps or when nothing is enabled.
// Deterministic per seed.
Trace run(const Protocol& p, const Config& c0, std::uint64_t seed,
          long long maxSteps);

struct SizeStats {
  long long size = 0;
  int runs = 0;
  int converged = 0;     // runs reaching an ensuring configuration
  double meanSteps = 0;  // over converged runs
  long long p50 = 0, p90 = 0, maxSteps = 0;
};

struct ConvergenceReport {
  std::vector<SizeStats> perSize;
};

// Seeded runs from random input configurations of each size, measuring
// steps until the current configuration ensures the condition (detected
// with a shared cached oracle). Runs hitting maxSteps first count as
// unconverged, never as refutations.
ConvergenceReport ensure_convergence_stats(const Protocol& p,
                                           const oracle::OutputPredicate& cond,
                                           const std::vector<long long>& sizes,
                                           int runsPerSize, std::uint64_t seed,
                                           long long maxSteps,
                                           long long budget = 0);
ConvergenceReport ensure_convergence_stats(const Protocol& p,
                                           const sets::CountingSet& cond,
                                           const std::vector<long long>& sizes,
                                           int runsPerSize, std::uint64_t seed,
                                           long long maxSteps,
                                           long long budget = 0);
ConvergenceReport ensure_convergence_stats(const Protocol& p,
                                           const sets::SemilinearSet& cond,
                                           const std::vector<long long>& sizes,
                                           int runsPerSize, std::uint64_t seed,
                                           long long maxSteps,
                                           long long budget = 0);

}  // namespace pp::sim
