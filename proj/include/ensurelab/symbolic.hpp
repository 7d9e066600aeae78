#pragma once

#include <optional>

#include "ensurelab/core.hpp"
#include "ensurelab/sets.hpp"

namespace pp::symbolic {

enum class Direction { pre, post };

// One-step image of a counting set over the protocol's states. pre yields
// the configurations with some successor in s, post the successors of s.
// The set itself is not included. Observation protocols only.
sets::CountingSet step_image(const Protocol& p, const sets::CountingSet& s,
                             Direction dir);

struct StarResult {
  sets::CountingSet set;
  bool converged = false;
  long long iterations = 0;
};

// Iterated closure of s under step_image, stopping at a fixpoint or after
// the iteration budget; a non-converged result underapproximates. budget
// <= 0 selects 10 * (1 + largest finite bound of s) * state count.
StarResult star_image(const Protocol& p, const sets::CountingSet& s,
                      Direction dir, long long budget = 0);

enum class Verdict { ensures, not_ensures, inconclusive };

struct SymbolicReport {
  Verdict verdict = Verdict::inconclusive;
  bool innerConverged = false;
  bool outerConverged = false;
  long long innerIterations = 0;
  long long outerIterations = 0;
  sets::CountingSet bad;             // input configurations that can escape
  std::optional<Config> witness;     // minimal-size member of bad
};

// Decides emptiness of inputs ∩ pre*(complement(pre*(lift(s)))): no input
// configuration reaches one from which the condition is lost for good. The
// condition s ranges over p's outputs. This coincides with the ensure
// property whenever no bottom component straddles the condition's boundary;
// a straddling component passes here yet fails the explicit check, so
// compare against the oracle when the condition is not known to be stable.
// A non-converged inner closure is inconclusive; a non-converged outer
// closure still refutes when the intersection is already nonempty.
SymbolicReport verify_ensures_symbolic(const Protocol& p,
                                       const sets::CountingSet& s,
                                       long long budget = 0);

}  // namespace pp::symbolic
