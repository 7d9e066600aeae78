#pragma once

#include <string>
#include <vector>

#include "ensurelab/core.hpp"
#include "ensurelab/sets.hpp"

namespace pp::synth_pp {

// Eventually periodic description of a one-dimensional semilinear set:
// n is a member iff n < threshold and n is an exception, or n >= threshold
// and n mod modulus is a residue. threshold >= 1 always.
struct SizeRecognizerSpec {
  std::vector<long long> exceptions;  // sorted, all < threshold
  long long threshold = 1;
  long long modulus = 1;
  std::vector<int> residues;  // sorted, all < modulus

  // t is the population size saturated at threshold, m the size mod modulus.
  bool decide(long long t, long long m) const;
  bool member(long long n) const;
};

SizeRecognizerSpec normalize_one_dim(const sets::SemilinearSet& oneDim);

// Protocol over outputs {no,yes} computing "the population size lies in
// oneDim". Every agent tracks a saturating total and a modular residue;
// pairwise aggregation drains one agent to a zero marker, zero markers copy
// the verdict of any settled agent they observe.
Protocol build_size_recognizer(const sets::SemilinearSet& oneDim,
                               const std::string& name);

// Recruiting protocol whose reachable outputs stabilise, at any population
// size base size + k * period size, on the base multiset plus k copies of
// the first period. dims names the output alphabet of the linear set.
Protocol build_cone_ensurer(const sets::LinearSet& cone,
                            const std::vector<std::string>& dims,
                            const std::string& name);

// Ensurer for a size-flexible semilinear output condition: a product of the
// live per-cone ensurers with one size classifier naming the first cone
// whose sizes cover the population; the mux answers with that cone's
// ensurer. Components with a fixed answer fold away. Throws if some
// population size has no member of s.
Protocol synthesize_pp_ensurer(const sets::SemilinearSet& s,
                               const std::string& name = "ensurer");

}  // namespace pp::synth_pp
