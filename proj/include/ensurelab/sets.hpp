#pragma once

#include <optional>
#include <string>
#include <vector>

#include "ensurelab/core.hpp"

namespace pp::sets {

// Upper bounds at or above kInf mean "unbounded". Finite bounds in this
// artifact stay far below the clamp threshold.
constexpr int kInf = 1000000000;

int add_bound(int b, int delta);  // kInf-aware, clamps negatives of lows at 0 by caller

struct Cube {
  std::vector<int> lo, hi;  // hi[i] == kInf for unbounded

  bool empty() const;
  bool contains(const std::vector<int>& x) const;
  long long min_size() const;
  long long max_size() const;  // kInf if any dim unbounded
  bool subsumes(const Cube& other) const;
  bool operator==(const Cube&) const = default;
  auto operator<=>(const Cube&) const = default;
};

Cube full_cube(int dims);
Cube point_cube(const std::vector<int>& x);

struct CountingSet {
  std::vector<std::string> dims;
  std::vector<Cube> cubes;

  int dim_count() const { return (int)dims.size(); }
  bool member(const std::vector<int>& x) const;
};

struct LinearSet {
  std::vector<int> base;
  std::vector<std::vector<int>> periods;
};

struct SemilinearSet {
  std::vector<std::string> dims;
  std::vector<LinearSet> cones;

  int dim_count() const { return (int)dims.size(); }
  bool member(const std::vector<int>& x) const;
};

CountingSet set_union(const CountingSet& a, const CountingSet& b);
CountingSet intersect(const CountingSet& a, const CountingSet& b);
CountingSet complement(const CountingSet& a);

// Drops empty cubes, deduplicates, removes cubes subsumed by a single other
// cube, sorts. Equal-denotation inputs of equal cube structure compare equal.
CountingSet canonicalize(const CountingSet& a);

// Additionally merges cube pairs that differ in one coordinate by adjacent
// or overlapping intervals. Used to keep fixpoint iterations compact.
CountingSet canonicalize_merged(const CountingSet& a);

// Pieces of r not covered by b (at most 2*dims cubes).
std::vector<Cube> subtract_cube(const Cube& r, const Cube& b);

// Semantic containment / equality, decided per cube of a by subtracting the
// cubes of b and checking that nothing remains.
bool is_subset(const CountingSet& a, const CountingSet& b);
bool semantic_equal(const CountingSet& a, const CountingSet& b);

// Smallest-size member, scanning sizes 0..maxSize. Deterministic.
std::optional<std::vector<int>> first_member_by_size(const CountingSet& s,
                                                     long long maxSize);

// True iff some cube of s admits a member of exactly size n.
bool first_member_by_size_at(const CountingSet& s, long long n);

// Lexicographically least count vector of size n belonging to s.
std::optional<std::vector<int>> witness_of_size(const CountingSet& s, long long n);

// Rewrites c as a union of cones whose periods all share one size
// (the lcm of the original period sizes). Zero-size periods are malformed.
std::vector<LinearSet> equalize_periods(const LinearSet& c);

// One-dimensional set of compatible sizes: base |B|, one period per
// distinct period size.
LinearSet size_projection(const LinearSet& c);

// Counting set over p's states denoting { C : output multiset of C in s }.
// s's dims must name p's output alphabet.
CountingSet lift_output_condition(const CountingSet& s, const Protocol& p);

// Decomposition of a size-flexible counting condition used by IO synthesis.
struct FlexWitnesses {
  Cube flexCube;                          // first cube with an unbounded dim
  int x;                                  // first unbounded dim of flexCube
  std::vector<int> D;                     // flexCube's lower-bound corner
  std::vector<std::vector<int>> smallWitness;  // index j in [0, |D|): size-j member
};

// Throws Error("not size-flexible...") naming the first uncovered size.
FlexWitnesses flexible_witnesses(const CountingSet& s);

}  // namespace pp::sets
