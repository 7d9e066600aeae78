#pragma once

#include <string>
#include <vector>

#include "ensurelab/core.hpp"
#include "ensurelab/sets.hpp"
#include "ensurelab/text.hpp"

// Reference protocols shared across the test binaries. p1 counts three
// inputs with a remainder chain; p2 is its observation-only variant.

inline pp::Protocol make_p1() {
  return pp::text::parse_protocol(R"(
protocol p1
states: q0 q1 q2 q3
inputs: q1
outputs: false true
outmap: q0=false q1=false q2=false q3=true
trans: q1 q1 -> q0 q2
trans: q2 q1 -> q0 q3
trans: q2 q2 -> q1 q3
trans: q0 q3 -> q3 q3
trans: q1 q3 -> q3 q3
trans: q2 q3 -> q3 q3
)");
}

inline pp::Protocol make_p2() {
  return pp::text::parse_protocol(R"(
protocol p2
states: q0 q1 q2 q3
inputs: q1
outputs: false true
outmap: q0=false q1=false q2=false q3=true
trans: q1 q1 -> q2 q1
trans: q2 q2 -> q3 q2
trans: q0 q3 -> q3 q3
trans: q1 q3 -> q3 q3
trans: q2 q3 -> q3 q3
)");
}

// p2 with size-flavoured outputs.
inline pp::Protocol make_p2_ls() {
  pp::Protocol p = make_p2();
  p.name = "p2_ls";
  p.outputs = {"small", "large"};
  return p;
}

// a/b flip driven by an inert observer; never settles.
inline pp::Protocol make_flip() {
  return pp::text::parse_protocol(R"(
protocol flip
states: o a b
inputs: o a
outputs: x y z
outmap: a=x b=y o=z
trans: a o -> b o
trans: b o -> a o
)");
}

inline pp::Protocol make_chain2() {
  return pp::text::parse_protocol(R"(
protocol chain2
states: a b
inputs: a
outputs: lo hi
outmap: a=lo b=hi
trans: a a -> b a
)");
}

// At most two small and nothing large, or at least three large and nothing
// small.
inline pp::sets::CountingSet psi_ex_counting() {
  pp::sets::CountingSet s;
  s.dims = {"small", "large"};
  s.cubes.push_back({{0, 0}, {2, 0}});
  s.cubes.push_back({{0, 3}, {0, pp::sets::kInf}});
  return s;
}

// Same denotation as a union of cones.
inline pp::sets::SemilinearSet psi_ex_semilinear() {
  pp::sets::SemilinearSet s;
  s.dims = {"small", "large"};
  s.cones.push_back({{0, 0}, {}});
  s.cones.push_back({{1, 0}, {}});
  s.cones.push_back({{2, 0}, {}});
  s.cones.push_back({{0, 3}, {{0, 1}}});
  return s;
}

inline pp::Config cfg(std::vector<int> v) { return v; }
