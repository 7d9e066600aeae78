#pragma once

#include <string>
#include <vector>

#include "ensurelab/core.hpp"
#include "ensurelab/sets.hpp"

namespace pp::synth_io {

// Chain protocol stabilising on exactly the output multiset D at population
// size |D|. D gives per-dimension counts; |D| must be at least 1.
Protocol build_point_protocol(const std::vector<int>& D,
                              const std::vector<std::string>& dims,
                              const std::string& name);

// Chain protocol with one extra level; populations above |D| stabilise on
// D plus surplus agents all emitting dimension x.
Protocol build_ray_protocol(const std::vector<int>& D, int x,
                            const std::vector<std::string>& dims,
                            const std::string& name);

// Observation protocol over {no,yes} stabilising on yes exactly at
// population size j. Agents climb levels 1..j+1 and gossip the highest
// level seen anywhere.
Protocol build_size_eq_recognizer(long long j, const std::string& name);

// Ensurer for a size-flexible counting-set condition: a ray over the first
// unbounded cube, muxed against point protocols for the small sizes below
// the ray's reach, selected by size recognizers. Always an observation
// protocol. Throws if some population size has no member of s.
Protocol synthesize_io_ensurer(const sets::CountingSet& s,
                               const std::string& name = "ensurer");

}  // namespace pp::synth_io
