#pragma once

#include <cstdint>
#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

namespace pp {

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct ParseError : Error {
  using Error::Error;
};

// Thrown when an explicit-state operation would exceed its node budget.
struct BudgetError : Error {
  long long required;
  BudgetError(const std::string& msg, long long req) : Error(msg), required(req) {}
};

using StateId = int;

// Ordered pair transition (q1,q2) -> (p1,p2); two distinct agents per step.
struct Transition {
  StateId q1, q2, p1, p2;
  bool operator==(const Transition&) const = default;
  auto operator<=>(const Transition&) const = default;
};

struct Protocol {
  std::string name;
  std::vector<std::string> states;
  std::vector<Transition> transitions;
  std::vector<StateId> inputs;           // nonempty
  std::vector<std::string> outputs;      // output alphabet, ordered
  std::vector<int> outmap;               // state index -> output index, total

  int state_count() const { return (int)states.size(); }
  StateId state_index(const std::string& s) const;
  int output_index(const std::string& o) const;
  bool is_io() const;
  bool is_input(StateId q) const;
  // Throws Error unless all invariants hold (ids in range, total outmap,
  // nonempty inputs, unique names).
  void validate() const;
};

// Dense count vector, one entry per state.
using Config = std::vector<int>;

long long config_size(const Config& c);

// Multiset of outputs of c, as counts per output index.
Config output_multiset(const Protocol& p, const Config& c);

// One step of transition t from c. Throws Error naming the deficient state
// if occupancy is insufficient (two agents needed in q1 when q1 == q2).
Config apply_transition(const Protocol& p, const Config& c, int t);

bool transition_enabled(const Protocol& p, const Config& c, int t);

// All configurations reachable in exactly one step, sorted and deduplicated.
std::vector<Config> successors(const Protocol& p, const Config& c);

// Agent-identified execution. Step i moves agent `actor` via transition
// `transition` while it interacts with (for IO: observes) agent `partner`.
struct Step {
  int transition;
  int actor;
  int partner;
};

struct DeanonExecution {
  std::vector<StateId> initial;  // agent id -> starting state
  std::vector<Step> steps;
};

// Replays e and returns the configuration sequence (length steps+1).
// Throws Error on any invalid step: unknown ids, actor == partner, or an
// agent not in the state the transition requires.
std::vector<Config> replay(const Protocol& p, const DeanonExecution& e);

// Assigns agent identities to an anonymous step sequence. Agents in the
// required state are picked by seeded draw so repeated calls with different
// seeds exercise different identity choices.
DeanonExecution deanonymise(const Protocol& p, const Config& initial,
                            const std::vector<int>& transitionSeq,
                            std::uint64_t seed);

// Output selector for product protocols: maps the tuple of component output
// indices to an index into `outputs`.
struct OutputMux {
  std::vector<std::string> outputs;
  std::function<int(const std::vector<int>&)> pick;
};

// Synchronous product with per-component identity choices (the all-identity
// combination is excluded). Components must each have a single input state.
Protocol product(const std::vector<Protocol>& components, const OutputMux& mux,
                 const std::string& name);

// Restriction of p to states reachable in the agent-state closure from the
// input states. Dynamics from input configurations are unchanged.
Protocol trim_to_reachable(const Protocol& p);

}  // namespace pp
