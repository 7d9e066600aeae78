#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <vector>

#include "ensurelab/core.hpp"
#include "ensurelab/sets.hpp"

namespace pp::oracle {

// Node budget for explicit-state exploration. Defaults to 2e6 nodes;
// the ENSURELAB_BUDGET environment variable overrides it.
long long node_budget();

// Predicate over output multisets, in the protocol's output order.
using OutputPredicate = std::function<bool(const std::vector<int>&)>;

// Adapts a set condition to a predicate; set dimensions are matched to the
// protocol's outputs by name, in any order.
OutputPredicate output_predicate(const sets::CountingSet& s, const Protocol& p);
OutputPredicate output_predicate(const sets::SemilinearSet& s, const Protocol& p);

// All input configurations of one size, lexicographic.
std::vector<Config> input_configs(const Protocol& p, long long n);

// Interned store of sparse configurations. Ids are dense and stable.
class ConfigPool {
 public:
  int intern(const Config& dense);
  int intern_key(const std::uint32_t* key, int len);
  int find(const Config& dense) const;
  Config get(int id, int stateCount) const;
  const std::uint32_t* key(int id, int& len) const;
  int size() const { return (int)refs_.size(); }

 private:
  int lookup(const std::uint32_t* key, int len, std::uint64_t h) const;
  void grow();
  std::vector<std::uint32_t> arena_;
  std::vector<std::uint64_t> refs_;  // (offset << 8) | len
  std::vector<int> table_;           // open addressing; -1 = empty
  size_t used_ = 0;
};

void to_sparse(const Config& dense, std::vector<std::uint32_t>& key);
Config to_dense(const std::uint32_t* key, int len, int stateCount);

// Transition lookup by source pair, plus successor generation for sparse
// configurations. The parallel batch kernel and its serial reference share
// per-node generation and produce identical output.
class Expander {
 public:
  explicit Expander(const Protocol& p);
  // Successor keys of one configuration, sorted and deduplicated.
  void successors_of(const std::uint32_t* key, int len,
                     std::vector<std::vector<std::uint32_t>>& out) const;
  std::vector<std::vector<std::vector<std::uint32_t>>> batch_serial(
      const ConfigPool& pool, const std::vector<int>& ids) const;
  std::vector<std::vector<std::vector<std::uint32_t>>> batch_parallel(
      const ConfigPool& pool, const std::vector<int>& ids) const;
  const Protocol& protocol() const { return *p_; }

 private:
  const Protocol* p_;
  std::vector<Transition> sorted_;  // by (q1,q2)
};

// Per-size reachability graph over all configurations of one size.
struct ReachGraph {
  ConfigPool pool;
  std::vector<std::vector<int>> succ;
  std::vector<int> scc;          // node -> component id
  int sccCount = 0;
  std::vector<char> sccBottom;   // component id -> no edges out

  Config config(int id, int stateCount) const { return pool.get(id, stateCount); }
  std::vector<int> bottom_nodes() const;
};

// Builds the full graph on all size-n configurations. Refuses with a
// BudgetError carrying the required node count when it exceeds the budget.
ReachGraph reach_graph(const Protocol& p, long long n, long long budget = 0);

// All configurations lying in bottom strongly connected components.
std::vector<Config> bottom_configs(const Protocol& p, long long n,
                                   long long budget = 0);

// Iterative strongly-connected components over an adjacency list restricted
// to `active` nodes (empty = all). Returns component ids in `comp`; bottom
// components have no edge leaving them. Components are numbered in reverse
// topological completion order.
int scc_decompose(const std::vector<std::vector<int>>& succ,
                  const std::vector<int>& roots, std::vector<int>& comp,
                  std::vector<char>& bottom);

struct EnsureVerdict {
  bool holds = false;
  std::optional<Config> input;     // failing input configuration
  std::optional<Config> violator;  // bottom configuration outside the condition
};

// Shared engine for the ensure property of one (protocol, condition) pair.
// The condition is evaluated directly on output multisets. Exploration is
// incremental and cached across queries, including across simulation runs.
class EnsureOracle {
 public:
  EnsureOracle(const Protocol& p, OutputPredicate cond, long long budget = 0);
  EnsureOracle(const Protocol& p, const sets::CountingSet& cond,
               long long budget = 0);
  EnsureOracle(const Protocol& p, const sets::SemilinearSet& cond,
               long long budget = 0);

  // True iff every configuration reachable from c satisfies the condition.
  bool config_ensures(const Config& c);

  // True iff from every input configuration of size n, every reachable
  // bottom SCC lies inside the condition.
  EnsureVerdict check_size(long long n);

  long long explored_nodes() const { return pool_.size(); }
  const Protocol& protocol() const { return p_; }

 private:
  int explore(const Config& c);
  void expand(int id);
  void mark_region(int root);
  bool in_cond(int id);

  const Protocol& p_;
  OutputPredicate cond_;
  long long budget_;
  Expander expander_;
  ConfigPool pool_;
  std::vector<std::vector<int>> succ_;
  std::vector<char> expanded_;
  std::vector<signed char> inCond_;   // -1 unknown, 0 no, 1 yes
  std::vector<signed char> status_;   // -1 unknown, 0 not ensuring, 1 ensuring
};

// check_ensures over one size (fresh engine; prefer EnsureOracle for sweeps).
EnsureVerdict check_ensures(const Protocol& p, const sets::CountingSet& cond,
                            long long n, long long budget = 0);
EnsureVerdict check_ensures(const Protocol& p, const sets::SemilinearSet& cond,
                            long long n, long long budget = 0);

bool config_ensures(const Protocol& p, const Config& c,
                    const sets::CountingSet& cond, long long budget = 0);

struct ComputeVerdict {
  bool holds = false;
  std::optional<Config> input;
  std::optional<Config> nonConsensus;  // bottom configuration breaking it
};

// True iff for every input configuration of size 1..maxN, every reachable
// bottom SCC is uniformly a phi(input)-consensus.
ComputeVerdict check_computes(const Protocol& p,
                              const std::function<int(const Config&)>& phi,
                              long long maxN, long long budget = 0);

// Removes one agent of trajectory class (from,to) from a deanonymised
// execution of an IO protocol, rerouting observations of the removed agent
// to co-located agents. The result replays validly, runs on one agent less,
// and preserves all other trajectory-class counts.
DeanonExecution prune_execution(const Protocol& p, const DeanonExecution& e,
                                StateId from, StateId to);

// Start-state/end-state trajectory class counts of an execution.
std::vector<std::vector<int>> trajectory_classes(const Protocol& p,
                                                 const DeanonExecution& e);

struct ClosureReport {
  long long checks = 0;
  std::vector<std::pair<Config, Config>> violations;  // (bottom, extended)
  int smallestHoldingThreshold = -1;  // least tau <= threshold with no violation
};

// For every bottom configuration B at the given sizes and every nonzero
// extension supported on {q : B(q) >= threshold} of total size <= maxExtra,
// checks that B + extension is bottom at its own size.
ClosureReport bottom_closure_check(const Protocol& p, int threshold,
                                   int maxExtra, const std::vector<long long>& sizes,
                                   long long budget = 0);

}  // namespace pp::oracle
