#include "ensurelab/oracle.hpp"

#include <algorithm>
#include <cstdlib>
#include <map>
#include <string>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace pp::oracle {

long long node_budget() {
  static long long v = [] {
    const char* s = std::getenv("ENSURELAB_BUDGET");
    if (s) {
      char* end = nullptr;
      long long x = std::strtoll(s, &end, 10);
      if (end != s && x > 0) return x;
    }
    return 2000000LL;
  }();
  return v;
}

static long long resolve_budget(long long b) { return b > 0 ? b : node_budget(); }

void to_sparse(const Config& dense, std::vector<std::uint32_t>& key) {
  key.clear();
  for (size_t q = 0; q < dense.size(); q++) {
    if (dense[q] < 0) throw Error("negative count in configuration");
    if (dense[q] > 0) {
      key.push_back((std::uint32_t)q);
      key.push_back((std::uint32_t)dense[q]);
    }
  }
}

Config to_dense(const std::uint32_t* key, int len, int stateCount) {
  Config c(stateCount, 0);
  for (int i = 0; i < len; i += 2) c[key[i]] = (int)key[i + 1];
  return c;
}

static std::uint64_t hash_key(const std::uint32_t* p, int len) {
  std::uint64_t h = 1469598103934665603ULL;
  for (int i = 0; i < len; i++) {
    h ^= p[i];
    h *= 1099511628211ULL;
  }
  h ^= (std::uint64_t)len;
  h ^= h >> 30;
  h *= 0xbf58476d1ce4e5b9ULL;
  h ^= h >> 27;
  h *= 0x94d049bb133111ebULL;
  h ^= h >> 31;
  return h;
}

int ConfigPool::lookup(const std::uint32_t* key, int len, std::uint64_t h) const {
  if (table_.empty()) return -1;
  size_t mask = table_.size() - 1;
  size_t i = (size_t)h & mask;
  while (true) {
    int id = table_[i];
    if (id == -1) return -1;
    std::uint64_t ref = refs_[id];
    int rlen = (int)(ref & 0xff);
    const std::uint32_t* rp = arena_.data() + (ref >> 8);
    if (rlen == len && std::equal(rp, rp + rlen, key)) return id;
    i = (i + 1) & mask;
  }
}

void ConfigPool::grow() {
  size_t cap = table_.empty() ? 1024 : table_.size() * 2;
  table_.assign(cap, -1);
  size_t mask = cap - 1;
  for (int id = 0; id < (int)refs_.size(); id++) {
    std::uint64_t ref = refs_[id];
    int rlen = (int)(ref & 0xff);
    const std::uint32_t* rp = arena_.data() + (ref >> 8);
    size_t i = (size_t)hash_key(rp, rlen) & mask;
    while (table_[i] != -1) i = (i + 1) & mask;
    table_[i] = id;
  }
  used_ = refs_.size();
}

int ConfigPool::intern_key(const std::uint32_t* key, int len) {
  if (len > 255) throw Error("configuration inhabits too many states to intern");
  std::uint64_t h = hash_key(key, len);
  int id = lookup(key, len, h);
  if (id != -1) return id;
  if ((used_ + 1) * 10 >= table_.size() * 7) grow();
  id = (int)refs_.size();
  std::uint64_t off = arena_.size();
  arena_.insert(arena_.end(), key, key + len);
  refs_.push_back((off << 8) | (std::uint64_t)len);
  size_t mask = table_.size() - 1;
  size_t i = (size_t)h & mask;
  while (table_[i] != -1) i = (i + 1) & mask;
  table_[i] = id;
  used_++;
  return id;
}

int ConfigPool::intern(const Config& dense) {
  std::vector<std::uint32_t> key;
  to_sparse(dense, key);
  return intern_key(key.data(), (int)key.size());
}

int ConfigPool::find(const Config& dense) const {
  std::vector<std::uint32_t> key;
  to_sparse(dense, key);
  return lookup(key.data(), (int)key.size(), hash_key(key.data(), (int)key.size()));
}

Config ConfigPool::get(int id, int stateCount) const {
  std::uint64_t ref = refs_.at(id);
  return to_dense(arena_.data() + (ref >> 8), (int)(ref & 0xff), stateCount);
}

const std::uint32_t* ConfigPool::key(int id, int& len) const {
  std::uint64_t ref = refs_.at(id);
  len = (int)(ref & 0xff);
  return arena_.data() + (ref >> 8);
}

Expander::Expander(const Protocol& p) : p_(&p), sorted_(p.transitions) {
  std::sort(sorted_.begin(), sorted_.end(),
            [](const Transition& a, const Transition& b) {
              return std::tie(a.q1, a.q2) < std::tie(b.q1, b.q2);
            });
}

// Applies one transition to a sorted sparse key. Decrements are guarded by
// the caller's occupancy checks.
static void apply_key(const std::uint32_t* key, int len, const Transition& t,
                      std::vector<std::uint32_t>& out) {
  // Deltas per touched state, merged.
  std::pair<int, int> delta[4] = {{t.q1, -1}, {t.q2, -1}, {t.p1, 1}, {t.p2, 1}};
  std::sort(delta, delta + 4);
  int m = 0;
  for (int i = 0; i < 4; i++) {
    if (m > 0 && delta[m - 1].first == delta[i].first) {
      delta[m - 1].second += delta[i].second;
    } else {
      delta[m++] = delta[i];
    }
  }
  out.clear();
  int di = 0;
  for (int i = 0; i < len; i += 2) {
    int q = (int)key[i];
    int c = (int)key[i + 1];
    while (di < m && delta[di].first < q) {
      if (delta[di].second != 0) {
        out.push_back((std::uint32_t)delta[di].first);
        out.push_back((std::uint32_t)delta[di].second);
      }
      di++;
    }
    if (di < m && delta[di].first == q) {
      c += delta[di].second;
      di++;
    }
    if (c < 0) throw Error("transition applied to insufficient occupancy");
    if (c > 0) {
      out.push_back((std::uint32_t)q);
      out.push_back((std::uint32_t)c);
    }
  }
  while (di < m) {
    if (delta[di].second > 0) {
      out.push_back((std::uint32_t)delta[di].first);
      out.push_back((std::uint32_t)delta[di].second);
    } else if (delta[di].second < 0) {
      throw Error("transition applied to insufficient occupancy");
    }
    di++;
  }
}

void Expander::successors_of(const std::uint32_t* key, int len,
                             std::vector<std::vector<std::uint32_t>>& out) const {
  out.clear();
  std::vector<std::uint32_t> next;
  for (int i = 0; i < len; i += 2) {
    int q1 = (int)key[i];
    int c1 = (int)key[i + 1];
    for (int j = 0; j < len; j += 2) {
      int q2 = (int)key[j];
      if (q1 == q2 && c1 < 2) continue;
      auto lo = std::lower_bound(sorted_.begin(), sorted_.end(), std::pair{q1, q2},
                                 [](const Transition& t, const std::pair<int, int>& k) {
                                   return std::tie(t.q1, t.q2) < std::tie(k.first, k.second);
                                 });
      for (auto it = lo; it != sorted_.end() && it->q1 == q1 && it->q2 == q2; ++it) {
        apply_key(key, len, *it, next);
        out.push_back(next);
      }
    }
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
}

std::vector<std::vector<std::vector<std::uint32_t>>> Expander::batch_serial(
    const ConfigPool& pool, const std::vector<int>& ids) const {
  std::vector<std::vector<std::vector<std::uint32_t>>> res(ids.size());
  for (size_t i = 0; i < ids.size(); i++) {
    int len;
    const std::uint32_t* k = pool.key(ids[i], len);
    successors_of(k, len, res[i]);
  }
  return res;
}

std::vector<std::vector<std::vector<std::uint32_t>>> Expander::batch_parallel(
    const ConfigPool& pool, const std::vector<int>& ids) const {
  std::vector<std::vector<std::vector<std::uint32_t>>> res(ids.size());
#pragma omp parallel for schedule(dynamic, 16)
  for (long long i = 0; i < (long long)ids.size(); i++) {
    int len;
    const std::uint32_t* k = pool.key(ids[(size_t)i], len);
    successors_of(k, len, res[(size_t)i]);
  }
  return res;
}

// C(n+k-1, k-1), clamped.
static long long compositions_count(long long n, int k) {
  if (k <= 0) return n == 0 ? 1 : 0;
  __int128 r = 1;
  for (int i = 1; i < k; i++) {
    r = r * (__int128)(n + i) / i;
    if (r > (__int128)4e18) return (long long)4e18;
  }
  return (long long)r;
}

static void enumerate_compositions(int k, long long n,
                                   const std::function<void(const std::vector<int>&)>& emit) {
  std::vector<int> cur(k, 0);
  std::function<void(int, long long)> rec = [&](int idx, long long rest) {
    if (idx == k - 1) {
      cur[idx] = (int)rest;
      emit(cur);
      return;
    }
    for (long long c = rest; c >= 0; c--) {
      cur[idx] = (int)c;
      rec(idx + 1, rest - c);
    }
  };
  if (k == 0) {
    if (n == 0) emit(cur);
    return;
  }
  rec(0, n);
}

int scc_decompose(const std::vector<std::vector<int>>& succ,
                  const std::vector<int>& roots, std::vector<int>& comp,
                  std::vector<char>& bottom) {
  int n = (int)succ.size();
  comp.assign(n, -1);
  std::vector<int> index(n, -1), low(n, 0);
  std::vector<char> onstack(n, 0);
  std::vector<int> stk;
  struct Frame {
    int node;
    size_t edge;
  };
  std::vector<Frame> frames;
  int counter = 0, comps = 0;
  for (int root : roots) {
    if (index[root] != -1) continue;
    frames.push_back({root, 0});
    index[root] = low[root] = counter++;
    stk.push_back(root);
    onstack[root] = 1;
    while (!frames.empty()) {
      Frame& f = frames.back();
      if (f.edge < succ[f.node].size()) {
        int v = succ[f.node][f.edge++];
        if (index[v] == -1) {
          index[v] = low[v] = counter++;
          stk.push_back(v);
          onstack[v] = 1;
          frames.push_back({v, 0});
        } else if (onstack[v]) {
          low[f.node] = std::min(low[f.node], index[v]);
        }
      } else {
        int u = f.node;
        if (low[u] == index[u]) {
          int cid = comps++;
          while (true) {
            int w = stk.back();
            stk.pop_back();
            onstack[w] = 0;
            comp[w] = cid;
            if (w == u) break;
          }
        }
        frames.pop_back();
        if (!frames.empty()) low[frames.back().node] = std::min(low[frames.back().node], low[u]);
      }
    }
  }
  bottom.assign(comps, 1);
  for (int u = 0; u < n; u++) {
    if (comp[u] == -1) continue;
    for (int v : succ[u]) {
      if (comp[v] != comp[u]) bottom[comp[u]] = 0;
    }
  }
  return comps;
}

std::vector<int> ReachGraph::bottom_nodes() const {
  std::vector<int> out;
  for (int id = 0; id < pool.size(); id++) {
    if (scc[id] != -1 && sccBottom[scc[id]]) out.push_back(id);
  }
  return out;
}

ReachGraph reach_graph(const Protocol& p, long long n, long long budget) {
  budget = resolve_budget(budget);
  int k = p.state_count();
  long long count = compositions_count(n, k);
  if (count > budget) {
    throw BudgetError("size-" + std::to_string(n) + " configuration space has " +
                          std::to_string(count) + " nodes, over budget " +
                          std::to_string(budget),
                      count);
  }
  ReachGraph g;
  std::vector<std::uint32_t> key;
  enumerate_compositions(k, n, [&](const Config& c) {
    to_sparse(c, key);
    g.pool.intern_key(key.data(), (int)key.size());
  });
  int total = g.pool.size();
  g.succ.resize(total);
  Expander ex(p);
  std::vector<int> ids(total);
  for (int i = 0; i < total; i++) ids[i] = i;
  auto batches = ex.batch_parallel(g.pool, ids);
  for (int i = 0; i < total; i++) {
    for (auto& sk : batches[i]) {
      g.succ[i].push_back(g.pool.intern_key(sk.data(), (int)sk.size()));
    }
  }
  g.sccCount = scc_decompose(g.succ, ids, g.scc, g.sccBottom);
  return g;
}

std::vector<Config> bottom_configs(const Protocol& p, long long n, long long budget) {
  ReachGraph g = reach_graph(p, n, budget);
  std::vector<Config> out;
  for (int id : g.bottom_nodes()) out.push_back(g.config(id, p.state_count()));
  std::sort(out.begin(), out.end());
  return out;
}

// Input configurations of one size, lexicographically by input-state counts.
std::vector<Config> input_configs(const Protocol& p, long long n) {
  std::vector<Config> out;
  enumerate_compositions((int)p.inputs.size(), n, [&](const std::vector<int>& cnt) {
    Config c(p.state_count(), 0);
    for (size_t i = 0; i < p.inputs.size(); i++) c[p.inputs[i]] = cnt[i];
    out.push_back(std::move(c));
  });
  return out;
}

// Maps condition dimensions onto the protocol's output order.
static std::vector<int> output_perm(const std::vector<std::string>& dims,
                                    const Protocol& p) {
  if (dims.size() != p.outputs.size())
    throw Error("condition dimensions do not match protocol outputs");
  std::vector<int> perm(dims.size());
  for (size_t i = 0; i < p.outputs.size(); i++) {
    auto it = std::find(dims.begin(), dims.end(), p.outputs[i]);
    if (it == dims.end())
      throw Error("condition lacks dimension for output " + p.outputs[i]);
    perm[i] = (int)(it - dims.begin());
  }
  return perm;
}

OutputPredicate output_predicate(const sets::CountingSet& s, const Protocol& p) {
  std::vector<int> perm = output_perm(s.dims, p);
  sets::CountingSet reord;
  reord.dims = p.outputs;
  for (const auto& cube : s.cubes) {
    sets::Cube c;
    c.lo.resize(perm.size());
    c.hi.resize(perm.size());
    for (size_t i = 0; i < perm.size(); i++) {
      c.lo[i] = cube.lo[perm[i]];
      c.hi[i] = cube.hi[perm[i]];
    }
    reord.cubes.push_back(c);
  }
  return [reord](const std::vector<int>& out) { return reord.member(out); };
}

OutputPredicate output_predicate(const sets::SemilinearSet& s, const Protocol& p) {
  std::vector<int> perm = output_perm(s.dims, p);
  sets::SemilinearSet reord;
  reord.dims = p.outputs;
  for (const auto& cone : s.cones) {
    sets::LinearSet c;
    c.base.resize(perm.size());
    for (size_t i = 0; i < perm.size(); i++) c.base[i] = cone.base[perm[i]];
    for (const auto& v : cone.periods) {
      std::vector<int> w(perm.size());
      for (size_t i = 0; i < perm.size(); i++) w[i] = v[perm[i]];
      c.periods.push_back(std::move(w));
    }
    reord.cones.push_back(std::move(c));
  }
  return [reord](const std::vector<int>& out) { return reord.member(out); };
}

EnsureOracle::EnsureOracle(const Protocol& p, OutputPredicate cond,
                           long long budget)
    : p_(p), cond_(std::move(cond)), budget_(resolve_budget(budget)),
      expander_(p) {
  p_.validate();
}

EnsureOracle::EnsureOracle(const Protocol& p, const sets::CountingSet& cond,
                           long long budget)
    : EnsureOracle(p, output_predicate(cond, p), budget) {}

EnsureOracle::EnsureOracle(const Protocol& p, const sets::SemilinearSet& cond,
                           long long budget)
    : EnsureOracle(p, output_predicate(cond, p), budget) {}

bool EnsureOracle::in_cond(int id) {
  if (id >= (int)inCond_.size()) inCond_.resize(id + 1, -1);
  if (inCond_[id] == -1) {
    Config c = pool_.get(id, p_.state_count());
    inCond_[id] = cond_(output_multiset(p_, c)) ? 1 : 0;
  }
  return inCond_[id] == 1;
}

void EnsureOracle::expand(int id) {
  if (pool_.size() > budget_)
    throw BudgetError("exploration exceeded node budget " + std::to_string(budget_),
                      -1);
  int len;
  const std::uint32_t* k = pool_.key(id, len);
  std::vector<std::vector<std::uint32_t>> nexts;
  expander_.successors_of(k, len, nexts);
  std::vector<int> ids;
  ids.reserve(nexts.size());
  for (auto& nk : nexts) ids.push_back(pool_.intern_key(nk.data(), (int)nk.size()));
  size_t need = pool_.size();
  if (succ_.size() < need) succ_.resize(need);
  if (expanded_.size() < need) expanded_.resize(need, 0);
  if (status_.size() < need) status_.resize(need, -1);
  succ_[id] = std::move(ids);
  expanded_[id] = 1;
}

int EnsureOracle::explore(const Config& c) {
  int id0 = pool_.intern(c);
  if ((int)status_.size() <= id0) status_.resize(id0 + 1, -1);
  if ((int)expanded_.size() <= id0) expanded_.resize(id0 + 1, 0);
  if (succ_.size() <= (size_t)id0) succ_.resize(id0 + 1);
  if (status_[id0] != -1) return id0;
  std::vector<int> stack{id0};
  std::vector<char> seen(pool_.size(), 0);
  seen[id0] = 1;
  while (!stack.empty()) {
    int u = stack.back();
    stack.pop_back();
    if (status_[u] != -1) continue;
    if (!expanded_[u]) expand(u);
    for (int v : succ_[u]) {
      if ((size_t)v >= seen.size()) seen.resize(v + 1, 0);
      if ((int)status_.size() <= v) status_.resize(v + 1, -1);
      if (!seen[v] && status_[v] == -1) {
        seen[v] = 1;
        stack.push_back(v);
      }
    }
  }
  mark_region(id0);
  return id0;
}

// Tarjan over the unmarked region reachable from root. Verdicts are computed
// as components complete: a component ensures iff every member satisfies the
// condition and every outgoing edge targets an ensuring node.
void EnsureOracle::mark_region(int root) {
  if (status_[root] != -1) return;
  int n = pool_.size();
  std::vector<int> index(n, -1), low(n, 0);
  std::vector<char> onstack(n, 0);
  std::vector<int> stk;
  struct Frame {
    int node;
    size_t edge;
  };
  std::vector<Frame> frames;
  int counter = 0;
  frames.push_back({root, 0});
  index[root] = low[root] = counter++;
  stk.push_back(root);
  onstack[root] = 1;
  while (!frames.empty()) {
    Frame& f = frames.back();
    if (f.edge < succ_[f.node].size()) {
      int v = succ_[f.node][f.edge++];
      if (status_[v] != -1) continue;  // boundary with known verdict
      if (index[v] == -1) {
        index[v] = low[v] = counter++;
        stk.push_back(v);
        onstack[v] = 1;
        frames.push_back({v, 0});
      } else if (onstack[v]) {
        low[f.node] = std::min(low[f.node], index[v]);
      }
    } else {
      int u = f.node;
      if (low[u] == index[u]) {
        // Members are the stack segment above u inclusive. At completion an
        // edge target is in this component iff it is still on the stack.
        size_t base = stk.size();
        while (stk[base - 1] != u) base--;
        bool ok = true;
        for (size_t i = base - 1; i < stk.size(); i++) {
          int m = stk[i];
          if (!in_cond(m)) ok = false;
          for (int v : succ_[m]) {
            if (onstack[v]) continue;
            if (status_[v] != 1) ok = false;
          }
          if (!ok) break;
        }
        for (size_t i = base - 1; i < stk.size(); i++) {
          onstack[stk[i]] = 0;
          status_[stk[i]] = ok ? 1 : 0;
        }
        stk.resize(base - 1);
      }
      frames.pop_back();
      if (!frames.empty()) low[frames.back().node] = std::min(low[frames.back().node], low[u]);
    }
  }
}

bool EnsureOracle::config_ensures(const Config& c) {
  if ((int)c.size() != p_.state_count())
    throw Error("configuration arity does not match protocol");
  int id = explore(c);
  return status_[id] == 1;
}

EnsureVerdict EnsureOracle::check_size(long long n) {
  EnsureVerdict verdict;
  verdict.holds = true;
  for (const Config& c0 : input_configs(p_, n)) {
    int id0 = explore(c0);
    if (status_[id0] == 1) continue;  // everything reachable satisfies it
    // A transient violation is fine; only bottom components count.
    std::vector<int> comp;
    std::vector<char> bottom;
    scc_decompose(succ_, {id0}, comp, bottom);
    for (int u = 0; u < (int)comp.size(); u++) {
      if (comp[u] == -1 || !bottom[comp[u]]) continue;
      if (!in_cond(u)) {
        verdict.holds = false;
        verdict.input = c0;
        verdict.violator = pool_.get(u, p_.state_count());
        return verdict;
      }
    }
  }
  return verdict;
}

EnsureVerdict check_ensures(const Protocol& p, const sets::SemilinearSet& cond,
                            long long n, long long budget) {
  EnsureOracle oracle(p, cond, budget);
  return oracle.check_size(n);
}

EnsureVerdict check_ensures(const Protocol& p, const sets::CountingSet& cond,
                            long long n, long long budget) {
  EnsureOracle oracle(p, cond, budget);
  return oracle.check_size(n);
}

bool config_ensures(const Protocol& p, const Config& c,
                    const sets::CountingSet& cond, long long budget) {
  EnsureOracle oracle(p, cond, budget);
  return oracle.config_ensures(c);
}

ComputeVerdict check_computes(const Protocol& p,
                              const std::function<int(const Config&)>& phi,
                              long long maxN, long long budget) {
  budget = resolve_budget(budget);
  p.validate();
  Expander ex(p);
  ConfigPool pool;
  std::vector<std::vector<int>> succ;
  std::vector<char> expanded;
  ComputeVerdict verdict;
  verdict.holds = true;
  std::vector<std::vector<std::uint32_t>> nexts;
  for (long long n = 1; n <= maxN; n++) {
    for (const Config& c0 : input_configs(p, n)) {
      int id0 = pool.intern(c0);
      if ((size_t)id0 >= succ.size()) {
        succ.resize(id0 + 1);
        expanded.resize(id0 + 1, 0);
      }
      std::vector<int> stack{id0};
      std::vector<char> seen(pool.size(), 0);
      seen[id0] = 1;
      while (!stack.empty()) {
        int u = stack.back();
        stack.pop_back();
        if (!expanded[u]) {
          if (pool.size() > budget)
            throw BudgetError("exploration exceeded node budget " + std::to_string(budget), -1);
          int len;
          const std::uint32_t* k = pool.key(u, len);
          ex.successors_of(k, len, nexts);
          std::vector<int> ids;
          for (auto& nk : nexts) ids.push_back(pool.intern_key(nk.data(), (int)nk.size()));
          if (succ.size() < (size_t)pool.size()) {
            succ.resize(pool.size());
            expanded.resize(pool.size(), 0);
          }
          succ[u] = std::move(ids);
          expanded[u] = 1;
        }
        for (int v : succ[u]) {
          if ((size_t)v >= seen.size()) seen.resize(v + 1, 0);
          if (!seen[v]) {
            seen[v] = 1;
            stack.push_back(v);
          }
        }
      }
      int expect = phi(c0);
      std::vector<int> comp;
      std::vector<char> bottom;
      scc_decompose(succ, {id0}, comp, bottom);
      for (int u = 0; u < (int)comp.size(); u++) {
        if (comp[u] == -1 || !bottom[comp[u]]) continue;
        Config c = pool.get(u, p.state_count());
        for (int q = 0; q < p.state_count(); q++) {
          if (c[q] > 0 && p.outmap[q] != expect) {
            verdict.holds = false;
            verdict.input = c0;
            verdict.nonConsensus = c;
            return verdict;
          }
        }
      }
    }
  }
  return verdict;
}

std::vector<std::vector<int>> trajectory_classes(const Protocol& p,
                                                 const DeanonExecution& e) {
  int k = p.state_count();
  std::vector<std::vector<int>> cls(k, std::vector<int>(k, 0));
  std::vector<StateId> cur = e.initial;
  for (const Step& s : e.steps) {
    const Transition& t = p.transitions.at(s.transition);
    cur.at(s.actor) = t.p1;
    cur.at(s.partner) = t.p2;
  }
  for (size_t a = 0; a < e.initial.size(); a++) cls[e.initial[a]][cur[a]]++;
  return cls;
}

DeanonExecution prune_execution(const Protocol& p, const DeanonExecution& e,
                                StateId from, StateId to) {
  if (!p.is_io())
    throw Error("pruning requires unchanged observed agents in every transition");
  replay(p, e);  // validates the input execution
  int agents = (int)e.initial.size();
  int T = (int)e.steps.size();
  // st[t][a]: state of agent a before step t.
  std::vector<std::vector<StateId>> st(T + 1);
  st[0] = e.initial;
  for (int t = 0; t < T; t++) {
    st[t + 1] = st[t];
    const Transition& tr = p.transitions[e.steps[t].transition];
    st[t + 1][e.steps[t].actor] = tr.p1;
  }
  std::vector<int> cands;
  for (int a = 0; a < agents; a++) {
    if (st[0][a] == from && st[T][a] == to) cands.push_back(a);
  }
  if ((int)cands.size() <= p.state_count()) {
    throw Error("trajectory class (" + p.states.at(from) + "," + p.states.at(to) +
                ") has multiplicity " + std::to_string(cands.size()) +
                ", not above the state count " + std::to_string(p.state_count()));
  }
  for (int d : cands) {
    std::vector<Step> steps;
    bool ok = true;
    for (int t = 0; t < T && ok; t++) {
      Step s = e.steps[t];
      if (s.actor == d) continue;  // its own moves leave everyone else unchanged
      if (s.partner == d) {
        int e2 = -1;
        for (int a = 0; a < agents; a++) {
          if (a != d && a != s.actor && st[t][a] == st[t][d]) {
            e2 = a;
            break;
          }
        }
        if (e2 == -1) {
          ok = false;
          break;
        }
        s.partner = e2;
      }
      steps.push_back(s);
    }
    if (!ok) continue;
    DeanonExecution out;
    for (int a = 0; a < agents; a++) {
      if (a != d) out.initial.push_back(e.initial[a]);
    }
    for (Step s : steps) {
      if (s.actor > d) s.actor--;
      if (s.partner > d) s.partner--;
      out.steps.push_back(s);
    }
    replay(p, out);  // must hold by construction
    return out;
  }
  throw Error("no agent of class (" + p.states.at(from) + "," + p.states.at(to) +
              ") could be removed: every candidate is observed while alone in its state");
}

ClosureReport bottom_closure_check(const Protocol& p, int threshold, int maxExtra,
                                   const std::vector<long long>& sizes,
                                   long long budget) {
  budget = resolve_budget(budget);
  p.validate();
  if (threshold < 1) throw Error("threshold must be positive");
  if (maxExtra < 1) throw Error("maxExtra must be positive");
  std::map<long long, ReachGraph> graphs;
  auto graph = [&](long long n) -> ReachGraph& {
    auto it = graphs.find(n);
    if (it == graphs.end()) it = graphs.emplace(n, reach_graph(p, n, budget)).first;
    return it->second;
  };
  int k = p.state_count();
  // Runs the closure check at one threshold; returns violations found.
  auto run = [&](int tau, long long* checks,
                 std::vector<std::pair<Config, Config>>* viol, bool stopEarly) {
    for (long long n : sizes) {
      ReachGraph& g = graph(n);
      for (int id : g.bottom_nodes()) {
        Config b = g.config(id, k);
        std::vector<int> big;
        for (int q = 0; q < k; q++) {
          if (b[q] >= tau) big.push_back(q);
        }
        if (big.empty()) continue;
        for (int extra = 1; extra <= maxExtra; extra++) {
          bool stop = false;
          enumerate_compositions((int)big.size(), extra, [&](const std::vector<int>& add) {
            if (stop) return;
            Config c = b;
            for (size_t i = 0; i < big.size(); i++) c[big[i]] += add[i];
            ReachGraph& gm = graph(n + extra);
            int id2 = gm.pool.find(c);
            if (id2 < 0) throw Error("extended configuration missing from its size graph");
            if (checks) (*checks)++;
            if (!gm.sccBottom[gm.scc[id2]]) {
              viol->push_back({b, c});
              if (stopEarly) stop = true;
            }
          });
          if (stop) return;
        }
      }
    }
  };
  ClosureReport report;
  run(threshold, &report.checks, &report.violations, false);
  if (report.violations.empty()) {
    report.smallestHoldingThreshold = threshold;
    for (int tau = 1; tau < threshold; tau++) {
      std::vector<std::pair<Config, Config>> v;
      run(tau, nullptr, &v, true);
      if (v.empty()) {
        report.smallestHoldingThreshold = tau;
        break;
      }
    }
  }
  return report;
}

}  // namespace pp::oracle
