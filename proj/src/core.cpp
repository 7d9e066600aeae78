#include "ensurelab/core.hpp"

#include "ensurelab/rng.hpp"

#include <algorithm>
#include <set>
#include <unordered_set>

namespace pp {

StateId Protocol::state_index(const std::string& s) const {
  for (int i = 0; i < (int)states.size(); ++i)
    if (states[i] == s) return i;
  return -1;
}

int Protocol::output_index(const std::string& o) const {
  for (int i = 0; i < (int)outputs.size(); ++i)
    if (outputs[i] == o) return i;
  return -1;
}

bool Protocol::is_io() const {
  for (const auto& t : transitions)
    if (t.q2 != t.p2) return false;
  return true;
}

bool Protocol::is_input(StateId q) const {
  return std::find(inputs.begin(), inputs.end(), q) != inputs.end();
}

void Protocol::validate() const {
  if (states.empty()) throw Error("protocol '" + name + "': no states");
  std::unordered_set<std::string> seen;
  for (const auto& s : states)
    if (!seen.insert(s).second)
      throw Error("protocol '" + name + "': duplicate state '" + s + "'");
  seen.clear();
  for (const auto& o : outputs)
    if (!seen.insert(o).second)
      throw Error("protocol '" + name + "': duplicate output '" + o + "'");
  if (outputs.empty()) throw Error("protocol '" + name + "': no outputs");
  if (inputs.empty()) throw Error("protocol '" + name + "': no input states");
  for (StateId q : inputs)
    if (q < 0 || q >= state_count())
      throw Error("protocol '" + name + "': input state out of range");
  if ((int)outmap.size() != state_count())
    throw Error("protocol '" + name + "': output map is not total");
  for (int v : outmap)
    if (v < 0 || v >= (int)outputs.size())
      throw Error("protocol '" + name + "': output map value out of range");
  for (const auto& t : transitions)
    for (StateId q : {t.q1, t.q2, t.p1, t.p2})
      if (q < 0 || q >= state_count())
        throw Error("protocol '" + name + "': transition state out of range");
}

long long config_size(const Config& c) {
  long long n = 0;
  for (int v : c) n += v;
  return n;
}

Config output_multiset(const Protocol& p, const Config& c) {
  Config m(p.outputs.size(), 0);
  for (int q = 0; q < (int)c.size(); ++q) m[p.outmap[q]] += c[q];
  return m;
}

bool transition_enabled(const Protocol& p, const Config& c, int t) {
  const Transition& tr = p.transitions[t];
  if (tr.q1 == tr.q2) return c[tr.q1] >= 2;
  return c[tr.q1] >= 1 && c[tr.q2] >= 1;
}

Config apply_transition(const Protocol& p, const Config& c, int t) {
  if (t < 0 || t >= (int)p.transitions.size())
    throw Error("transition index out of range");
  const Transition& tr = p.transitions[t];
  int need1 = tr.q1 == tr.q2 ? 2 : 1;
  if (c[tr.q1] < need1)
    throw Error("transition needs " + std::to_string(need1) + " agent(s) in '" +
                p.states[tr.q1] + "'");
  if (tr.q1 != tr.q2 && c[tr.q2] < 1)
    throw Error("transition needs 1 agent in '" + p.states[tr.q2] + "'");
  Config r = c;
  r[tr.q1]--;
  r[tr.q2]--;
  r[tr.p1]++;
  r[tr.p2]++;
  return r;
}

std::vector<Config> successors(const Protocol& p, const Config& c) {
  std::set<Config> out;
  for (int t = 0; t < (int)p.transitions.size(); ++t)
    if (transition_enabled(p, c, t)) out.insert(apply_transition(p, c, t));
  return {out.begin(), out.end()};
}

std::vector<Config> replay(const Protocol& p, const DeanonExecution& e) {
  std::vector<StateId> st = e.initial;
  for (StateId q : st)
    if (q < 0 || q >= p.state_count()) throw Error("replay: bad initial state");
  auto toConfig = [&] {
    Config c(p.state_count(), 0);
    for (StateId q : st) c[q]++;
    return c;
  };
  std::vector<Config> trace;
  trace.push_back(toConfig());
  for (size_t i = 0; i < e.steps.size(); ++i) {
    const Step& s = e.steps[i];
    if (s.transition < 0 || s.transition >= (int)p.transitions.size())
      throw Error("replay: step " + std::to_string(i) + ": bad transition");
    if (s.actor < 0 || s.actor >= (int)st.size() || s.partner < 0 ||
        s.partner >= (int)st.size())
      throw Error("replay: step " + std::to_string(i) + ": bad agent id");
    if (s.actor == s.partner)
      throw Error("replay: step " + std::to_string(i) + ": actor observes itself");
    const Transition& tr = p.transitions[s.transition];
    if (st[s.actor] != tr.q1)
      throw Error("replay: step " + std::to_string(i) + ": actor not in '" +
                  p.states[tr.q1] + "'");
    if (st[s.partner] != tr.q2)
      throw Error("replay: step " + std::to_string(i) + ": partner not in '" +
                  p.states[tr.q2] + "'");
    st[s.actor] = tr.p1;
    st[s.partner] = tr.p2;
    trace.push_back(toConfig());
  }
  return trace;
}

DeanonExecution deanonymise(const Protocol& p, const Config& initial,
                            const std::vector<int>& transitionSeq,
                            std::uint64_t seed) {
  Rng rng(seed);
  DeanonExecution e;
  for (int q = 0; q < (int)initial.size(); ++q)
    for (int k = 0; k < initial[q]; ++k) e.initial.push_back(q);
  std::vector<StateId> st = e.initial;
  std::vector<int> pool;
  auto pick = [&](StateId q, int exclude) {
    pool.clear();
    for (int a = 0; a < (int)st.size(); ++a)
      if (st[a] == q && a != exclude) pool.push_back(a);
    if (pool.empty()) throw Error("deanonymise: no agent available in '" + p.states[q] + "'");
    return pool[(int)rng.below(pool.size())];
  };
  for (int t : transitionSeq) {
    const Transition& tr = p.transitions[t];
    int actor = pick(tr.q1, -1);
    int partner = pick(tr.q2, actor);
    e.steps.push_back({t, actor, partner});
    st[actor] = tr.p1;
    st[partner] = tr.p2;
  }
  return e;
}

Protocol product(const std::vector<Protocol>& components, const OutputMux& mux,
                 const std::string& name) {
  if (components.empty()) throw Error("product: no components");
  for (const auto& c : components) {
    c.validate();
    if (c.inputs.size() != 1)
      throw Error("product: component '" + c.name + "' must have a single input state");
  }
  int k = (int)components.size();
  long long total = 1;
  for (const auto& c : components) {
    total *= c.state_count();
    if (total > 2000000) throw Error("product: state space too large");
  }
  int n = (int)total;

  std::vector<int> stride(k);
  {
    long long acc = 1;
    for (int i = k - 1; i >= 0; --i) {
      stride[i] = (int)acc;
      acc *= components[i].state_count();
    }
  }
  auto decode = [&](int id, std::vector<int>& tup) {
    for (int i = 0; i < k; ++i) {
      tup[i] = id / stride[i];
      id %= stride[i];
    }
  };
  auto encode = [&](const std::vector<int>& tup) {
    long long id = 0;
    for (int i = 0; i < k; ++i) id += (long long)tup[i] * stride[i];
    return (int)id;
  };

  Protocol r;
  r.name = name;
  r.outputs = mux.outputs;
  r.states.reserve(n);
  r.outmap.reserve(n);
  std::vector<int> tup(k), outs(k);
  for (int id = 0; id < n; ++id) {
    decode(id, tup);
    std::string s = "(";
    for (int i = 0; i < k; ++i) {
      if (i) s += ",";
      s += components[i].states[tup[i]];
    }
    s += ")";
    r.states.push_back(std::move(s));
    for (int i = 0; i < k; ++i) outs[i] = components[i].outmap[tup[i]];
    int o = mux.pick(outs);
    if (o < 0 || o >= (int)mux.outputs.size())
      throw Error("product: output selector out of range");
    r.outmap.push_back(o);
  }
  {
    std::vector<int> in(k);
    for (int i = 0; i < k; ++i) in[i] = components[i].inputs[0];
    r.inputs.push_back(encode(in));
  }

  // Component transitions grouped by source pair for fast lookup.
  std::vector<std::vector<std::vector<const Transition*>>> byPair(k);
  for (int i = 0; i < k; ++i) {
    int m = components[i].state_count();
    byPair[i].assign((size_t)m * m, {});
    for (const auto& t : components[i].transitions)
      byPair[i][(size_t)t.q1 * m + t.q2].push_back(&t);
  }

  std::vector<int> u(k), v(k), pu(k), pv(k);
  std::vector<const std::vector<const Transition*>*> appl(k);
  for (int a = 0; a < n; ++a) {
    decode(a, u);
    for (int b = 0; b < n; ++b) {
      decode(b, v);
      bool any = false;
      for (int i = 0; i < k; ++i) {
        int m = components[i].state_count();
        appl[i] = &byPair[i][(size_t)u[i] * m + v[i]];
        if (!appl[i]->empty()) any = true;
      }
      if (!any) continue;
      // choice[i] ranges over {identity} + applicable transitions.
      std::vector<int> choice(k, 0);
      while (true) {
        bool allIdentity = true;
        for (int i = 0; i < k; ++i) {
          if (choice[i] == 0) {
            pu[i] = u[i];
            pv[i] = v[i];
          } else {
            const Transition* t = (*appl[i])[choice[i] - 1];
            pu[i] = t->p1;
            pv[i] = t->p2;
            allIdentity = false;
          }
        }
        if (!allIdentity) r.transitions.push_back({a, b, encode(pu), encode(pv)});
        int i = k - 1;
        while (i >= 0 && choice[i] == (int)appl[i]->size()) choice[i--] = 0;
        if (i < 0) break;
        choice[i]++;
      }
    }
  }
  std::sort(r.transitions.begin(), r.transitions.end());
  r.transitions.erase(std::unique(r.transitions.begin(), r.transitions.end()),
                      r.transitions.end());
  r.validate();
  return r;
}

Protocol trim_to_reachable(const Protocol& p) {
  int n = p.state_count();
  std::vector<char> reach(n, 0);
  for (StateId q : p.inputs) reach[q] = 1;
  bool changed = true;
  while (changed) {
    changed = false;
    for (const auto& t : p.transitions) {
      if (reach[t.q1] && reach[t.q2]) {
        if (!reach[t.p1]) reach[t.p1] = 1, changed = true;
        if (!reach[t.p2]) reach[t.p2] = 1, changed = true;
      }
    }
  }
  std::vector<int> remap(n, -1);
  Protocol r;
  r.name = p.name;
  r.outputs = p.outputs;
  for (int q = 0; q < n; ++q) {
    if (!reach[q]) continue;
    remap[q] = (int)r.states.size();
    r.states.push_back(p.states[q]);
    r.outmap.push_back(p.outmap[q]);
  }
  for (StateId q : p.inputs) r.inputs.push_back(remap[q]);
  for (const auto& t : p.transitions)
    if (reach[t.q1] && reach[t.q2])
      r.transitions.push_back({remap[t.q1], remap[t.q2], remap[t.p1], remap[t.p2]});
  std::sort(r.transitions.begin(), r.transitions.end());
  r.transitions.erase(std::unique(r.transitions.begin(), r.transitions.end()),
                      r.transitions.end());
  r.validate();
  return r;
}

}  // namespace pp
