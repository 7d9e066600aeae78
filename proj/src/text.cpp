#include "ensurelab/text.hpp"

#include <fstream>
#include <sstream>

namespace pp::text {

namespace {

std::vector<std::string> tokenize_line(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  for (char ch : line) {
    if (ch == '#') break;
    if (isspace((unsigned char)ch)) {
      if (!cur.empty()) out.push_back(std::move(cur)), cur.clear();
    } else {
      cur += ch;
    }
  }
  if (!cur.empty()) out.push_back(std::move(cur));
  return out;
}

int parse_nat(const std::string& s, const std::string& what) {
  if (s.empty()) throw ParseError("expected a number for " + what);
  for (char c : s)
    if (!isdigit((unsigned char)c))
      throw ParseError("bad number '" + s + "' for " + what);
  long long v = 0;
  for (char c : s) {
    v = v * 10 + (c - '0');
    if (v > sets::kInf / 2) throw ParseError("number too large: '" + s + "'");
  }
  return (int)v;
}

}  // namespace

Protocol parse_protocol(const std::string& src) {
  Protocol p;
  bool sawName = false;
  std::vector<std::array<std::string, 4>> rawTrans;
  std::vector<std::pair<std::string, std::string>> rawOutmap;
  std::vector<std::string> rawInputs;

  std::istringstream in(src);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    auto tok = tokenize_line(line);
    if (tok.empty()) continue;
    auto err = [&](const std::string& msg) {
      throw ParseError("line " + std::to_string(lineno) + ": " + msg);
    };
    const std::string& head = tok[0];
    if (head == "protocol") {
      if (tok.size() != 2) err("expected: protocol <name>");
      p.name = tok[1];
      sawName = true;
    } else if (head == "states:") {
      p.states.assign(tok.begin() + 1, tok.end());
    } else if (head == "inputs:") {
      rawInputs.assign(tok.begin() + 1, tok.end());
    } else if (head == "outputs:") {
      p.outputs.assign(tok.begin() + 1, tok.end());
    } else if (head == "outmap:") {
      for (size_t i = 1; i < tok.size(); ++i) {
        auto eq = tok[i].find('=');
        if (eq == std::string::npos) err("outmap entry needs state=output");
        rawOutmap.push_back({tok[i].substr(0, eq), tok[i].substr(eq + 1)});
      }
    } else if (head == "trans:") {
      if (tok.size() != 6 || tok[3] != "->") err("expected: trans: q1 q2 -> p1 p2");
      rawTrans.push_back({tok[1], tok[2], tok[4], tok[5]});
    } else {
      err("unknown directive '" + head + "'");
    }
  }
  if (!sawName) throw ParseError("missing 'protocol <name>' line");
  if (p.states.empty()) throw ParseError("missing 'states:' line");
  auto stateIdx = [&](const std::string& s) {
    int i = p.state_index(s);
    if (i < 0) throw ParseError("unknown state '" + s + "'");
    return i;
  };
  for (const auto& s : rawInputs) p.inputs.push_back(stateIdx(s));
  p.outmap.assign(p.states.size(), -1);
  for (const auto& [st, out] : rawOutmap) {
    int q = stateIdx(st);
    int o = p.output_index(out);
    if (o < 0) throw ParseError("unknown output '" + out + "'");
    p.outmap[q] = o;
  }
  for (size_t q = 0; q < p.states.size(); ++q)
    if (p.outmap[q] < 0)
      throw ParseError("state '" + p.states[q] + "' missing from outmap");
  for (const auto& t : rawTrans)
    p.transitions.push_back(
        {stateIdx(t[0]), stateIdx(t[1]), stateIdx(t[2]), stateIdx(t[3])});
  try {
    p.validate();
  } catch (const Error& e) {
    throw ParseError(e.what());
  }
  return p;
}

std::string format_protocol(const Protocol& p) {
  std::ostringstream out;
  out << "protocol " << p.name << "\n";
  out << "states:";
  for (const auto& s : p.states) out << " " << s;
  out << "\ninputs:";
  for (StateId q : p.inputs) out << " " << p.states[q];
  out << "\noutputs:";
  for (const auto& o : p.outputs) out << " " << o;
  out << "\noutmap:";
  for (size_t q = 0; q < p.states.size(); ++q)
    out << " " << p.states[q] << "=" << p.outputs[p.outmap[q]];
  out << "\n";
  for (const auto& t : p.transitions)
    out << "trans: " << p.states[t.q1] << " " << p.states[t.q2] << " -> "
        << p.states[t.p1] << " " << p.states[t.p2] << "\n";
  return out.str();
}

namespace {

// name[lo,hi] with '*' for an unbounded hi.
void parse_cube_atom(const std::string& tok, const std::vector<std::string>& dims,
                     sets::Cube& cube) {
  auto lb = tok.find('[');
  auto comma = tok.find(',', lb);
  auto rb = tok.find(']', lb);
  if (lb == std::string::npos || comma == std::string::npos ||
      rb == std::string::npos || rb + 1 != tok.size())
    throw ParseError("bad cube bound '" + tok + "', expected name[lo,hi]");
  std::string name = tok.substr(0, lb);
  std::string lo = tok.substr(lb + 1, comma - lb - 1);
  std::string hi = tok.substr(comma + 1, rb - comma - 1);
  int d = -1;
  for (size_t i = 0; i < dims.size(); ++i)
    if (dims[i] == name) d = (int)i;
  if (d < 0) throw ParseError("unknown dimension '" + name + "'");
  cube.lo[d] = parse_nat(lo, "lower bound");
  cube.hi[d] = hi == "*" ? sets::kInf : parse_nat(hi, "upper bound");
  if (cube.hi[d] < sets::kInf / 2 && cube.lo[d] > cube.hi[d])
    throw ParseError("empty bound in '" + tok + "'");
}

// base{x:1,y:2} or period{x:3}; empty braces allowed.
std::vector<int> parse_multiset_atom(const std::string& body,
                                     const std::vector<std::string>& dims) {
  std::vector<int> v(dims.size(), 0);
  if (body.empty()) return v;
  std::istringstream in(body);
  std::string item;
  while (std::getline(in, item, ',')) {
    auto colon = item.find(':');
    if (colon == std::string::npos)
      throw ParseError("bad multiset entry '" + item + "', expected name:count");
    std::string name = item.substr(0, colon);
    int d = -1;
    for (size_t i = 0; i < dims.size(); ++i)
      if (dims[i] == name) d = (int)i;
    if (d < 0) throw ParseError("unknown dimension '" + name + "'");
    v[d] += parse_nat(item.substr(colon + 1), "count");
  }
  return v;
}

}  // namespace

SetFile parse_set_file(const std::string& src) {
  std::vector<std::string> dims;
  std::vector<sets::Cube> cubes;
  std::vector<sets::LinearSet> cones;

  std::istringstream in(src);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    auto tok = tokenize_line(line);
    if (tok.empty()) continue;
    auto err = [&](const std::string& msg) {
      throw ParseError("line " + std::to_string(lineno) + ": " + msg);
    };
    if (tok[0] == "dims:") {
      dims.assign(tok.begin() + 1, tok.end());
      if (dims.empty()) err("dims: needs at least one dimension");
    } else if (tok[0] == "cube:") {
      if (dims.empty()) err("cube before dims");
      sets::Cube c = sets::full_cube((int)dims.size());
      for (size_t i = 1; i < tok.size(); ++i) parse_cube_atom(tok[i], dims, c);
      cubes.push_back(std::move(c));
    } else if (tok[0] == "cone:") {
      if (dims.empty()) err("cone before dims");
      sets::LinearSet cone;
      cone.base.assign(dims.size(), 0);
      bool sawBase = false;
      for (size_t i = 1; i < tok.size(); ++i) {
        const std::string& t = tok[i];
        auto lb = t.find('{');
        auto rb = t.rfind('}');
        if (lb == std::string::npos || rb == std::string::npos || rb + 1 != t.size())
          err("expected base{...} or period{...}, got '" + t + "'");
        std::string kind = t.substr(0, lb);
        std::string body = t.substr(lb + 1, rb - lb - 1);
        if (kind == "base") {
          if (sawBase) err("duplicate base in cone");
          cone.base = parse_multiset_atom(body, dims);
          sawBase = true;
        } else if (kind == "period") {
          cone.periods.push_back(parse_multiset_atom(body, dims));
        } else {
          err("expected base{...} or period{...}, got '" + t + "'");
        }
      }
      if (!sawBase) err("cone needs a base{...}");
      cones.push_back(std::move(cone));
    } else {
      err("unknown directive '" + tok[0] + "'");
    }
  }
  if (dims.empty()) throw ParseError("missing 'dims:' line");
  if (!cubes.empty() && !cones.empty())
    throw ParseError("a set file holds cubes or cones, not both");
  if (!cones.empty()) return sets::SemilinearSet{dims, std::move(cones)};
  return sets::CountingSet{dims, std::move(cubes)};
}

std::string format_counting_set(const sets::CountingSet& s) {
  std::ostringstream out;
  out << "dims:";
  for (const auto& d : s.dims) out << " " << d;
  out << "\n";
  for (const auto& c : s.cubes) {
    out << "cube:";
    for (size_t i = 0; i < s.dims.size(); ++i) {
      out << " " << s.dims[i] << "[" << c.lo[i] << ",";
      if (c.hi[i] >= sets::kInf / 2)
        out << "*";
      else
        out << c.hi[i];
      out << "]";
    }
    out << "\n";
  }
  return out.str();
}

std::string format_semilinear_set(const sets::SemilinearSet& s) {
  std::ostringstream out;
  out << "dims:";
  for (const auto& d : s.dims) out << " " << d;
  out << "\n";
  auto multiset = [&](const std::vector<int>& v) {
    std::string r;
    bool first = true;
    for (size_t i = 0; i < v.size(); ++i) {
      if (v[i] == 0) continue;
      if (!first) r += ",";
      r += s.dims[i] + ":" + std::to_string(v[i]);
      first = false;
    }
    return r;
  };
  for (const auto& c : s.cones) {
    out << "cone: base{" << multiset(c.base) << "}";
    for (const auto& v : c.periods) out << " period{" << multiset(v) << "}";
    out << "\n";
  }
  return out.str();
}

Config parse_config(const Protocol& p, const std::string& src) {
  Config c(p.state_count(), 0);
  // Product states carry commas inside parentheses, so entries split only
  // on commas at depth zero and the count follows the last colon.
  std::vector<std::string> items;
  std::string cur;
  int depth = 0;
  for (char ch : src) {
    if (ch == '(') depth++;
    if (ch == ')') depth--;
    if (ch == ',' && depth == 0) {
      items.push_back(std::move(cur));
      cur.clear();
    } else {
      cur += ch;
    }
  }
  items.push_back(std::move(cur));
  for (const std::string& item : items) {
    if (item.empty()) continue;
    auto colon = item.rfind(':');
    if (colon == std::string::npos)
      throw ParseError("bad config entry '" + item + "', expected state:count");
    std::string name = item.substr(0, colon);
    int q = p.state_index(name);
    if (q < 0) throw ParseError("unknown state '" + name + "'");
    c[q] += parse_nat(item.substr(colon + 1), "count");
  }
  return c;
}

std::string format_config(const Protocol& p, const Config& c) {
  std::string out;
  for (int q = 0; q < (int)c.size(); ++q) {
    if (c[q] == 0) continue;
    if (!out.empty()) out += ",";
    out += p.states[q] + ":" + std::to_string(c[q]);
  }
  return out.empty() ? "empty" : out;
}

std::string format_counts(const Config& c) {
  std::string out = "(";
  for (size_t i = 0; i < c.size(); ++i) {
    if (i) out += ",";
    out += std::to_string(c[i]);
  }
  return out + ")";
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError("cannot open file: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write file: " + path);
  out << content;
}

}  // namespace pp::text
