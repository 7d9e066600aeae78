#pragma once

#include <string>
#include <variant>

#include "ensurelab/core.hpp"
#include "ensurelab/sets.hpp"

namespace pp::text {

// Protocol file format:
//   protocol <name>
//   states: q0 q1 q2 q3
//   inputs: q1
//   outputs: false true
//   outmap: q0=false q1=false q2=false q3=true
//   trans: q1 q1 -> q0 q2
// '#' starts a comment; tokens are whitespace-separated.
Protocol parse_protocol(const std::string& src);
std::string format_protocol(const Protocol& p);

// Set file format, shared dims header:
//   dims: small large
//   cube: small[0,2] large[0,*]        (counting set; '*' = unbounded)
//   cone: base{x:1,y:2} period{x:3}    (semilinear set)
// A file contains cube lines or cone lines, not both.
using SetFile = std::variant<sets::CountingSet, sets::SemilinearSet>;
SetFile parse_set_file(const std::string& src);
std::string format_counting_set(const sets::CountingSet& s);
std::string format_semilinear_set(const sets::SemilinearSet& s);

// "q1:3,q2:1" -> dense config over p's states.
Config parse_config(const Protocol& p, const std::string& src);
std::string format_config(const Protocol& p, const Config& c);

// "(0,3,0,0)" style, for reports.
std::string format_counts(const Config& c);

std::string read_file(const std::string& path);
void write_file(const std::string& path, const std::string& content);

}  // namespace pp::text
