#pragma once

#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "hanf/formula.hpp"
#include "hanf/structure.hpp"

namespace hanf::test {

inline SignaturePtr sig_eu() {
  static const auto sig = make_signature({{"E", 2}, {"U", 1}});
  return sig;
}
inline SignaturePtr sig_u() {
  static const auto sig = make_signature({{"U", 1}});
  return sig;
}
inline SignaturePtr sig_e() {
  static const auto sig = make_signature({{"E", 2}});
  return sig;
}

inline Structure structure(const SignaturePtr& sig, const std::string& text) {
  return parse_structure(text, sig);
}

inline Formula formula(const std::string& text, const SignaturePtr& sig = sig_eu()) {
  return parse_formula(text, sig);
}

/// Path 0-1-...-(n-1) over {E}, one directed tuple per edge.
inline Structure path(std::uint32_t n, const SignaturePtr& sig = sig_e()) {
  StructureBuilder b(sig, n);
  for (Element i = 0; i + 1 < n; ++i) b.add("E", {i, i + 1});
  return b.build();
}

inline std::string read_text(const std::string& path) {
  std::ifstream in(path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

/// Non-empty lines not starting with '#'.
inline std::vector<std::string> read_lines(const std::string& path) {
  std::vector<std::string> out;
  std::istringstream in(read_text(path));
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    out.push_back(line);
  }
  return out;
}

}  // namespace hanf::test
