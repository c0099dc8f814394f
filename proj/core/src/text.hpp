#pragma once

#include <charconv>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "hanf/errors.hpp"

namespace hanf::detail {

struct Token {
  std::string_view text;
  std::size_t line;
  std::size_t column;
};

/// Splits line-oriented input into whitespace-separated tokens per line,
/// dropping blank lines and lines whose first token starts with '#'.
inline std::vector<std::vector<Token>> tokenize_lines(std::string_view text) {
  std::vector<std::vector<Token>> lines;
  std::size_t line_no = 1;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    auto end = text.find('\n', pos);
    if (end == std::string_view::npos) end = text.size();
    std::string_view line = text.substr(pos, end - pos);
    std::vector<Token> toks;
    std::size_t i = 0;
    while (i < line.size()) {
      while (i < line.size() && (line[i] == ' ' || line[i] == '\t' || line[i] == '\r')) ++i;
      if (i >= line.size()) break;
      std::size_t j = i;
      while (j < line.size() && line[j] != ' ' && line[j] != '\t' && line[j] != '\r') ++j;
      toks.push_back({line.substr(i, j - i), line_no, i + 1});
      i = j;
    }
    if (!toks.empty() && toks.front().text.front() != '#') lines.push_back(std::move(toks));
    ++line_no;
    if (end == text.size()) break;
    pos = end + 1;
  }
  return lines;
}

inline std::uint64_t parse_uint(const Token& tok, const char* what) {
  std::uint64_t value = 0;
  auto [ptr, ec] = std::from_chars(tok.text.data(), tok.text.data() + tok.text.size(), value);
  if (ec != std::errc() || ptr != tok.text.data() + tok.text.size()) {
    throw ParseError(std::string("expected ") + what + ", got '" + std::string(tok.text) + "'",
                     tok.line, tok.column);
  }
  return value;
}

}  // namespace hanf::detail
