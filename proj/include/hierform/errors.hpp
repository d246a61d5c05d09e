#pragma once
#include <cstddef>
#include <stdexcept>
#include <string>

namespace hierform {

// byte range within an input string, for error reporting
struct Span {
  std::size_t begin = 0;
  std::size_t end = 0;
};

struct ParseError : std::runtime_error {
  Span span;
  ParseError(const std::string& msg, Span s) : std::runtime_error(msg), span(s) {}
  explicit ParseError(const std::string& msg) : std::runtime_error(msg) {}
};

struct ValidationError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct DataError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct SamplerError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// prefix a caret excerpt of the offending region:  "... msg\n  y ~ x +\n        ^"
inline std::string format_parse_error(const std::string& text, const ParseError& e) {
  std::string out = e.what();
  if (e.span.begin <= text.size()) {
    out += "\n  " + text + "\n  ";
    for (std::size_t i = 0; i < e.span.begin; ++i) out += ' ';
    std::size_t n = e.span.end > e.span.begin ? e.span.end - e.span.begin : 1;
    for (std::size_t i = 0; i < n && i + e.span.begin <= text.size(); ++i) out += '^';
  }
  return out;
}

}  // namespace hierform
