#pragma once
#include <cctype>
#include <cstdlib>
#include <string>
#include <vector>

#include "hierform/errors.hpp"

namespace hierform {

enum class Tok {
  Ident, Number, Tilde, Plus, Minus, Star, Slash, Colon,
  Bar, DblBar, Hat, LParen, RParen, Comma, Equals, End
};

struct Token {
  Tok kind;
  std::string text;
  double num = 0.0;
  Span span;
};

inline const char* tok_name(Tok t) {
  switch (t) {
    case Tok::Ident: return "identifier";
    case Tok::Number: return "number";
    case Tok::Tilde: return "'~'";
    case Tok::Plus: return "'+'";
    case Tok::Minus: return "'-'";
    case Tok::Star: return "'*'";
    case Tok::Slash: return "'/'";
    case Tok::Colon: return "':'";
    case Tok::Bar: return "'|'";
    case Tok::DblBar: return "'||'";
    case Tok::Hat: return "'^'";
    case Tok::LParen: return "'('";
    case Tok::RParen: return "')'";
    case Tok::Comma: return "','";
    case Tok::Equals: return "'='";
    case Tok::End: return "end of formula";
  }
  return "?";
}

inline bool ident_start(char c) {
  return std::isalpha(static_cast<unsigned char>(c)) || c == '.' || c == '_';
}
inline bool ident_char(char c) {
  return std::isalnum(static_cast<unsigned char>(c)) || c == '.' || c == '_';
}

inline std::vector<Token> lex_formula(const std::string& text) {
  std::vector<Token> out;
  std::size_t i = 0;
  const std::size_t n = text.size();
  while (i < n) {
    char c = text[i];
    if (c == ' ' || c == '\t' || c == '\n' || c == '\r') {
      ++i;
      continue;
    }
    Token t;
    t.span.begin = i;
    if (ident_start(c)) {
      std::size_t j = i;
      while (j < n && ident_char(text[j])) ++j;
      t.kind = Tok::Ident;
      t.text = text.substr(i, j - i);
      i = j;
    } else if (std::isdigit(static_cast<unsigned char>(c)) ||
               (c == '.' && i + 1 < n && std::isdigit(static_cast<unsigned char>(text[i + 1])))) {
      std::size_t j = i;
      while (j < n && std::isdigit(static_cast<unsigned char>(text[j]))) ++j;
      if (j < n && text[j] == '.') {
        ++j;
        while (j < n && std::isdigit(static_cast<unsigned char>(text[j]))) ++j;
      }
      if (j < n && (text[j] == 'e' || text[j] == 'E')) {
        std::size_t k = j + 1;
        if (k < n && (text[k] == '+' || text[k] == '-')) ++k;
        if (k < n && std::isdigit(static_cast<unsigned char>(text[k]))) {
          while (k < n && std::isdigit(static_cast<unsigned char>(text[k]))) ++k;
          j = k;
        }
      }
      t.kind = Tok::Number;
      t.text = text.substr(i, j - i);
      t.num = std::strtod(t.text.c_str(), nullptr);
      i = j;
    } else {
      switch (c) {
        case '~': t.kind = Tok::Tilde; break;
        case '+': t.kind = Tok::Plus; break;
        case '-': t.kind = Tok::Minus; break;
        case '*': t.kind = Tok::Star; break;
        case '/': t.kind = Tok::Slash; break;
        case ':': t.kind = Tok::Colon; break;
        case '^': t.kind = Tok::Hat; break;
        case '(': t.kind = Tok::LParen; break;
        case ')': t.kind = Tok::RParen; break;
        case ',': t.kind = Tok::Comma; break;
        case '=': t.kind = Tok::Equals; break;
        case '|':
          if (i + 1 < n && text[i + 1] == '|') {
            t.kind = Tok::DblBar;
            ++i;
          } else {
            t.kind = Tok::Bar;
          }
          break;
        default:
          throw ParseError(std::string("unexpected character '") + c + "' in formula",
                           Span{i, i + 1});
      }
      t.text = text.substr(t.span.begin, i + 1 - t.span.begin);
      ++i;
    }
    t.span.end = i;
    out.push_back(std::move(t));
  }
  Token end;
  end.kind = Tok::End;
  end.span = Span{n, n};
  out.push_back(end);
  return out;
}

}  // namespace hierform
