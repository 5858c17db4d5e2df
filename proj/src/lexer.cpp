#include "sqlforge/lexer.hpp"

#include <algorithm>
#include <array>
#include <cctype>

#include "sqlforge/error.hpp"
#include "sqlforge/text_util.hpp"

namespace sqlforge {

namespace {

constexpr std::array<std::string_view, 60> kReserved = {
    "ALL",        "AND",     "AS",      "ASC",       "BETWEEN", "BY",       "CASE",      "CAST",
    "COLLATE",    "CROSS",   "CURRENT_DATE", "CURRENT_TIME", "CURRENT_TIMESTAMP", "DESC",
    "DISTINCT",   "ELSE",    "END",     "ESCAPE",    "EXCEPT",  "EXISTS",   "FALSE",     "FILTER",
    "FROM",       "FULL",    "GLOB",    "GROUP",     "HAVING",  "IN",       "INNER",     "INTERSECT",
    "IS",         "ISNULL",  "JOIN",    "LEFT",      "LIKE",    "LIMIT",    "MATCH",     "NATURAL",
    "NOT",        "NOTNULL", "NULL",    "OFFSET",    "ON",      "OR",       "ORDER",     "OUTER",
    "OVER",       "PARTITION", "REGEXP", "RIGHT",    "SELECT",  "THEN",     "TRUE",      "UNION",
    "USING",      "VALUES",  "WHEN",    "WHERE",     "WINDOW",  "WITH",
};

bool ident_start(char c) {
  return std::isalpha(static_cast<unsigned char>(c)) || c == '_' || static_cast<unsigned char>(c) >= 0x80;
}
bool ident_char(char c) {
  return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '$' ||
         static_cast<unsigned char>(c) >= 0x80;
}

}  // namespace

bool Token::is_keyword(std::string_view kw) const {
  return kind == TokenKind::identifier && iequals(text, kw);
}

bool is_reserved_word(std::string_view word) {
  std::string up = to_upper(word);
  return std::find(kReserved.begin(), kReserved.end(), up) != kReserved.end();
}

bool is_bare_identifier(std::string_view s) {
  if (s.empty() || !(std::islower(static_cast<unsigned char>(s[0])) || s[0] == '_')) return false;
  for (char c : s) {
    if (!(std::islower(static_cast<unsigned char>(c)) || std::isdigit(static_cast<unsigned char>(c)) || c == '_'))
      return false;
  }
  return !is_reserved_word(s);
}

std::string schema_identifier(std::string_view raw) {
  std::string folded = to_lower(raw);
  return is_bare_identifier(folded) ? folded : std::string(raw);
}

std::vector<Token> lex_sql(std::string_view s, bool strict) {
  std::vector<Token> out;
  std::size_t i = 0;
  const std::size_t n = s.size();
  auto emit = [&](TokenKind k, std::size_t start, std::size_t end, std::string value = {}) {
    Token t;
    t.kind = k;
    t.text = std::string(s.substr(start, end - start));
    t.value = std::move(value);
    t.position = start;
    out.push_back(std::move(t));
  };

  while (i < n) {
    char c = s[i];
    if (std::isspace(static_cast<unsigned char>(c))) {
      ++i;
      continue;
    }
    if (c == '-' && i + 1 < n && s[i + 1] == '-') {
      while (i < n && s[i] != '\n') ++i;
      continue;
    }
    if (c == '/' && i + 1 < n && s[i + 1] == '*') {
      std::size_t end = s.find("*/", i + 2);
      i = end == std::string_view::npos ? n : end + 2;
      continue;
    }
    std::size_t start = i;
    // Blob literal X'..'
    if ((c == 'x' || c == 'X') && i + 1 < n && s[i + 1] == '\'') {
      std::size_t end = s.find('\'', i + 2);
      if (end == std::string_view::npos) {
        if (strict) throw SyntaxError("unterminated blob literal", start);
        emit(TokenKind::blob, start, n, std::string(s.substr(i + 2)));
        break;
      }
      emit(TokenKind::blob, start, end + 1, std::string(s.substr(i + 2, end - i - 2)));
      i = end + 1;
      continue;
    }
    if (ident_start(c)) {
      while (i < n && ident_char(s[i])) ++i;
      emit(TokenKind::identifier, start, i, std::string(s.substr(start, i - start)));
      continue;
    }
    if (std::isdigit(static_cast<unsigned char>(c)) ||
        (c == '.' && i + 1 < n && std::isdigit(static_cast<unsigned char>(s[i + 1])))) {
      bool real = false;
      while (i < n && std::isdigit(static_cast<unsigned char>(s[i]))) ++i;
      if (i < n && s[i] == '.') {
        real = true;
        ++i;
        while (i < n && std::isdigit(static_cast<unsigned char>(s[i]))) ++i;
      }
      if (i < n && (s[i] == 'e' || s[i] == 'E')) {
        std::size_t j = i + 1;
        if (j < n && (s[j] == '+' || s[j] == '-')) ++j;
        if (j < n && std::isdigit(static_cast<unsigned char>(s[j]))) {
          real = true;
          i = j;
          while (i < n && std::isdigit(static_cast<unsigned char>(s[i]))) ++i;
        }
      }
      emit(real ? TokenKind::real : TokenKind::integer, start, i);
      continue;
    }
    if (c == '\'' || c == '"' || c == '`' || c == '[') {
      char close = c == '[' ? ']' : c;
      std::string value;
      ++i;
      bool closed = false;
      while (i < n) {
        if (s[i] == close) {
          if (close != ']' && i + 1 < n && s[i + 1] == close) {
            value += close;
            i += 2;
            continue;
          }
          ++i;
          closed = true;
          break;
        }
        value += s[i++];
      }
      if (!closed && strict) {
        throw SyntaxError(c == '\'' ? "unterminated string literal" : "unterminated quoted identifier",
                          start);
      }
      emit(c == '\'' ? TokenKind::string : TokenKind::quoted_identifier, start, i, std::move(value));
      continue;
    }
    static constexpr std::string_view two[] = {"<=", ">=", "<>", "!=", "==", "||", "<<", ">>"};
    bool matched = false;
    for (auto op : two) {
      if (s.substr(i, 2) == op) {
        emit(TokenKind::symbol, start, i + 2);
        i += 2;
        matched = true;
        break;
      }
    }
    if (matched) continue;
    static constexpr std::string_view one = "(),.;=<>+-*/%&|~";
    if (one.find(c) != std::string_view::npos) {
      emit(TokenKind::symbol, start, i + 1);
      ++i;
      continue;
    }
    if (strict) throw SyntaxError(std::string("unexpected character '") + c + "'", start);
    emit(TokenKind::symbol, start, i + 1);
    ++i;
  }
  Token end;
  end.kind = TokenKind::end;
  end.position = n;
  out.push_back(end);
  return out;
}

}  // namespace sqlforge
