#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

namespace sqlforge {

enum class TokenKind { identifier, quoted_identifier, integer, real, string, blob, symbol, end };

struct Token {
  TokenKind kind = TokenKind::end;
  std::string text;   // raw source text of the token
  std::string value;  // unquoted/unescaped payload for identifiers, strings and blobs
  std::size_t position = 0;

  bool is_symbol(std::string_view s) const { return kind == TokenKind::symbol && text == s; }
  // Case-insensitive match of a bare word.
  bool is_keyword(std::string_view kw) const;
};

// strict=true throws SyntaxError on unterminated strings/identifiers and on
// characters outside the dialect; strict=false never throws.
std::vector<Token> lex_sql(std::string_view text, bool strict = true);

bool is_reserved_word(std::string_view word);
// True when the (already folded) spelling can be emitted without quotes.
bool is_bare_identifier(std::string_view spelling);
// Stored spelling for a name taken from the schema: folded when folding keeps it bare.
std::string schema_identifier(std::string_view raw);

}  // namespace sqlforge
