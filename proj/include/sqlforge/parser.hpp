#pragma once

#include <string_view>

#include "sqlforge/ast.hpp"

namespace sqlforge {

// Parses one SELECT statement of the supported dialect subset.
// Throws SyntaxError (with position) or UnsupportedError (naming the construct).
//
// Compound queries follow the engine's rules: ORDER BY / LIMIT after a compound
// apply to the whole compound, which is represented as
// "SELECT * FROM (<compound>) ORDER BY ...". A compound operand written as
// "SELECT * FROM (<query>)" is folded back to <query>; the renderer emits that
// form for operands that cannot appear bare.
ast::SqlAst parse_sql(std::string_view text);

}  // namespace sqlforge
