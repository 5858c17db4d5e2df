#include "sqlforge/error.hpp"

#include "sqlforge/text_util.hpp"

namespace sqlforge {

ValidationError::ValidationError(std::vector<std::string> violations)
    : Error("schema validation failed: " + join(violations, "; ")),
      violations_(std::move(violations)) {}

SyntaxError::SyntaxError(const std::string& message, std::size_t position)
    : Error("syntax error at position " + std::to_string(position) + ": " + message),
      position_(position) {}

UnsupportedError::UnsupportedError(const std::string& construct)
    : Error("unsupported construct: " + construct), construct_(construct) {}

AmbiguityError::AmbiguityError(const std::string& column, std::vector<std::string> candidates)
    : Error("ambiguous column '" + column + "' matches: " + join(candidates, ", ")),
      candidates_(std::move(candidates)) {}

}  // namespace sqlforge
