#pragma once

#include <memory>
#include <string>
#include <string_view>
#include <vector>

#include "core/value.hpp"

namespace agentest::behavior {

// Side-effect-free boolean expression over task context variables.
//
//   expr    := or
//   or      := and (("||" | "or") and)*
//   and     := unary (("&&" | "and") unary)*
//   unary   := ("!" | "not") unary | compare
//   compare := operand (("==" | "!=" | "<" | "<=" | ">" | ">=") operand)?
//   operand := number | string | true | false | null | path | "(" expr ")"
//   path    := ident ("." ident)*
//
// An empty guard is always true. Unbound paths evaluate to null.
class Guard {
public:
    Guard() = default;

    // Throws Error(invalid_model) on a syntax error.
    static Guard parse(std::string_view text);

    // Throws Error(guard_error) when the expression is ill-typed for the given
    // scope (ordering a string against a number, a non-bool in a boolean slot).
    bool evaluate(const Value& scope) const;

    const std::string& text() const noexcept { return text_; }
    bool always_true() const noexcept { return !root_; }
    // First segment of every path the guard reads.
    std::vector<std::string> variables() const;

    struct Node;

private:
    std::shared_ptr<const Node> root_;
    std::string text_;
};

} // namespace agentest::behavior
