#pragma once

#include <memory>
#include <string>
#include <string_view>

namespace levcross::expr {

// Parsed arithmetic expression in one variable x.
//
// Grammar (precedence low to high): + -  |  * /  |  unary -  |  ^ (right
// associative, binds tighter than unary minus)  |  literals, x, exp, log,
// sqrt, abs, tanh, parentheses. Whitespace is ignored.
class Expr {
public:
    // Throws error(errc::validation) with byte offset and expected token.
    static Expr parse(std::string_view src);

    // IEEE evaluation; domain violations (log/sqrt of a negative, 0^negative,
    // or any NaN produced by a subterm) throw error(errc::numerical) naming
    // the offending sub-expression.
    double eval(double x) const;

    // Produces text that parses back to an equivalent expression.
    std::string to_string() const;

    bool valid() const noexcept { return root_ != nullptr; }

    struct Node;

private:
    std::shared_ptr<const Node> root_;
};

}  // namespace levcross::expr
