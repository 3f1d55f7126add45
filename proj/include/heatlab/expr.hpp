#pragma once

#include <memory>
#include <optional>
#include <set>
#include <string>
#include <string_view>

namespace heatlab {

enum class Var { t, x, y, u, v };
enum class UnaryOp { neg, exp, ln, sin, cos, sqrt, abs };
enum class BinaryOp { add, sub, mul, div, pow };

struct ExprNode;
using ExprPtr = std::shared_ptr<const ExprNode>;  // immutable after construction

struct ExprNode {
    enum class Kind { constant, variable, unary, binary };
    Kind kind;
    double value = 0.0;  // Kind::constant
    Var var = Var::t;    // Kind::variable
    UnaryOp uop = UnaryOp::neg;
    BinaryOp bop = BinaryOp::add;
    ExprPtr lhs;  // unary operand / binary left
    ExprPtr rhs;  // binary right
};

ExprPtr make_constant(double value);  // negative values become neg(constant)
ExprPtr make_variable(Var var);
ExprPtr make_unary(UnaryOp op, ExprPtr operand);
ExprPtr make_binary(BinaryOp op, ExprPtr lhs, ExprPtr rhs);

// Grammar is documented in docs/expression_grammar.ebnf. Precedence from loosest
// to tightest: add/sub < mul/div < unary minus < pow (right-associative).
// Throws parse_error with a byte offset and an expected-token message.
ExprPtr parse_expr(std::string_view text);

// Minimal-parentheses rendering; parse(print(ast)) is structurally equal to ast.
std::string print_expr(const ExprPtr& ast);

bool expr_equal(const ExprPtr& a, const ExprPtr& b);

const char* var_name(Var v);

struct Bindings {
    std::optional<double> t, x, y, u, v;

    std::optional<double> get(Var var) const {
        switch (var) {
            case Var::t: return t;
            case Var::x: return x;
            case Var::y: return y;
            case Var::u: return u;
            case Var::v: return v;
        }
        return std::nullopt;
    }
};

// IEEE double evaluation. Division by zero, ln of a non-positive value, pow of
// a negative base with a non-integer exponent, and overflow all raise
// eval_error instead of returning NaN/inf. Unbound variables raise eval_error.
double eval(const ExprPtr& ast, const Bindings& b);

// Raw IEEE semantics: non-finite intermediates and results pass through
// untouched (quadrature internals rely on 1/(1+f) -> 0 as f -> inf).
// Unbound variables still raise eval_error.
double eval_unchecked(const ExprPtr& ast, const Bindings& b);

std::set<Var> variables_of(const ExprPtr& ast);

// Shortest round-trip decimal rendering, shared by the printer and file writers.
std::string format_double(double value);

}  // namespace heatlab
