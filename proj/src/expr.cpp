#include "heatlab/expr.hpp"

#include <cctype>
#include <charconv>
#include <cmath>
#include <stdexcept>

#include "heatlab/errors.hpp"

namespace heatlab {

namespace {

const double kPi = std::acos(-1.0);

ExprPtr node(ExprNode n) { return std::make_shared<const ExprNode>(std::move(n)); }

}  // namespace

ExprPtr make_constant(double value) {
    if (!std::isfinite(value)) throw std::invalid_argument("constant must be finite");
    if (value < 0.0) {
        // Canonical form keeps constant nodes nonnegative so printing stays a
        // parse fixed point ("-1" parses as neg(1)).
        return make_unary(UnaryOp::neg, make_constant(-value));
    }
    ExprNode n;
    n.kind = ExprNode::Kind::constant;
    n.value = value;
    return node(std::move(n));
}

ExprPtr make_variable(Var var) {
    ExprNode n;
    n.kind = ExprNode::Kind::variable;
    n.var = var;
    return node(std::move(n));
}

ExprPtr make_unary(UnaryOp op, ExprPtr operand) {
    ExprNode n;
    n.kind = ExprNode::Kind::unary;
    n.uop = op;
    n.lhs = std::move(operand);
    return node(std::move(n));
}

ExprPtr make_binary(BinaryOp op, ExprPtr lhs, ExprPtr rhs) {
    ExprNode n;
    n.kind = ExprNode::Kind::binary;
    n.bop = op;
    n.lhs = std::move(lhs);
    n.rhs = std::move(rhs);
    return node(std::move(n));
}

const char* var_name(Var v) {
    switch (v) {
        case Var::t: return "t";
        case Var::x: return "x";
        case Var::y: return "y";
        case Var::u: return "u";
        case Var::v: return "v";
    }
    return "?";
}

// ---------------------------------------------------------------------------
// Parser
// ---------------------------------------------------------------------------

namespace {

struct Token {
    enum class Kind { number, ident, plus, minus, star, slash, caret, lparen, rparen, end };
    Kind kind = Kind::end;
    std::size_t offset = 0;
    double value = 0.0;
    std::string text;
};

class Lexer {
public:
    explicit Lexer(std::string_view text) : text_(text) {}

    Token next() {
        while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) {
            ++pos_;
        }
        Token tok;
        tok.offset = pos_;
        if (pos_ >= text_.size()) {
            tok.kind = Token::Kind::end;
            return tok;
        }
        const char c = text_[pos_];
        switch (c) {
            case '+': tok.kind = Token::Kind::plus; ++pos_; return tok;
            case '-': tok.kind = Token::Kind::minus; ++pos_; return tok;
            case '*': tok.kind = Token::Kind::star; ++pos_; return tok;
            case '/': tok.kind = Token::Kind::slash; ++pos_; return tok;
            case '^': tok.kind = Token::Kind::caret; ++pos_; return tok;
            case '(': tok.kind = Token::Kind::lparen; ++pos_; return tok;
            case ')': tok.kind = Token::Kind::rparen; ++pos_; return tok;
            default: break;
        }
        if (std::isdigit(static_cast<unsigned char>(c))) {
            return lex_number(tok);
        }
        if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
            std::size_t start = pos_;
            while (pos_ < text_.size() &&
                   (std::isalnum(static_cast<unsigned char>(text_[pos_])) || text_[pos_] == '_')) {
                ++pos_;
            }
            tok.kind = Token::Kind::ident;
            tok.text = std::string(text_.substr(start, pos_ - start));
            return tok;
        }
        throw parse_error(pos_, "token",
                          "syntax error at offset " + std::to_string(pos_) +
                              ": unexpected character '" + std::string(1, c) + "'");
    }

private:
    Token lex_number(Token tok) {
        std::size_t end = pos_;
        while (end < text_.size() && std::isdigit(static_cast<unsigned char>(text_[end]))) ++end;
        if (end < text_.size() && text_[end] == '.') {
            ++end;
            while (end < text_.size() && std::isdigit(static_cast<unsigned char>(text_[end]))) {
                ++end;
            }
        }
        if (end < text_.size() && (text_[end] == 'e' || text_[end] == 'E')) {
            std::size_t exp = end + 1;
            if (exp < text_.size() && (text_[exp] == '+' || text_[exp] == '-')) ++exp;
            if (exp < text_.size() && std::isdigit(static_cast<unsigned char>(text_[exp]))) {
                end = exp;
                while (end < text_.size() &&
                       std::isdigit(static_cast<unsigned char>(text_[end]))) {
                    ++end;
                }
            }
        }
        double value = 0.0;
        auto res = std::from_chars(text_.data() + pos_, text_.data() + end, value);
        if (res.ec != std::errc() || res.ptr != text_.data() + end) {
            throw parse_error(pos_, "number",
                              "syntax error at offset " + std::to_string(pos_) +
                                  ": malformed number");
        }
        tok.kind = Token::Kind::number;
        tok.value = value;
        pos_ = end;
        return tok;
    }

    std::string_view text_;
    std::size_t pos_ = 0;
};

class Parser {
public:
    explicit Parser(std::string_view text) : lexer_(text) { advance(); }

    ExprPtr run() {
        ExprPtr e = parse_sum();
        if (cur_.kind != Token::Kind::end) {
            fail("end of input");
        }
        return e;
    }

private:
    void advance() { cur_ = lexer_.next(); }

    [[noreturn]] void fail(const std::string& expected) {
        throw parse_error(cur_.offset, expected,
                          "syntax error at offset " + std::to_string(cur_.offset) +
                              ": expected " + expected);
    }

    ExprPtr parse_sum() {
        ExprPtr lhs = parse_term();
        while (cur_.kind == Token::Kind::plus || cur_.kind == Token::Kind::minus) {
            const BinaryOp op =
                cur_.kind == Token::Kind::plus ? BinaryOp::add : BinaryOp::sub;
            advance();
            lhs = make_binary(op, std::move(lhs), parse_term());
        }
        return lhs;
    }

    ExprPtr parse_term() {
        ExprPtr lhs = parse_factor();
        while (cur_.kind == Token::Kind::star || cur_.kind == Token::Kind::slash) {
            const BinaryOp op =
                cur_.kind == Token::Kind::star ? BinaryOp::mul : BinaryOp::div;
            advance();
            lhs = make_binary(op, std::move(lhs), parse_factor());
        }
        return lhs;
    }

    // factor := '-' factor | power; unary minus binds looser than '^'.
    ExprPtr parse_factor() {
        if (cur_.kind == Token::Kind::minus) {
            advance();
            return make_unary(UnaryOp::neg, parse_factor());
        }
        return parse_power();
    }

    ExprPtr parse_power() {
        ExprPtr base = parse_primary();
        if (cur_.kind == Token::Kind::caret) {
            advance();
            return make_binary(BinaryOp::pow, std::move(base), parse_factor());
        }
        return base;
    }

    ExprPtr parse_primary() {
        if (cur_.kind == Token::Kind::number) {
            ExprPtr c = make_constant(cur_.value);
            advance();
            return c;
        }
        if (cur_.kind == Token::Kind::lparen) {
            advance();
            ExprPtr inner = parse_sum();
            if (cur_.kind != Token::Kind::rparen) fail("\")\"");
            advance();
            return inner;
        }
        if (cur_.kind == Token::Kind::ident) {
            const std::string name = cur_.text;
            const std::size_t offset = cur_.offset;
            advance();
            if (cur_.kind == Token::Kind::lparen) {
                const std::optional<UnaryOp> fn = function_by_name(name);
                if (!fn) {
                    throw parse_error(offset, "function name",
                                      "unknown identifier '" + name + "' at offset " +
                                          std::to_string(offset));
                }
                advance();
                ExprPtr arg = parse_sum();
                if (cur_.kind != Token::Kind::rparen) fail("\")\"");
                advance();
                return make_unary(*fn, std::move(arg));
            }
            if (name == "pi") return make_constant(kPi);
            const std::optional<Var> var = variable_by_name(name);
            if (!var) {
                throw parse_error(offset, "variable",
                                  "unknown identifier '" + name + "' at offset " +
                                      std::to_string(offset));
            }
            return make_variable(*var);
        }
        fail("expression");
    }

    static std::optional<UnaryOp> function_by_name(const std::string& name) {
        if (name == "exp") return UnaryOp::exp;
        if (name == "ln") return UnaryOp::ln;
        if (name == "sin") return UnaryOp::sin;
        if (name == "cos") return UnaryOp::cos;
        if (name == "sqrt") return UnaryOp::sqrt;
        if (name == "abs") return UnaryOp::abs;
        return std::nullopt;
    }

    static std::optional<Var> variable_by_name(const std::string& name) {
        if (name == "t") return Var::t;
        if (name == "x") return Var::x;
        if (name == "y") return Var::y;
        if (name == "u") return Var::u;
        if (name == "v") return Var::v;
        return std::nullopt;
    }

    Lexer lexer_;
    Token cur_;
};

}  // namespace

ExprPtr parse_expr(std::string_view text) { return Parser(text).run(); }

// ---------------------------------------------------------------------------
// Printer
// ---------------------------------------------------------------------------

std::string format_double(double value) {
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof(buf), value);
    return std::string(buf, res.ptr);
}

namespace {

// Precedence levels: sum=1, product=2, unary minus=3, pow=4, atoms=5.
int precedence(const ExprPtr& e) {
    switch (e->kind) {
        case ExprNode::Kind::constant:
        case ExprNode::Kind::variable:
            return 5;
        case ExprNode::Kind::unary:
            return e->uop == UnaryOp::neg ? 3 : 5;  // calls parenthesize themselves
        case ExprNode::Kind::binary:
            switch (e->bop) {
                case BinaryOp::add:
                case BinaryOp::sub: return 1;
                case BinaryOp::mul:
                case BinaryOp::div: return 2;
                case BinaryOp::pow: return 4;
            }
    }
    return 5;
}

const char* function_name(UnaryOp op) {
    switch (op) {
        case UnaryOp::neg: return "-";
        case UnaryOp::exp: return "exp";
        case UnaryOp::ln: return "ln";
        case UnaryOp::sin: return "sin";
        case UnaryOp::cos: return "cos";
        case UnaryOp::sqrt: return "sqrt";
        case UnaryOp::abs: return "abs";
    }
    return "?";
}

void print_node(const ExprPtr& e, std::string& out) {
    auto child = [&out](const ExprPtr& c, bool parens) {
        if (parens) out += '(';
        print_node(c, out);
        if (parens) out += ')';
    };
    switch (e->kind) {
        case ExprNode::Kind::constant:
            out += format_double(e->value);
            return;
        case ExprNode::Kind::variable:
            out += var_name(e->var);
            return;
        case ExprNode::Kind::unary:
            if (e->uop == UnaryOp::neg) {
                out += '-';
                child(e->lhs, precedence(e->lhs) < 3);
            } else {
                out += function_name(e->uop);
                out += '(';
                print_node(e->lhs, out);
                out += ')';
            }
            return;
        case ExprNode::Kind::binary: {
            const int prec = precedence(e);
            const char* op = nullptr;
            switch (e->bop) {
                case BinaryOp::add: op = "+"; break;
                case BinaryOp::sub: op = "-"; break;
                case BinaryOp::mul: op = "*"; break;
                case BinaryOp::div: op = "/"; break;
                case BinaryOp::pow: op = "^"; break;
            }
            const bool right_assoc = e->bop == BinaryOp::pow;
            child(e->lhs, right_assoc ? precedence(e->lhs) <= prec : precedence(e->lhs) < prec);
            out += op;
            child(e->rhs, right_assoc ? precedence(e->rhs) < prec : precedence(e->rhs) <= prec);
            return;
        }
    }
}

}  // namespace

std::string print_expr(const ExprPtr& ast) {
    std::string out;
    print_node(ast, out);
    return out;
}

bool expr_equal(const ExprPtr& a, const ExprPtr& b) {
    if (a == b) return true;
    if (!a || !b || a->kind != b->kind) return false;
    switch (a->kind) {
        case ExprNode::Kind::constant: return a->value == b->value;
        case ExprNode::Kind::variable: return a->var == b->var;
        case ExprNode::Kind::unary:
            return a->uop == b->uop && expr_equal(a->lhs, b->lhs);
        case ExprNode::Kind::binary:
            return a->bop == b->bop && expr_equal(a->lhs, b->lhs) && expr_equal(a->rhs, b->rhs);
    }
    return false;
}

// ---------------------------------------------------------------------------
// Evaluation
// ---------------------------------------------------------------------------

namespace {

bool is_integer(double x) { return std::isfinite(x) && x == std::floor(x); }

// Small integer exponents run by repeated multiplication; libm pow dominates
// the stepper's inner loop otherwise.
double pow_value(double base, double exponent) {
    if (is_integer(exponent) && std::abs(exponent) <= 8.0) {
        const int e = static_cast<int>(std::abs(exponent));
        double r = 1.0;
        for (int k = 0; k < e; ++k) r *= base;
        return exponent < 0.0 ? 1.0 / r : r;
    }
    return std::pow(base, exponent);
}

double eval_impl(const ExprNode& n, const Bindings& b, bool checked) {
    switch (n.kind) {
        case ExprNode::Kind::constant:
            return n.value;
        case ExprNode::Kind::variable: {
            const std::optional<double> bound = b.get(n.var);
            if (!bound) {
                throw eval_error(std::string("unbound variable '") + var_name(n.var) + "'");
            }
            return *bound;
        }
        case ExprNode::Kind::unary: {
            const double a = eval_impl(*n.lhs, b, checked);
            double r = 0.0;
            switch (n.uop) {
                case UnaryOp::neg: r = -a; break;
                case UnaryOp::exp: r = std::exp(a); break;
                case UnaryOp::ln:
                    if (checked && !(a > 0.0)) {
                        throw eval_error("non-finite result: ln of non-positive value " +
                                         format_double(a));
                    }
                    r = std::log(a);
                    break;
                case UnaryOp::sin: r = std::sin(a); break;
                case UnaryOp::cos: r = std::cos(a); break;
                case UnaryOp::sqrt:
                    if (checked && a < 0.0) {
                        throw eval_error("non-finite result: sqrt of negative value " +
                                         format_double(a));
                    }
                    r = std::sqrt(a);
                    break;
                case UnaryOp::abs: r = std::abs(a); break;
            }
            if (checked && !std::isfinite(r)) {
                throw eval_error(std::string("non-finite result in ") + function_name(n.uop));
            }
            return r;
        }
        case ExprNode::Kind::binary: {
            const double a = eval_impl(*n.lhs, b, checked);
            const double c = eval_impl(*n.rhs, b, checked);
            double r = 0.0;
            switch (n.bop) {
                case BinaryOp::add: r = a + c; break;
                case BinaryOp::sub: r = a - c; break;
                case BinaryOp::mul: r = a * c; break;
                case BinaryOp::div:
                    if (checked && c == 0.0) {
                        throw eval_error("non-finite result: division by zero");
                    }
                    r = a / c;
                    break;
                case BinaryOp::pow:
                    if (checked && a < 0.0 && !is_integer(c)) {
                        throw eval_error(
                            "non-finite result: pow of negative base with non-integer exponent");
                    }
                    r = pow_value(a, c);
                    break;
            }
            if (checked && !std::isfinite(r)) {
                throw eval_error("non-finite result in binary operation");
            }
            return r;
        }
    }
    throw eval_error("corrupt expression node");
}

}  // namespace

double eval(const ExprPtr& ast, const Bindings& b) { return eval_impl(*ast, b, true); }

double eval_unchecked(const ExprPtr& ast, const Bindings& b) {
    return eval_impl(*ast, b, false);
}

namespace {

void collect_vars(const ExprPtr& e, std::set<Var>& out) {
    if (!e) return;
    if (e->kind == ExprNode::Kind::variable) out.insert(e->var);
    collect_vars(e->lhs, out);
    collect_vars(e->rhs, out);
}

}  // namespace

std::set<Var> variables_of(const ExprPtr& ast) {
    std::set<Var> vars;
    collect_vars(ast, vars);
    return vars;
}

}  // namespace heatlab
