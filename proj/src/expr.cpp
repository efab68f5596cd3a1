#include "levcross/expr.hpp"

#include <cctype>
#include <cmath>
#include <cstdlib>
#include <sstream>

#include "levcross/errors.hpp"

namespace levcross::expr {

namespace {

enum class Op { add, sub, mul, div, pow, neg, num, var, exp, log, sqrt, abs, tanh };

const char* func_name(Op op) {
    switch (op) {
        case Op::exp: return "exp";
        case Op::log: return "log";
        case Op::sqrt: return "sqrt";
        case Op::abs: return "abs";
        case Op::tanh: return "tanh";
        default: return "?";
    }
}

}  // namespace

struct Expr::Node {
    Op op;
    double value = 0.0;  // op == num
    std::shared_ptr<const Node> lhs, rhs;

    std::string print() const {
        std::ostringstream os;
        switch (op) {
            case Op::num: {
                os.precision(17);
                os << value;
                break;
            }
            case Op::var: os << "x"; break;
            case Op::neg: os << "(-" << lhs->print() << ")"; break;
            case Op::add: os << "(" << lhs->print() << "+" << rhs->print() << ")"; break;
            case Op::sub: os << "(" << lhs->print() << "-" << rhs->print() << ")"; break;
            case Op::mul: os << "(" << lhs->print() << "*" << rhs->print() << ")"; break;
            case Op::div: os << "(" << lhs->print() << "/" << rhs->print() << ")"; break;
            case Op::pow: os << "(" << lhs->print() << "^" << rhs->print() << ")"; break;
            default: os << func_name(op) << "(" << lhs->print() << ")"; break;
        }
        return os.str();
    }
};

namespace {

using NodePtr = std::shared_ptr<const Expr::Node>;

NodePtr make_node(Op op, NodePtr lhs = nullptr, NodePtr rhs = nullptr, double v = 0.0) {
    auto n = std::make_shared<Expr::Node>();
    n->op = op;
    n->value = v;
    n->lhs = std::move(lhs);
    n->rhs = std::move(rhs);
    return n;
}

[[noreturn]] void domain_error(const Expr::Node& n, double x, const std::string& why) {
    raise(errc::numerical, "coeff_expr.eval",
          "domain error in '" + n.print() + "' at x=" + std::to_string(x) + ": " + why);
}

double eval_node(const Expr::Node& n, double x) {
    switch (n.op) {
        case Op::num: return n.value;
        case Op::var: return x;
        case Op::neg: return -eval_node(*n.lhs, x);
        case Op::add: return eval_node(*n.lhs, x) + eval_node(*n.rhs, x);
        case Op::sub: return eval_node(*n.lhs, x) - eval_node(*n.rhs, x);
        case Op::mul: return eval_node(*n.lhs, x) * eval_node(*n.rhs, x);
        case Op::div: return eval_node(*n.lhs, x) / eval_node(*n.rhs, x);
        case Op::pow: {
            double base = eval_node(*n.lhs, x);
            double ex = eval_node(*n.rhs, x);
            if (base == 0.0 && ex < 0.0) domain_error(n, x, "0 raised to a negative power");
            double r = std::pow(base, ex);
            if (std::isnan(r)) domain_error(n, x, "pow outside real domain");
            return r;
        }
        case Op::exp: return std::exp(eval_node(*n.lhs, x));
        case Op::log: {
            double a = eval_node(*n.lhs, x);
            if (a < 0.0) domain_error(n, x, "log of a negative value");
            return std::log(a);
        }
        case Op::sqrt: {
            double a = eval_node(*n.lhs, x);
            if (a < 0.0) domain_error(n, x, "sqrt of a negative value");
            return std::sqrt(a);
        }
        case Op::abs: return std::fabs(eval_node(*n.lhs, x));
        case Op::tanh: return std::tanh(eval_node(*n.lhs, x));
    }
    return 0.0;  // unreachable
}

class Parser {
public:
    // Owns a copy so strtod always sees a null-terminated buffer.
    explicit Parser(std::string_view src) : src_(src) {}

    NodePtr run() {
        NodePtr e = parse_expr();
        skip_ws();
        if (pos_ != src_.size()) fail("end of input");
        return e;
    }

private:
    std::string src_;
    size_t pos_ = 0;

    [[noreturn]] void fail(const std::string& expected) {
        raise(errc::validation, "coeff_expr.parse",
              "syntax error at offset " + std::to_string(pos_) + ", expected " + expected);
    }

    void skip_ws() {
        while (pos_ < src_.size() && std::isspace(static_cast<unsigned char>(src_[pos_]))) ++pos_;
    }

    bool eat(char c) {
        skip_ws();
        if (pos_ < src_.size() && src_[pos_] == c) {
            ++pos_;
            return true;
        }
        return false;
    }

    char peek() {
        skip_ws();
        return pos_ < src_.size() ? src_[pos_] : '\0';
    }

    NodePtr parse_expr() {
        NodePtr lhs = parse_term();
        while (true) {
            if (eat('+')) lhs = make_node(Op::add, lhs, parse_term());
            else if (eat('-')) lhs = make_node(Op::sub, lhs, parse_term());
            else return lhs;
        }
    }

    NodePtr parse_term() {
        NodePtr lhs = parse_unary();
        while (true) {
            if (eat('*')) lhs = make_node(Op::mul, lhs, parse_unary());
            else if (eat('/')) lhs = make_node(Op::div, lhs, parse_unary());
            else return lhs;
        }
    }

    NodePtr parse_unary() {
        if (eat('-')) return make_node(Op::neg, parse_unary());
        return parse_power();
    }

    // '^' is right associative and its exponent may carry a unary minus.
    NodePtr parse_power() {
        NodePtr base = parse_primary();
        if (eat('^')) return make_node(Op::pow, base, parse_unary());
        return base;
    }

    NodePtr parse_primary() {
        skip_ws();
        if (pos_ >= src_.size()) fail("a number, 'x', a function, or '('");
        char c = src_[pos_];
        if (c == '(') {
            ++pos_;
            NodePtr e = parse_expr();
            if (!eat(')')) fail("')'");
            return e;
        }
        if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return parse_number();
        if (std::isalpha(static_cast<unsigned char>(c))) return parse_ident();
        fail("a number, 'x', a function, or '('");
    }

    NodePtr parse_number() {
        const char* begin = src_.data() + pos_;
        char* end = nullptr;
        double v = std::strtod(begin, &end);
        if (end == begin) fail("a number");
        pos_ += static_cast<size_t>(end - begin);
        return make_node(Op::num, nullptr, nullptr, v);
    }

    NodePtr parse_ident() {
        size_t start = pos_;
        while (pos_ < src_.size() &&
               std::isalpha(static_cast<unsigned char>(src_[pos_]))) ++pos_;
        std::string name = src_.substr(start, pos_ - start);
        if (name == "x") return make_node(Op::var);
        Op op;
        if (name == "exp") op = Op::exp;
        else if (name == "log") op = Op::log;
        else if (name == "sqrt") op = Op::sqrt;
        else if (name == "abs") op = Op::abs;
        else if (name == "tanh") op = Op::tanh;
        else {
            pos_ = start;
            fail("'x' or one of exp, log, sqrt, abs, tanh");
        }
        if (!eat('(')) fail("'('");
        NodePtr arg = parse_expr();
        if (!eat(')')) fail("')'");
        return make_node(op, arg);
    }
};

}  // namespace

Expr Expr::parse(std::string_view src) {
    Expr e;
    e.root_ = Parser(src).run();
    return e;
}

double Expr::eval(double x) const {
    double r = eval_node(*root_, x);
    if (std::isnan(r)) {
        raise(errc::numerical, "coeff_expr.eval",
              "domain error in '" + root_->print() + "' at x=" + std::to_string(x) +
                  ": result is NaN");
    }
    return r;
}

std::string Expr::to_string() const { return root_->print(); }

}  // namespace levcross::expr
