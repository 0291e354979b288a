#include "greenbvp/expression.hpp"

#include <cctype>
#include <charconv>
#include <cmath>
#include <numbers>
#include <sstream>
#include <vector>

#include "greenbvp/error.hpp"

namespace greenbvp {

struct Expression::Node {
    enum class Kind { number, time, state, component, norm, unary_minus, add, sub, mul, div, pow, call };
    Kind kind = Kind::number;
    double value = 0.0;
    std::size_t index = 0;
    double (*fn)(double) = nullptr;
    std::shared_ptr<const Node> lhs, rhs;

    double eval(double t, const Eigen::VectorXd* x, std::size_t comp) const {
        switch (kind) {
            case Kind::number: return value;
            case Kind::time: return t;
            case Kind::state: return (*x)[static_cast<Eigen::Index>(comp)];
            case Kind::component: return (*x)[static_cast<Eigen::Index>(index)];
            case Kind::norm: return x->norm();
            case Kind::unary_minus: return -lhs->eval(t, x, comp);
            case Kind::add: return lhs->eval(t, x, comp) + rhs->eval(t, x, comp);
            case Kind::sub: return lhs->eval(t, x, comp) - rhs->eval(t, x, comp);
            case Kind::mul: return lhs->eval(t, x, comp) * rhs->eval(t, x, comp);
            case Kind::div: return lhs->eval(t, x, comp) / rhs->eval(t, x, comp);
            case Kind::pow: return std::pow(lhs->eval(t, x, comp), rhs->eval(t, x, comp));
            case Kind::call: return fn(lhs->eval(t, x, comp));
        }
        return 0.0;
    }
};

namespace {

using NodePtr = std::shared_ptr<const Expression::Node>;
using Kind = Expression::Node::Kind;

struct Function {
    std::string_view name;
    double (*fn)(double);
};

const Function kFunctions[] = {
    {"exp", [](double v) { return std::exp(v); }},   {"log", [](double v) { return std::log(v); }},
    {"sqrt", [](double v) { return std::sqrt(v); }}, {"abs", [](double v) { return std::abs(v); }},
    {"sin", [](double v) { return std::sin(v); }},   {"cos", [](double v) { return std::cos(v); }},
    {"tan", [](double v) { return std::tan(v); }},   {"sinh", [](double v) { return std::sinh(v); }},
    {"cosh", [](double v) { return std::cosh(v); }}, {"tanh", [](double v) { return std::tanh(v); }},
    {"atan", [](double v) { return std::atan(v); }},
};

NodePtr leaf(Kind kind, double value = 0.0, std::size_t index = 0) {
    auto n = std::make_shared<Expression::Node>();
    n->kind = kind;
    n->value = value;
    n->index = index;
    return n;
}

NodePtr branch(Kind kind, NodePtr lhs, NodePtr rhs = nullptr, double (*fn)(double) = nullptr) {
    auto n = std::make_shared<Expression::Node>();
    n->kind = kind;
    n->lhs = std::move(lhs);
    n->rhs = std::move(rhs);
    n->fn = fn;
    return n;
}

class Parser {
public:
    explicit Parser(std::string_view text) : text_(text) {}

    NodePtr parse() {
        auto n = expression();
        skip_space();
        if (pos_ != text_.size()) {
            fail("unexpected character");
        }
        return n;
    }

    bool uses_state = false;
    std::size_t max_component = 0;

private:
    std::string_view text_;
    std::size_t pos_ = 0;

    [[noreturn]] void fail(const std::string& what) const {
        std::ostringstream msg;
        msg << "expression '" << text_ << "': " << what << " at position " << pos_;
        throw InvalidArgument(msg.str());
    }

    void skip_space() {
        while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) {
            ++pos_;
        }
    }

    bool accept(char c) {
        skip_space();
        if (pos_ < text_.size() && text_[pos_] == c) {
            ++pos_;
            return true;
        }
        return false;
    }

    NodePtr expression() {
        auto n = term();
        while (true) {
            if (accept('+')) {
                n = branch(Kind::add, n, term());
            } else if (accept('-')) {
                n = branch(Kind::sub, n, term());
            } else {
                return n;
            }
        }
    }

    NodePtr term() {
        auto n = unary();
        while (true) {
            if (accept('*')) {
                n = branch(Kind::mul, n, unary());
            } else if (accept('/')) {
                n = branch(Kind::div, n, unary());
            } else {
                return n;
            }
        }
    }

    // Unary minus binds looser than ^, so -x^2 = -(x^2).
    NodePtr unary() {
        if (accept('-')) {
            return branch(Kind::unary_minus, unary());
        }
        if (accept('+')) {
            return unary();
        }
        return power();
    }

    NodePtr power() {
        auto base = primary();
        if (accept('^')) {
            return branch(Kind::pow, base, unary());
        }
        return base;
    }

    NodePtr primary() {
        skip_space();
        if (pos_ >= text_.size()) {
            fail("unexpected end of input");
        }
        const char c = text_[pos_];
        if (c == '(') {
            ++pos_;
            auto n = expression();
            if (!accept(')')) {
                fail("expected ')'");
            }
            return n;
        }
        if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
            return number();
        }
        if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
            return identifier();
        }
        fail(std::string("unexpected '") + c + "'");
    }

    NodePtr number() {
        double v = 0.0;
        const char* begin = text_.data() + pos_;
        const char* end = text_.data() + text_.size();
        const auto [ptr, ec] = std::from_chars(begin, end, v);
        if (ec != std::errc() || ptr == begin) {
            fail("malformed number");
        }
        pos_ += static_cast<std::size_t>(ptr - begin);
        return leaf(Kind::number, v);
    }

    NodePtr identifier() {
        const std::size_t start = pos_;
        while (pos_ < text_.size() &&
               (std::isalnum(static_cast<unsigned char>(text_[pos_])) || text_[pos_] == '_')) {
            ++pos_;
        }
        const std::string_view name = text_.substr(start, pos_ - start);
        if (name == "t") {
            return leaf(Kind::time);
        }
        if (name == "x") {
            uses_state = true;
            return leaf(Kind::state);
        }
        if (name == "r") {
            uses_state = true;
            return leaf(Kind::norm);
        }
        if (name == "pi") {
            return leaf(Kind::number, std::numbers::pi);
        }
        if (name == "e") {
            return leaf(Kind::number, std::numbers::e);
        }
        if (name.size() > 1 && name[0] == 'x') {
            std::size_t k = 0;
            const auto [ptr, ec] = std::from_chars(name.data() + 1, name.data() + name.size(), k);
            if (ec == std::errc() && ptr == name.data() + name.size() && k >= 1) {
                uses_state = true;
                max_component = std::max(max_component, k);
                return leaf(Kind::component, 0.0, k - 1);
            }
        }
        for (const auto& f : kFunctions) {
            if (f.name == name) {
                if (!accept('(')) {
                    fail("expected '(' after " + std::string(name));
                }
                auto arg = expression();
                if (!accept(')')) {
                    fail("expected ')'");
                }
                return branch(Kind::call, arg, nullptr, f.fn);
            }
        }
        pos_ = start;
        fail("unknown identifier '" + std::string(name) + "'");
    }
};

}  // namespace

Expression Expression::parse(std::string_view text) {
    Parser p(text);
    Expression e;
    e.root_ = p.parse();
    e.text_ = std::string(text);
    e.uses_state_ = p.uses_state;
    e.max_component_ = p.max_component;
    return e;
}

double Expression::operator()(double t) const {
    if (uses_state_) {
        throw InvalidArgument("expression '" + text_ + "' depends on the state but was evaluated in t only");
    }
    return root_->eval(t, nullptr, 0);
}

double Expression::operator()(double t, const Eigen::VectorXd& x, std::size_t component) const {
    if (max_component_ > static_cast<std::size_t>(x.size()) || component >= static_cast<std::size_t>(x.size())) {
        throw InvalidArgument("expression '" + text_ + "' refers to a component beyond the state dimension");
    }
    return root_->eval(t, &x, component);
}

}  // namespace greenbvp
