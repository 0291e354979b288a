#pragma once

#include <memory>
#include <string>
#include <string_view>

#include <Eigen/Core>

namespace greenbvp {

/// Arithmetic expression over t and the state x.
///
/// Grammar: + - * / ^ (right associative), unary minus, parentheses, numbers,
/// the constants pi and e, and the functions exp log sqrt abs sin cos tan
/// sinh cosh tanh atan. Variables: t; x (the current component when an
/// expression acts componentwise); x1..xN (1-based components); r (|x|).
class Expression {
public:
    /// Throws InvalidArgument with the offending position on a syntax error.
    static Expression parse(std::string_view text);

    double operator()(double t) const;
    double operator()(double t, const Eigen::VectorXd& x, std::size_t component = 0) const;

    /// True when the expression mentions x, xk or r.
    bool uses_state() const noexcept { return uses_state_; }
    /// Largest k among the xk variables (0 when none).
    std::size_t max_component() const noexcept { return max_component_; }
    const std::string& text() const noexcept { return text_; }

    struct Node;

private:
    std::shared_ptr<const Node> root_;
    std::string text_;
    bool uses_state_ = false;
    std::size_t max_component_ = 0;
};

}  // namespace greenbvp
