#pragma once

#include <functional>

#include <Eigen/Core>

#include "greenbvp/grid.hpp"

namespace greenbvp {

using ScalarFunction = std::function<double(double)>;

/// Coefficients of L x = a2(t) x'' + a1(t) x' + a0(t) x.
struct CoefficientSet {
    ScalarFunction a2;
    ScalarFunction a1;
    ScalarFunction a0;
    bool monic = false;  // a2 == 1

    static CoefficientSet constant(double a2, double a1, double a0);
    static CoefficientSet monic_form(ScalarFunction a1, ScalarFunction a0);

    /// Throws SingularCoefficient if |a2(t_i)| < 1e-12 at some node, and
    /// InvalidArgument if the monic flag disagrees with the samples.
    void validate(const Grid& grid) const;
};

inline constexpr double kSingularCoefficient = 1e-12;

struct IvpSolution {
    SampledFunction y;
    SampledFunction dy;
};

/// Classical RK4 on y' = v, v' = (forcing - a1 v - a0 y) / a2 with step 1/n.
///
/// The forcing is only known at nodes; half-step values come from four-point
/// cubic interpolation so the scheme keeps fourth order.
IvpSolution solve_ivp2(const CoefficientSet& coeffs, const SampledFunction& forcing, const Eigen::VectorXd& y0,
                       const Eigen::VectorXd& dy0, const Grid& grid);

/// Homogeneous scalar problem (zero forcing), the common case for fundamental systems.
IvpSolution solve_ivp2(const CoefficientSet& coeffs, double y0, double dy0, const Grid& grid);

}  // namespace greenbvp
