#include "greenbvp/ivp.hpp"

#include <cmath>
#include <sstream>

#include "greenbvp/error.hpp"

namespace greenbvp {

namespace {

// Cubic interpolation of node samples at t_i + h/2.
Eigen::VectorXd midpoint_value(const Eigen::MatrixXd& f, Eigen::Index i) {
    const Eigen::Index last = f.rows() - 1;
    if (i == 0) {
        return ((5.0 * f.row(0) + 15.0 * f.row(1) - 5.0 * f.row(2) + f.row(3)) / 16.0).transpose();
    }
    if (i == last - 1) {
        return ((f.row(last - 3) - 5.0 * f.row(last - 2) + 15.0 * f.row(last - 1) + 5.0 * f.row(last)) / 16.0)
            .transpose();
    }
    return ((-f.row(i - 1) + 9.0 * f.row(i) + 9.0 * f.row(i + 1) - f.row(i + 2)) / 16.0).transpose();
}

}  // namespace

CoefficientSet CoefficientSet::constant(double a2, double a1, double a0) {
    return CoefficientSet{[a2](double) { return a2; }, [a1](double) { return a1; }, [a0](double) { return a0; },
                          a2 == 1.0};
}

CoefficientSet CoefficientSet::monic_form(ScalarFunction a1, ScalarFunction a0) {
    return CoefficientSet{[](double) { return 1.0; }, std::move(a1), std::move(a0), true};
}

void CoefficientSet::validate(const Grid& grid) const {
    if (!a2 || !a1 || !a0) {
        throw InvalidArgument("coefficient set has an empty coefficient function");
    }
    for (std::size_t i = 0; i < grid.size(); ++i) {
        const double t = grid.node(i);
        const double v = a2(t);
        if (!(std::abs(v) >= kSingularCoefficient)) {
            std::ostringstream msg;
            msg << "a2 vanishes (|a2| < 1e-12) at t = " << t;
            throw SingularCoefficient(msg.str());
        }
        if (monic && v != 1.0) {
            throw InvalidArgument("coefficient set flagged monic but a2 != 1");
        }
    }
}

IvpSolution solve_ivp2(const CoefficientSet& coeffs, const SampledFunction& forcing, const Eigen::VectorXd& y0,
                       const Eigen::VectorXd& dy0, const Grid& grid) {
    coeffs.validate(grid);
    const auto dim = static_cast<Eigen::Index>(forcing.dim());
    if (!(forcing.grid == grid) || y0.size() != dim || dy0.size() != dim) {
        throw InvalidArgument("solve_ivp2: forcing, initial data and grid disagree in shape");
    }
    const double h = grid.step();
    const auto steps = static_cast<Eigen::Index>(grid.intervals());

    IvpSolution out{SampledFunction(grid, forcing.dim()), SampledFunction(grid, forcing.dim())};
    Eigen::VectorXd y = y0;
    Eigen::VectorXd v = dy0;
    out.y.values.row(0) = y.transpose();
    out.dy.values.row(0) = v.transpose();

    auto accel = [&](double t, const Eigen::VectorXd& f, const Eigen::VectorXd& yy, const Eigen::VectorXd& vv) {
        return Eigen::VectorXd((f - coeffs.a1(t) * vv - coeffs.a0(t) * yy) / coeffs.a2(t));
    };

    for (Eigen::Index i = 0; i < steps; ++i) {
        const double t = grid.node(static_cast<std::size_t>(i));
        const Eigen::VectorXd f0 = forcing.values.row(i).transpose();
        const Eigen::VectorXd fm = midpoint_value(forcing.values, i);
        const Eigen::VectorXd f1 = forcing.values.row(i + 1).transpose();

        const Eigen::VectorXd k1y = v;
        const Eigen::VectorXd k1v = accel(t, f0, y, v);
        const Eigen::VectorXd k2y = v + 0.5 * h * k1v;
        const Eigen::VectorXd k2v = accel(t + 0.5 * h, fm, y + 0.5 * h * k1y, k2y);
        const Eigen::VectorXd k3y = v + 0.5 * h * k2v;
        const Eigen::VectorXd k3v = accel(t + 0.5 * h, fm, y + 0.5 * h * k2y, k3y);
        const Eigen::VectorXd k4y = v + h * k3v;
        const Eigen::VectorXd k4v = accel(t + h, f1, y + h * k3y, k4y);

        y += h / 6.0 * (k1y + 2.0 * k2y + 2.0 * k3y + k4y);
        v += h / 6.0 * (k1v + 2.0 * k2v + 2.0 * k3v + k4v);
        out.y.values.row(i + 1) = y.transpose();
        out.dy.values.row(i + 1) = v.transpose();
    }
    return out;
}

IvpSolution solve_ivp2(const CoefficientSet& coeffs, double y0, double dy0, const Grid& grid) {
    return solve_ivp2(coeffs, SampledFunction(grid, 1), Eigen::VectorXd::Constant(1, y0),
                      Eigen::VectorXd::Constant(1, dy0), grid);
}

}  // namespace greenbvp
