#include "greenbvp/spectral.hpp"

#include <cmath>
#include <limits>
#include <sstream>
#include <vector>

#include "greenbvp/error.hpp"
#include "greenbvp/ivp.hpp"

namespace greenbvp {

namespace {

constexpr std::size_t kScanSubdivisions = 200;
constexpr double kBisectionTol = 1e-8;
constexpr double kTangencyTol = 1e-6;

Eigen::Index idx(std::size_t k) { return static_cast<Eigen::Index>(k); }

}  // namespace

ComparisonMatrix build_comparison(const GreensKernel& kernel, const ScalarFunction& eta) {
    const Grid& grid = kernel.grid();
    const std::size_t n = grid.intervals();
    Eigen::VectorXd e(idx(n + 1));
    for (std::size_t j = 0; j <= n; ++j) {
        e[idx(j)] = eta(grid.node(j));
        if (!(e[idx(j)] >= 0.0)) {
            std::ostringstream msg;
            msg << "eta must be nonnegative; eta(" << grid.node(j) << ") = " << e[idx(j)];
            throw InvalidArgument(msg.str());
        }
    }
    ComparisonMatrix out{grid, Eigen::MatrixXd::Zero(idx(n + 1), idx(n + 1))};
    for (std::size_t i = 0; i <= n; ++i) {
        const Eigen::VectorXd wl = grid.segment_weights(0, i);
        const Eigen::VectorXd wu = grid.segment_weights(i, n);
        for (std::size_t j = 0; j <= i; ++j) {
            out.entries(idx(i), idx(j)) += wl[idx(j)] * std::abs(kernel.lower(i, j));
        }
        for (std::size_t j = i; j <= n; ++j) {
            out.entries(idx(i), idx(j)) += wu[idx(j - i)] * std::abs(kernel.upper(i, j));
        }
    }
    out.entries = 2.0 * out.entries * e.asDiagonal();
    return out;
}

PowerResult power_radius(const Eigen::MatrixXd& m, double tol, std::size_t max_iter) {
    if (m.rows() != m.cols() || m.rows() == 0) {
        throw InvalidArgument("power_radius needs a nonempty square matrix");
    }
    if ((m.array() < 0.0).any()) {
        throw InvalidArgument("power_radius needs a nonnegative matrix");
    }
    PowerResult r;
    Eigen::VectorXd v = Eigen::VectorXd::Ones(m.rows()).normalized();
    double last = std::numeric_limits<double>::quiet_NaN();
    std::vector<double> changes;
    while (r.iterations < max_iter) {
        ++r.iterations;
        const Eigen::VectorXd mv = m * v;
        const double norm = mv.norm();
        if (norm == 0.0) {
            r.radius = r.lower = r.upper = 0.0;
            return r;
        }
        r.radius = v.dot(mv);
        const Eigen::ArrayXd ratios = mv.array() / v.array();
        r.lower = v.minCoeff() > 0.0 ? ratios.minCoeff() : 0.0;
        r.upper = v.minCoeff() > 0.0 ? ratios.maxCoeff() : std::numeric_limits<double>::infinity();
        if (!std::isnan(last)) {
            changes.push_back(std::abs(r.radius - last));
            if (changes.back() <= tol) {
                return r;
            }
        }
        last = r.radius;
        v = mv / norm;
    }
    std::ostringstream msg;
    msg << "power iteration did not converge in " << max_iter << " iterations; bracket [" << r.lower << ", "
        << r.upper << "]";
    throw DivergenceError(msg.str(), std::move(changes));
}

PowerResult power_radius(const ComparisonMatrix& m, double tol, std::size_t max_iter) {
    return power_radius(m.entries, tol, max_iter);
}

HillValue hill_value(const HillProblem& problem, const ScalarFunction& eta, double lambda, const Grid& grid) {
    if (!(lambda > 0.0)) {
        throw InvalidArgument("hill discriminant needs lambda > 0");
    }
    const auto& c = problem.coeffs;
    const double scale = problem.kernel_sign * 2.0 / lambda;
    const CoefficientSet shifted{c.a2, c.a1, [a0 = c.a0, eta, scale](double t) { return a0(t) - scale * eta(t); },
                                 c.monic};
    const auto u1 = solve_ivp2(shifted, 1.0, 0.0, grid);
    const auto u2 = solve_ivp2(shifted, 0.0, 1.0, grid);
    const auto end = idx(grid.intervals());
    const double a = u1.y.values(end, 0), b = u2.y.values(end, 0);
    const double ca = u1.dy.values(end, 0), cb = u2.dy.values(end, 0);
    return HillValue{a + cb, 1.0 + a * cb - ca * b};
}

double hill_discriminant(const ScalarFunction& eta, double lambda, const Grid& grid) {
    return hill_value(HillProblem::xpp_minus_x(), eta, lambda, grid).discriminant;
}

HillRadius hill_radius(const ScalarFunction& eta, double lambda_max, const Grid& grid, const HillProblem& problem) {
    if (!(lambda_max > 0.0)) {
        throw InvalidArgument("hill_radius needs lambda_max > 0");
    }
    HillRadius out;
    auto gap = [&](double lambda) {
        ++out.evaluations;
        const auto v = hill_value(problem, eta, lambda, grid);
        return v.discriminant - v.target;
    };

    const double step = lambda_max / static_cast<double>(kScanSubdivisions);
    std::vector<double> scan(kScanSubdivisions + 1, std::numeric_limits<double>::quiet_NaN());
    for (std::size_t k = kScanSubdivisions; k >= 1; --k) {
        scan[k] = gap(step * static_cast<double>(k));
        if (scan[k] == 0.0) {
            out.radius = step * static_cast<double>(k);
            out.root_found = true;
            return out;
        }
        if (k < kScanSubdivisions && (scan[k] < 0.0) != (scan[k + 1] < 0.0)) {
            double lo = step * static_cast<double>(k), hi = lo + step;
            double glo = scan[k];
            while (hi - lo > kBisectionTol) {
                const double mid = 0.5 * (lo + hi);
                const double gm = gap(mid);
                if ((gm < 0.0) == (glo < 0.0)) {
                    lo = mid;
                    glo = gm;
                } else {
                    hi = mid;
                }
            }
            out.radius = 0.5 * (lo + hi);
            out.root_found = true;
            return out;
        }
    }

    // No sign change: look for a touching root near the best scan point.
    std::size_t best = kScanSubdivisions;
    for (std::size_t k = 1; k <= kScanSubdivisions; ++k) {
        if (std::abs(scan[k]) < std::abs(scan[best])) {
            best = k;
        }
    }
    double lo = step * static_cast<double>(best - 1), hi = std::min(lambda_max, step * static_cast<double>(best + 1));
    lo = std::max(lo, 0.5 * step);
    const double inv_phi = 0.5 * (std::sqrt(5.0) - 1.0);
    double x1 = hi - inv_phi * (hi - lo), x2 = lo + inv_phi * (hi - lo);
    double f1 = std::abs(gap(x1)), f2 = std::abs(gap(x2));
    while (hi - lo > kBisectionTol) {
        if (f1 < f2) {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - inv_phi * (hi - lo);
            f1 = std::abs(gap(x1));
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + inv_phi * (hi - lo);
            f2 = std::abs(gap(x2));
        }
    }
    const double candidate = f1 < f2 ? x1 : x2;
    const double value = std::min({f1, f2, std::abs(scan[best])});
    if (value < kTangencyTol) {
        out.radius = value == std::abs(scan[best]) ? step * static_cast<double>(best) : candidate;
        out.root_found = true;
        out.tangential = true;
    }
    return out;
}

}  // namespace greenbvp
