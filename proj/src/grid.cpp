#include "greenbvp/grid.hpp"

#include <cmath>
#include <string>

#include "greenbvp/error.hpp"

namespace greenbvp {

namespace {

void check_same_shape(const SampledFunction& a, const SampledFunction& b) {
    if (!(a.grid == b.grid) || a.values.rows() != b.values.rows() || a.values.cols() != b.values.cols()) {
        throw InvalidArgument("sampled functions live on different grids or dimensions");
    }
}

Eigen::VectorXd composite_weights(std::size_t n, std::size_t first, std::size_t last) {
    if (last < first || last > n) {
        throw InvalidArgument("segment_weights: invalid node range");
    }
    const std::size_t m = last - first;
    const double h = 1.0 / static_cast<double>(n);
    Eigen::VectorXd w = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(m + 1));
    if (m == 0) {
        return w;
    }
    if (m == 1) {
        w[0] = w[1] = 0.5 * h;
        return w;
    }
    const std::size_t simpson = (m % 2 == 0) ? m : m - 3;
    for (std::size_t k = 0; k + 2 <= simpson; k += 2) {
        const auto i = static_cast<Eigen::Index>(k);
        w[i] += h / 3.0;
        w[i + 1] += 4.0 * h / 3.0;
        w[i + 2] += h / 3.0;
    }
    if (simpson != m) {
        const auto i = static_cast<Eigen::Index>(simpson);
        w[i] += 3.0 * h / 8.0;
        w[i + 1] += 9.0 * h / 8.0;
        w[i + 2] += 9.0 * h / 8.0;
        w[i + 3] += 3.0 * h / 8.0;
    }
    return w;
}

}  // namespace

Grid::Grid(std::size_t n) {
    if (n < 4 || n % 2 != 0) {
        throw InvalidArgument("grid needs an even subinterval count >= 4, got " + std::to_string(n));
    }
    auto data = std::make_shared<Data>();
    data->n = n;
    const auto size = static_cast<Eigen::Index>(n + 1);
    data->nodes.resize(size);
    for (Eigen::Index i = 0; i < size; ++i) {
        data->nodes[i] = static_cast<double>(i) / static_cast<double>(n);
    }
    data->nodes[size - 1] = 1.0;
    data->weights = composite_weights(n, 0, n);
    data_ = std::move(data);
}

Eigen::VectorXd Grid::segment_weights(std::size_t first, std::size_t last) const {
    return composite_weights(intervals(), first, last);
}

SampledFunction::SampledFunction(Grid g, std::size_t dim)
    : grid(std::move(g)), values(Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(grid.size()),
                                                      static_cast<Eigen::Index>(dim))) {
    if (dim == 0) {
        throw InvalidArgument("sampled function needs dimension >= 1");
    }
}

SampledFunction::SampledFunction(Grid g, Eigen::MatrixXd v) : grid(std::move(g)), values(std::move(v)) {
    if (values.rows() != static_cast<Eigen::Index>(grid.size()) || values.cols() == 0) {
        throw InvalidArgument("sampled function values must have n+1 rows and >= 1 column");
    }
}

SampledFunction SampledFunction::sample(const Grid& g, std::size_t dim,
                                        const std::function<Eigen::VectorXd(double)>& fn) {
    SampledFunction f(g, dim);
    for (std::size_t i = 0; i < g.size(); ++i) {
        Eigen::VectorXd v = fn(g.node(i));
        if (static_cast<std::size_t>(v.size()) != dim) {
            throw InvalidArgument("sampled vector has wrong dimension");
        }
        f.values.row(static_cast<Eigen::Index>(i)) = v.transpose();
    }
    return f;
}

SampledFunction SampledFunction::sample_scalar(const Grid& g, const std::function<double(double)>& fn) {
    SampledFunction f(g, 1);
    for (std::size_t i = 0; i < g.size(); ++i) {
        f.values(static_cast<Eigen::Index>(i), 0) = fn(g.node(i));
    }
    return f;
}

SampledFunction& SampledFunction::operator+=(const SampledFunction& other) {
    check_same_shape(*this, other);
    values += other.values;
    return *this;
}

SampledFunction& SampledFunction::operator-=(const SampledFunction& other) {
    check_same_shape(*this, other);
    values -= other.values;
    return *this;
}

SampledFunction& SampledFunction::operator*=(double s) {
    values *= s;
    return *this;
}

SampledFunction operator+(SampledFunction a, const SampledFunction& b) { return a += b; }
SampledFunction operator-(SampledFunction a, const SampledFunction& b) { return a -= b; }
SampledFunction operator*(double s, SampledFunction a) { return a *= s; }

double quadrature(const Grid& g, const Eigen::VectorXd& samples) {
    if (samples.size() != static_cast<Eigen::Index>(g.size())) {
        throw InvalidArgument("quadrature: sample count does not match grid");
    }
    return g.weights().dot(samples);
}

double quadrature(const SampledFunction& f) {
    if (f.dim() != 1) {
        throw InvalidArgument("quadrature expects a scalar-valued function");
    }
    return quadrature(f.grid, f.values.col(0));
}

Eigen::VectorXd pointwise_norms(const SampledFunction& f) { return f.values.rowwise().norm(); }

LpNorms lp_norms(const SampledFunction& f) {
    const Eigen::VectorXd mag = pointwise_norms(f);
    LpNorms out;
    out.l1 = quadrature(f.grid, mag);
    out.l2 = std::sqrt(std::max(0.0, quadrature(f.grid, mag.cwiseAbs2())));
    out.sup = mag.maxCoeff();
    return out;
}

double c1_norm(const SampledFunction& f, const SampledFunction& df) {
    return pointwise_norms(f).maxCoeff() + pointwise_norms(df).maxCoeff();
}

}  // namespace greenbvp
