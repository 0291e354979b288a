#pragma once

#include <cstddef>
#include <functional>
#include <memory>
#include <span>

#include <Eigen/Core>

namespace greenbvp {

/// Uniform partition t_i = i/n of [0,1] with composite Simpson weights.
///
/// Copies share the node and weight arrays, so passing a Grid by value is cheap.
class Grid {
public:
    /// Throws InvalidArgument unless n is even and at least 4.
    explicit Grid(std::size_t n);

    std::size_t intervals() const noexcept { return data_->n; }
    std::size_t size() const noexcept { return data_->n + 1; }
    double step() const noexcept { return 1.0 / static_cast<double>(data_->n); }
    double node(std::size_t i) const { return data_->nodes[static_cast<Eigen::Index>(i)]; }

    const Eigen::VectorXd& nodes() const noexcept { return data_->nodes; }
    const Eigen::VectorXd& weights() const noexcept { return data_->weights; }

    /// Quadrature weights over the node range [first, last] only.
    ///
    /// Even subinterval counts use Simpson, odd counts >= 3 close with a
    /// 3/8 panel, a single subinterval uses the trapezoid rule. Used to
    /// integrate each branch of a kernel separately across its diagonal kink.
    Eigen::VectorXd segment_weights(std::size_t first, std::size_t last) const;

    friend bool operator==(const Grid& a, const Grid& b) noexcept {
        return a.data_ == b.data_ || a.intervals() == b.intervals();
    }

private:
    struct Data {
        std::size_t n;
        Eigen::VectorXd nodes;
        Eigen::VectorXd weights;
    };
    std::shared_ptr<const Data> data_;
};

/// Node samples of a map [0,1] -> R^N; row i holds the vector at t_i.
struct SampledFunction {
    Grid grid;
    Eigen::MatrixXd values;

    SampledFunction(Grid g, std::size_t dim);
    SampledFunction(Grid g, Eigen::MatrixXd v);

    static SampledFunction sample(const Grid& g, std::size_t dim,
                                  const std::function<Eigen::VectorXd(double)>& fn);
    static SampledFunction sample_scalar(const Grid& g, const std::function<double(double)>& fn);

    std::size_t dim() const noexcept { return static_cast<std::size_t>(values.cols()); }
    std::size_t size() const noexcept { return static_cast<std::size_t>(values.rows()); }
    Eigen::VectorXd at(std::size_t i) const { return values.row(static_cast<Eigen::Index>(i)).transpose(); }

    SampledFunction& operator+=(const SampledFunction& other);
    SampledFunction& operator-=(const SampledFunction& other);
    SampledFunction& operator*=(double s);
};

SampledFunction operator+(SampledFunction a, const SampledFunction& b);
SampledFunction operator-(SampledFunction a, const SampledFunction& b);
SampledFunction operator*(double s, SampledFunction a);

/// Composite Simpson integral of a scalar sampled function over [0,1].
double quadrature(const SampledFunction& f);
double quadrature(const Grid& g, const Eigen::VectorXd& samples);

struct LpNorms {
    double l1 = 0.0;
    double l2 = 0.0;
    double sup = 0.0;
};

/// Euclidean magnitude |f(t_i)| at every node.
Eigen::VectorXd pointwise_norms(const SampledFunction& f);

/// L1 and L2 norms of |f| by quadrature, sup over the nodes.
LpNorms lp_norms(const SampledFunction& f);

/// Sup over nodes of |f(t_i)| + sup of |df(t_i)|: the C^1 norm at desk scale.
double c1_norm(const SampledFunction& f, const SampledFunction& df);

}  // namespace greenbvp
