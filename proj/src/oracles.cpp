#include "bsekit/oracles.hpp"

#include <cmath>

namespace bsekit {

namespace {

void check_xi(const FiniteFilteredSpace& space, const RandomVectord& xi) {
    if (xi.level() != space.steps()) throw DomainError("xi must be terminal-measurable");
    detail::check_node_count(space, xi.level(), xi.size());
}

// M_{k+1} - M_k = -(Y_{k+1} - E_k Y_{k+1}), M_0 = 0.
Martingaled martingale_of(const FiniteFilteredSpace& space, const AdaptedProcessd& Y) {
    AdaptedProcessd M = AdaptedProcessd::zero(space, Y.dim());
    for (Index k = 0; k < space.steps(); ++k) {
        const MatrixXd mean = detail::average_to_parent(space, k + 1, Y.level(k + 1));
        M.level(k + 1) = detail::copy_to_children(space, k, MatrixXd(M.level(k) + mean)) - Y.level(k + 1);
    }
    return Martingaled::assume(std::move(M));
}

}  // namespace

OracleSolution zero_driver_oracle(const FiniteFilteredSpace& space, const RandomVectord& xi) {
    check_xi(space, xi);
    AdaptedProcessd Y = AdaptedProcessd::zero(space, xi.dim());
    AdaptedProcessd M = AdaptedProcessd::zero(space, xi.dim());
    Y.level(space.steps()) = xi.values();
    for (Index k = space.steps(); k > 0; --k) Y.level(k - 1) = detail::average_to_parent(space, k, Y.level(k));
    for (Index k = 0; k <= space.steps(); ++k) {
        MatrixXd y0 = Y.level(0).replicate(1, Y.level(k).cols());
        M.level(k) = y0 - Y.level(k);
    }
    return {std::move(Y), Martingaled::assume(std::move(M))};
}

OracleSolution linear_scalar_oracle(const FiniteFilteredSpace& space, const RandomVectord& xi, double a, double b) {
    check_xi(space, xi);
    if (xi.dim() != 1) throw DimensionError("linear scalar oracle needs scalar xi");
    AdaptedProcessd Y = AdaptedProcessd::zero(space, 1);
    Y.level(space.steps()) = xi.values();
    for (Index k = space.steps() - 1; k >= 0; --k) {
        const double dt = space.grid().dt(k);
        if (a * dt >= 1.0) throw DomainError("implicit step needs a dt < 1");
        const MatrixXd e = detail::average_to_parent(space, k + 1, Y.level(k + 1));
        Y.level(k) = (e.array() + b * dt) / (1.0 - a * dt);
    }
    Martingaled M = martingale_of(space, Y);
    return {std::move(Y), std::move(M)};
}

double linear_scalar_closed_form(double mean_xi, double a, double b, double T) {
    if (a == 0.0) return mean_xi + b * T;
    return std::exp(a * T) * mean_xi + b / a * std::expm1(a * T);
}

OracleSolution backward_recursion_oracle(const NoiseModel& model, const RandomVectord& xi, const MarkovDriver& f,
                                         double tol, Index max_iter) {
    const auto& space = model.space();
    check_xi(space, xi);
    if (model.mark_count() != 0) throw DomainError("backward recursion oracle supports Brownian trees only");
    const Index d = xi.dim(), n = model.brownian_dim(), K = space.steps();
    const AdaptedProcessd W = model.brownian_path();
    constexpr double omega = 0.5;

    AdaptedProcessd Y = AdaptedProcessd::zero(space, d);
    Y.level(K) = xi.values();
    for (Index k = K - 1; k >= 0; --k) {
        const double t = space.grid().time(k), dt = space.grid().dt(k);
        const auto& st = model.step(k);
        const VectorXd& cp = space.conditional_probabilities(k + 1);
        for (Index i = 0; i < space.node_count(k); ++i) {
            const Index first = space.first_child(k, i), count = space.child_count(k, i);
            VectorXd mean = VectorXd::Zero(d);
            MatrixXd z = MatrixXd::Zero(d, n);
            for (Index c = first; c < first + count; ++c) {
                mean += cp[c] * Y.level(k + 1).col(c);
                if (st.active) {
                    const VectorXd dW = W.level(k + 1).col(c) - W.level(k).col(i);
                    z -= cp[c] * Y.level(k + 1).col(c) * dW.transpose() / st.noise_dt;
                }
            }
            VectorXd y = mean;
            bool settled = false;
            for (Index it = 0; it < max_iter; ++it) {
                const VectorXd target = mean + f(t, y, z) * dt;
                const VectorXd next = (1.0 - omega) * y + omega * target;
                const double change = (next - y).cwiseAbs().maxCoeff();
                y = next;
                if (!std::isfinite(change)) break;
                if (change <= tol * (1.0 + y.cwiseAbs().maxCoeff())) {
                    settled = true;
                    break;
                }
            }
            if (!settled) throw Error("backward recursion oracle did not settle at a node");
            Y.level(k).col(i) = y;
        }
    }
    Martingaled M = martingale_of(space, Y);
    return {std::move(Y), std::move(M)};
}

}  // namespace bsekit
