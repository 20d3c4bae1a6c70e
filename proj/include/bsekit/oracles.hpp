#pragma once

#include "bsekit/noise_models.hpp"

#include <functional>

namespace bsekit {

/// Reference solutions built by backward recursion on the tree, without the
/// fixed-point machinery.
struct OracleSolution {
    AdaptedProcessd Y;
    Martingaled M;
};

/// Y_t = E_t xi, M_t = E_0 xi - E_t xi.
OracleSolution zero_driver_oracle(const FiniteFilteredSpace& space, const RandomVectord& xi);

/// f = a y + b with the left-endpoint rule: Y_k = (E_k Y_{k+1} + b dt) / (1 - a dt).
OracleSolution linear_scalar_oracle(const FiniteFilteredSpace& space, const RandomVectord& xi, double a, double b);

/// e^{aT} E[xi] + (b/a)(e^{aT} - 1), the continuous-time value of Y_0.
double linear_scalar_closed_form(double mean_xi, double a, double b, double T);

/// f(t, y, z) with z the d x n Brownian coefficient of M.
using MarkovDriver = std::function<VectorXd(double t, const VectorXd& y, const MatrixXd& z)>;

/// Implicit backward recursion Y_k = E_k Y_{k+1} + f(t_k, Y_k, Z_k) dt_k on a
/// Brownian tree, with Z_k = -E_k[Y_{k+1} dW_k] / dt and each node solved by
/// damped fixed-point iteration.
OracleSolution backward_recursion_oracle(const NoiseModel& model, const RandomVectord& xi, const MarkovDriver& f,
                                         double tol = 1e-12, Index max_iter = 100000);

}  // namespace bsekit
