#pragma once

#include "bsekit/filtered_space.hpp"
#include "bsekit/noise_models.hpp"

#include <iosfwd>
#include <vector>

namespace bsekit {

/// M = sum Z dW + sum_i U(x_i) dN~_i + K on a noise-generated tree.
/// Values at level k act on the increment over (t_k, t_{k+1}].
struct MartingaleDecomposition {
    Index dim = 0;
    Index brownian_dim = 0;
    Index mark_count = 0;
    /// Per level k < K: (d*n) x nodes(k), each column a column-major d x n matrix.
    std::vector<MatrixXd> Z;
    /// Per level k < K: (d*m) x nodes(k), column-major d x m (column i is U(x_i)).
    std::vector<MatrixXd> U;
    /// Per level k < K: conditional Gram matrix of the regressors.
    std::vector<MatrixXd> gram;
    Martingaled K;
    Martingaled source;

    MatrixXd z_at(Index level, Index node) const;
    MatrixXd u_at(Index level, Index node) const;
};

MartingaleDecomposition represent(const Martingaled& m, const NoiseModel& model);

struct IsometryCheck {
    double lhs = 0.0;  ///< E|M_t|^2
    double rhs = 0.0;  ///< Z, U and K contributions up to t against the discrete Gram
};

IsometryCheck isometry_check(const MartingaleDecomposition& dec, const FiniteFilteredSpace& space,
                             Index t_level);

/// ||Z||_{H^2} and ||U||_{L^2(N~)} up to `t_level`, measured with the discrete Gram.
double h2_norm(const MartingaleDecomposition& dec, const FiniteFilteredSpace& space, Index t_level);
double l2_ntilde_norm(const MartingaleDecomposition& dec, const FiniteFilteredSpace& space, Index t_level);

struct ZUProcesses {
    AdaptedProcessd Z;               ///< dimension d*n, zero at the terminal level
    std::vector<AdaptedProcessd> U;  ///< one d-dimensional process per mark
};

ZUProcesses zu_processes(const MartingaleDecomposition& dec, const FiniteFilteredSpace& space);

/// Columns: level, node, Z entries, U entries, conditional L2 norm of dK.
void write_decomposition_csv(std::ostream& os, const MartingaleDecomposition& dec,
                             const FiniteFilteredSpace& space);

}  // namespace bsekit
