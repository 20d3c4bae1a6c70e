#pragma once

#include "bsekit/filtered_space.hpp"

namespace bsekit {

/// Finitely supported probability law. Distances use the weighted squared
/// norm sum_j w_j x_j^2 when `metric_weights` is non-empty (e.g. intensities
/// for mark-indexed U), the Euclidean norm otherwise.
struct DiscreteLaw {
    MatrixXd atoms;  ///< dim x count
    VectorXd weights;
    VectorXd metric_weights;

    DiscreteLaw() = default;
    DiscreteLaw(MatrixXd atoms, VectorXd weights, VectorXd metric_weights = {});

    Index dim() const noexcept { return atoms.rows(); }
    Index size() const noexcept { return atoms.cols(); }
    VectorXd mean() const { return atoms * weights; }

    static DiscreteLaw dirac(const VectorXd& x) { return DiscreteLaw(x, VectorXd::Ones(1)); }
};

/// Distinct values of X (exact equality, lexicographic order) with summed probabilities.
DiscreteLaw empirical_law(const FiniteFilteredSpace& space, const RandomVectord& x,
                          const VectorXd& metric_weights = {});

inline constexpr Index kDefaultAtomLimit = 64;

/// Exact W_2: quantile coupling in one dimension, transportation simplex otherwise.
double wasserstein2(const DiscreteLaw& a, const DiscreteLaw& b, Index atom_limit = kDefaultAtomLimit);

/// Optimal coupling cost matrix solver exposed for testing: returns the
/// optimal plan for supplies `a`, demands `b` and costs `cost`.
MatrixXd transport_plan(const VectorXd& a, const VectorXd& b, const MatrixXd& cost);

}  // namespace bsekit
