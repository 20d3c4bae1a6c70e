#pragma once

#include "bsekit/filtered_space.hpp"

#include <cstdint>
#include <memory>
#include <optional>
#include <vector>

namespace bsekit {

/// Configuration of a noise-generated tree: n-dimensional two-point Brownian
/// increments, a finite-mark Poisson model with at most one event per step,
/// and an optional fair coin that enlarges the filtration.
struct NoiseSpec {
    Index brownian_dim = 1;
    std::vector<VectorXd> marks;
    std::vector<double> intensities;
    Index steps = 1;
    double horizon = 1.0;
    bool extra_noise = false;
    /// When set, only every (steps / noise_steps)-th step branches; it then
    /// carries the variance of the whole block. Must divide `steps`.
    std::optional<Index> noise_steps;
    std::uint64_t leaf_budget = std::uint64_t{1} << 20;
};

/// Per-step branch table, shared by every node of a level.
struct StepBranching {
    bool active = false;
    double noise_dt = 0.0;                  ///< time span whose noise this step carries
    VectorXd probabilities;                 ///< one entry per child, in child order
    MatrixXd regressors;                    ///< (n+m) x B: dW rows, then compensated dN rows
    MatrixXd gram;                          ///< sum_b p_b r_b r_b^T
    std::vector<int> sign_pattern;          ///< bit i set means dW_i = -sqrt(dt)
    std::vector<int> jump_mark;             ///< -1 when no event
    std::vector<int> coin;                  ///< 0/1, always 0 without extra noise
};

struct OneStepRegressors {
    MatrixXd regressors;  ///< (n+m) x children
    VectorXd probabilities;
    MatrixXd gram;
};

class NoiseModel {
public:
    NoiseModel(std::shared_ptr<const FiniteFilteredSpace> space, NoiseSpec spec,
               std::vector<StepBranching> steps);

    const FiniteFilteredSpace& space() const noexcept { return *space_; }
    const std::shared_ptr<const FiniteFilteredSpace>& shared_space() const noexcept { return space_; }
    const NoiseSpec& spec() const noexcept { return spec_; }

    Index brownian_dim() const noexcept { return spec_.brownian_dim; }
    Index mark_count() const noexcept { return static_cast<Index>(spec_.intensities.size()); }
    Index regressor_count() const noexcept { return brownian_dim() + mark_count(); }
    bool extra_noise() const noexcept { return spec_.extra_noise; }

    const StepBranching& step(Index k) const { return steps_.at(static_cast<std::size_t>(k)); }

    /// Increment regressors on the children of `node` together with their
    /// conditional Gram matrix. Throws DomainError for nodes that are not
    /// non-leaf nodes of this model's space.
    OneStepRegressors one_step_regressors(Index level, Index node) const;

    /// Index of `node` (at level >= 1) among its siblings.
    Index branch_of(Index level, Index node) const;

    AdaptedProcessd brownian_path() const;
    AdaptedProcessd compensated_jump_path() const;
    AdaptedProcessd jump_count_path() const;
    /// Number of heads of the extra-noise coin so far.
    AdaptedProcessd coin_path() const;

private:
    AdaptedProcessd accumulate(Index dim, const std::vector<MatrixXd>& increments) const;

    std::shared_ptr<const FiniteFilteredSpace> space_;
    NoiseSpec spec_;
    std::vector<StepBranching> steps_;
};

NoiseModel build_brownian_tree(Index brownian_dim, Index steps, double horizon,
                               std::optional<Index> noise_steps = std::nullopt,
                               std::uint64_t leaf_budget = std::uint64_t{1} << 20);

NoiseModel build_jump_diffusion_tree(const NoiseSpec& spec);

}  // namespace bsekit
