#pragma once

#include "bsekit/core.hpp"

#include <cmath>
#include <limits>
#include <optional>
#include <utility>
#include <vector>

namespace bsekit {

/// Strictly increasing grid 0 = t_0 < t_1 < ... < t_K = T with K >= 1.
class TimeGrid {
public:
    explicit TimeGrid(std::vector<double> times);
    static TimeGrid uniform(Index steps, double horizon);

    Index steps() const noexcept { return static_cast<Index>(times_.size()) - 1; }
    double horizon() const noexcept { return times_.back(); }
    double time(Index k) const { return times_.at(static_cast<std::size_t>(k)); }
    /// Length of step k, i.e. t_{k+1} - t_k.
    double dt(Index k) const { return time(k + 1) - time(k); }
    const std::vector<double>& times() const noexcept { return times_; }

    /// Grid index whose time is nearest to `t`.
    Index nearest_level(double t) const;

    friend bool operator==(const TimeGrid&, const TimeGrid&) = default;

private:
    std::vector<double> times_;
};

/// Event tree over a time grid. Level k holds the atoms of F_{t_k}; the
/// children of a node are contiguous at level k+1 and ordered by parent, so
/// every subtree occupies a contiguous index range at each deeper level.
/// Immutable after construction.
class FiniteFilteredSpace {
public:
    static constexpr double kProbabilityTolerance = 1e-14;
    static constexpr double kLeafTolerance = 1e-12;

    /// `child_probabilities[k][i]` lists the transition probabilities of the
    /// children of node i at level k, for k = 0 .. K-1. Level 0 has one node.
    FiniteFilteredSpace(TimeGrid grid,
                        std::vector<std::vector<std::vector<double>>> child_probabilities);

    /// Every node of level k branches with the same probability vector
    /// `branching[k]`.
    static FiniteFilteredSpace with_level_branching(TimeGrid grid,
                                                    const std::vector<VectorXd>& branching);

    const TimeGrid& grid() const noexcept { return grid_; }
    Index steps() const noexcept { return grid_.steps(); }

    Index node_count(Index level) const { return static_cast<Index>(prob_.at(check_level(level)).size()); }
    Index leaf_count() const { return node_count(steps()); }
    Index total_nodes() const;

    Index parent(Index level, Index node) const;
    Index first_child(Index level, Index node) const;
    Index child_count(Index level, Index node) const;

    /// Probability of the node given its parent (1 at the root).
    double conditional_probability(Index level, Index node) const;
    const VectorXd& conditional_probabilities(Index level) const { return cond_prob_.at(check_level(level)); }
    /// Unconditional probability of each atom at `level`.
    const VectorXd& probabilities(Index level) const { return prob_.at(check_level(level)); }

    /// Index range [first, last) at `target_level` of the descendants of `node`.
    std::pair<Index, Index> descendant_range(Index level, Index node, Index target_level) const;
    Index ancestor(Index level, Index node, Index target_level) const;

    friend bool operator==(const FiniteFilteredSpace&, const FiniteFilteredSpace&) = default;

private:
    FiniteFilteredSpace() = default;
    std::size_t check_level(Index level) const;
    void finalize();

    TimeGrid grid_{std::vector<double>{0.0, 1.0}};
    // child_offsets_[k] has node_count(k)+1 entries for k < K.
    std::vector<std::vector<Index>> child_offsets_;
    // parents_[k] has node_count(k) entries for k >= 1 (parents_[0] is empty).
    std::vector<std::vector<Index>> parents_;
    std::vector<VectorXd> cond_prob_;
    std::vector<VectorXd> prob_;
};

/// d-dimensional random vector measurable w.r.t. the atoms of one level;
/// column i holds the value on node i.
template <typename Scalar>
class RandomVector {
public:
    RandomVector() = default;
    RandomVector(Index level, MatrixX<Scalar> values)
        : level_(level), values_(std::move(values)) {}

    static RandomVector zero(const FiniteFilteredSpace& space, Index level, Index dim) {
        return RandomVector(level, MatrixX<Scalar>::Zero(dim, space.node_count(level)));
    }
    static RandomVector constant(const FiniteFilteredSpace& space, Index level,
                                 const VectorX<Scalar>& value) {
        return RandomVector(level, value.replicate(1, space.node_count(level)));
    }

    Index level() const noexcept { return level_; }
    Index dim() const noexcept { return values_.rows(); }
    Index size() const noexcept { return values_.cols(); }
    const MatrixX<Scalar>& values() const noexcept { return values_; }
    MatrixX<Scalar>& values() noexcept { return values_; }
    auto node(Index i) const { return values_.col(i); }

    RandomVector& operator+=(const RandomVector& other) {
        check_compatible(other);
        values_ += other.values_;
        return *this;
    }
    RandomVector& operator-=(const RandomVector& other) {
        check_compatible(other);
        values_ -= other.values_;
        return *this;
    }
    RandomVector& operator*=(Scalar s) {
        values_ *= s;
        return *this;
    }
    friend RandomVector operator+(RandomVector a, const RandomVector& b) { return a += b; }
    friend RandomVector operator-(RandomVector a, const RandomVector& b) { return a -= b; }
    friend RandomVector operator*(Scalar s, RandomVector a) { return a *= s; }
    friend RandomVector operator-(RandomVector a) {
        a.values_ = -a.values_;
        return a;
    }

private:
    void check_compatible(const RandomVector& other) const {
        if (other.level_ != level_ || other.values_.rows() != values_.rows() ||
            other.values_.cols() != values_.cols())
            throw DimensionError("random vectors live on different levels or dimensions");
    }

    Index level_ = 0;
    MatrixX<Scalar> values_;
};

/// Process with one d-vector per node at every level 0..K.
template <typename Scalar>
class AdaptedProcess {
public:
    AdaptedProcess() = default;
    explicit AdaptedProcess(std::vector<MatrixX<Scalar>> levels) : levels_(std::move(levels)) {
        for (const auto& m : levels_)
            if (m.rows() != levels_.front().rows())
                throw DimensionError("process levels disagree on dimension");
    }

    static AdaptedProcess zero(const FiniteFilteredSpace& space, Index dim) {
        std::vector<MatrixX<Scalar>> levels;
        levels.reserve(static_cast<std::size_t>(space.steps() + 1));
        for (Index k = 0; k <= space.steps(); ++k)
            levels.push_back(MatrixX<Scalar>::Zero(dim, space.node_count(k)));
        return AdaptedProcess(std::move(levels));
    }

    Index dim() const noexcept { return levels_.empty() ? 0 : levels_.front().rows(); }
    Index steps() const noexcept { return static_cast<Index>(levels_.size()) - 1; }

    const MatrixX<Scalar>& level(Index k) const { return levels_.at(static_cast<std::size_t>(k)); }
    MatrixX<Scalar>& level(Index k) { return levels_.at(static_cast<std::size_t>(k)); }
    RandomVector<Scalar> at(Index k) const { return RandomVector<Scalar>(k, level(k)); }
    void set(const RandomVector<Scalar>& x) {
        auto& target = level(x.level());
        if (target.rows() != x.dim() || target.cols() != x.size())
            throw DimensionError("random vector does not fit the process level");
        target = x.values();
    }

    AdaptedProcess& operator+=(const AdaptedProcess& other) {
        check_compatible(other);
        for (std::size_t k = 0; k < levels_.size(); ++k) levels_[k] += other.levels_[k];
        return *this;
    }
    AdaptedProcess& operator-=(const AdaptedProcess& other) {
        check_compatible(other);
        for (std::size_t k = 0; k < levels_.size(); ++k) levels_[k] -= other.levels_[k];
        return *this;
    }
    AdaptedProcess& operator*=(Scalar s) {
        for (auto& m : levels_) m *= s;
        return *this;
    }
    friend AdaptedProcess operator+(AdaptedProcess a, const AdaptedProcess& b) { return a += b; }
    friend AdaptedProcess operator-(AdaptedProcess a, const AdaptedProcess& b) { return a -= b; }
    friend AdaptedProcess operator*(Scalar s, AdaptedProcess a) { return a *= s; }

private:
    void check_compatible(const AdaptedProcess& other) const {
        if (other.levels_.size() != levels_.size() || other.dim() != dim())
            throw DimensionError("processes have different shapes");
    }

    std::vector<MatrixX<Scalar>> levels_;
};

/// Adapted process known to satisfy the martingale property on its space.
template <typename Scalar>
class Martingale {
public:
    Martingale() = default;

    /// Checks the one-step martingale property at every non-leaf node (and
    /// M_0 = 0 when `starts_at_zero`). Throws ContractError on failure.
    static Martingale certify(const FiniteFilteredSpace& space, AdaptedProcess<Scalar> process,
                              double tol = 1e-12, bool starts_at_zero = true);
    /// Wraps a process that is a martingale by construction.
    static Martingale assume(AdaptedProcess<Scalar> process) { return Martingale(std::move(process)); }

    const AdaptedProcess<Scalar>& process() const noexcept { return process_; }
    Index dim() const noexcept { return process_.dim(); }
    Index steps() const noexcept { return process_.steps(); }
    const MatrixX<Scalar>& level(Index k) const { return process_.level(k); }
    RandomVector<Scalar> at(Index k) const { return process_.at(k); }

private:
    explicit Martingale(AdaptedProcess<Scalar> process) : process_(std::move(process)) {}
    AdaptedProcess<Scalar> process_;
};

using RandomVectord = RandomVector<double>;
using AdaptedProcessd = AdaptedProcess<double>;
using Martingaled = Martingale<double>;

namespace detail {

inline void check_node_count(const FiniteFilteredSpace& space, Index level, Index cols) {
    if (level < 0 || level > space.steps())
        throw DomainError("level " + std::to_string(level) + " outside [0, " +
                          std::to_string(space.steps()) + "]");
    if (cols != space.node_count(level))
        throw DimensionError("random vector has " + std::to_string(cols) +
                             " columns but level " + std::to_string(level) + " has " +
                             std::to_string(space.node_count(level)) + " nodes");
}

/// Averages a level-(k) matrix onto level k-1 using the transition probabilities.
template <typename Scalar>
MatrixX<Scalar> average_to_parent(const FiniteFilteredSpace& space, Index k,
                                  const MatrixX<Scalar>& values) {
    const VectorXd& cp = space.conditional_probabilities(k);
    MatrixX<Scalar> out = MatrixX<Scalar>::Zero(values.rows(), space.node_count(k - 1));
    for (Index i = 0; i < out.cols(); ++i) {
        const Index first = space.first_child(k - 1, i);
        const Index count = space.child_count(k - 1, i);
        for (Index c = first; c < first + count; ++c)
            out.col(i) += Scalar(cp[c]) * values.col(c);
    }
    return out;
}

template <typename Scalar>
MatrixX<Scalar> copy_to_children(const FiniteFilteredSpace& space, Index k,
                                 const MatrixX<Scalar>& values) {
    MatrixX<Scalar> out(values.rows(), space.node_count(k + 1));
    for (Index i = 0; i < values.cols(); ++i) {
        const Index first = space.first_child(k, i);
        const Index count = space.child_count(k, i);
        for (Index c = first; c < first + count; ++c) out.col(c) = values.col(i);
    }
    return out;
}

}  // namespace detail

/// E[X | F_{t_level}] for X measurable at level(X) >= t_level.
template <typename Scalar>
RandomVector<Scalar> cond_expect(const FiniteFilteredSpace& space, const RandomVector<Scalar>& x,
                                 Index t_level) {
    detail::check_node_count(space, x.level(), x.size());
    if (t_level < 0 || t_level > x.level())
        throw DomainError("conditioning level " + std::to_string(t_level) +
                          " outside [0, " + std::to_string(x.level()) + "]");
    MatrixX<Scalar> v = x.values();
    for (Index k = x.level(); k > t_level; --k) v = detail::average_to_parent(space, k, v);
    return RandomVector<Scalar>(t_level, std::move(v));
}

/// Re-expresses a level-t random vector on the atoms of a finer level.
template <typename Scalar>
RandomVector<Scalar> lift(const FiniteFilteredSpace& space, const RandomVector<Scalar>& x,
                          Index target_level) {
    detail::check_node_count(space, x.level(), x.size());
    if (target_level < x.level() || target_level > space.steps())
        throw DomainError("cannot lift level " + std::to_string(x.level()) + " to level " +
                          std::to_string(target_level));
    MatrixX<Scalar> v = x.values();
    for (Index k = x.level(); k < target_level; ++k) v = detail::copy_to_children(space, k, v);
    return RandomVector<Scalar>(target_level, std::move(v));
}

/// The martingale E[X | F_{t_k}], k = 0..level(X), padded with X itself
/// on deeper levels.
template <typename Scalar>
AdaptedProcess<Scalar> conditional_expectation_process(const FiniteFilteredSpace& space,
                                                       const RandomVector<Scalar>& x) {
    detail::check_node_count(space, x.level(), x.size());
    std::vector<MatrixX<Scalar>> levels(static_cast<std::size_t>(space.steps() + 1));
    levels[static_cast<std::size_t>(x.level())] = x.values();
    for (Index k = x.level(); k > 0; --k)
        levels[static_cast<std::size_t>(k - 1)] =
            detail::average_to_parent(space, k, levels[static_cast<std::size_t>(k)]);
    for (Index k = x.level(); k < space.steps(); ++k)
        levels[static_cast<std::size_t>(k + 1)] =
            detail::copy_to_children(space, k, levels[static_cast<std::size_t>(k)]);
    return AdaptedProcess<Scalar>(std::move(levels));
}

namespace detail {

template <typename Scalar>
Scalar lp_of_magnitudes(const VectorXd& prob, const VectorX<Scalar>& mags, double p) {
    using std::pow;
    if (std::isinf(p)) return mags.size() == 0 ? Scalar(0) : mags.maxCoeff();
    Scalar acc(0);
    for (Index i = 0; i < mags.size(); ++i) acc += Scalar(prob[i]) * pow(mags[i], Scalar(p));
    return pow(acc, Scalar(1.0 / p));
}

inline void check_p(double p) {
    if (!(p > 1.0)) throw DomainError("norm index p must exceed 1");
}

}  // namespace detail

/// (E|X|^p)^{1/p}, Euclidean norm across dimensions first; p = inf is the max
/// over atoms.
template <typename Scalar>
Scalar lp_norm(const FiniteFilteredSpace& space, const RandomVector<Scalar>& x, double p) {
    detail::check_p(p);
    detail::check_node_count(space, x.level(), x.size());
    VectorX<Scalar> mags = x.values().colwise().norm().transpose();
    return detail::lp_of_magnitudes(space.probabilities(x.level()), mags, p);
}

/// || max_{k <= cut} |Y_{t_k}| ||_p over leaf paths.
template <typename Scalar>
Scalar sp_norm(const FiniteFilteredSpace& space, const AdaptedProcess<Scalar>& y, double p,
               std::optional<Index> up_to_level = std::nullopt) {
    detail::check_p(p);
    const Index cut = up_to_level.value_or(space.steps());
    if (cut < 0 || cut > space.steps() || y.steps() != space.steps())
        throw DomainError("S^p cut level outside the grid");
    VectorX<Scalar> running = y.level(0).colwise().norm().transpose();
    for (Index k = 1; k <= cut; ++k) {
        detail::check_node_count(space, k, y.level(k).cols());
        VectorX<Scalar> next(space.node_count(k));
        for (Index i = 0; i < next.size(); ++i) {
            using std::max;
            next[i] = max(running[space.parent(k, i)], Scalar(y.level(k).col(i).norm()));
        }
        running = std::move(next);
    }
    return detail::lp_of_magnitudes(space.probabilities(cut), running, p);
}

template <typename Scalar>
Scalar sp_norm(const FiniteFilteredSpace& space, const Martingale<Scalar>& m, double p,
               std::optional<Index> up_to_level = std::nullopt) {
    return sp_norm(space, m.process(), p, up_to_level);
}

template <typename Scalar>
struct TerminalMartingale {
    RandomVector<Scalar> initial;  ///< E_0 V at level 0
    Martingale<Scalar> martingale; ///< M_t = E_0 V - E_t V
};

/// Splits a terminal-measurable V into y = E_0 V and M^V_t = E_0 V - E_t V.
template <typename Scalar>
TerminalMartingale<Scalar> martingale_from_terminal(const FiniteFilteredSpace& space,
                                                    const RandomVector<Scalar>& v) {
    AdaptedProcess<Scalar> e = conditional_expectation_process(space, v);
    const MatrixX<Scalar> y0 = e.level(0);
    for (Index k = 0; k <= space.steps(); ++k) {
        MatrixX<Scalar>& lvl = e.level(k);
        for (Index i = 0; i < lvl.cols(); ++i) lvl.col(i) = y0.col(0) - lvl.col(i);
    }
    return {RandomVector<Scalar>(0, y0), Martingale<Scalar>::assume(std::move(e))};
}

/// || max_t |E_t V| ||_p / ||V||_p; Doob bounds it by p/(p-1).
template <typename Scalar>
Scalar doob_ratio(const FiniteFilteredSpace& space, const RandomVector<Scalar>& v, double p) {
    detail::check_p(p);
    if (std::isinf(p)) throw DomainError("Doob ratio needs a finite p");
    const Scalar denom = lp_norm(space, v, p);
    if (denom == Scalar(0)) return Scalar(0);
    const AdaptedProcess<Scalar> e = conditional_expectation_process(space, v);
    return sp_norm(space, e, p, v.level()) / denom;
}

template <typename Scalar>
Martingale<Scalar> Martingale<Scalar>::certify(const FiniteFilteredSpace& space,
                                               AdaptedProcess<Scalar> process, double tol,
                                               bool starts_at_zero) {
    using std::abs;
    if (process.steps() != space.steps())
        throw DimensionError("process and space have different step counts");
    for (Index k = 0; k <= space.steps(); ++k)
        detail::check_node_count(space, k, process.level(k).cols());
    if (starts_at_zero && process.level(0).cwiseAbs().maxCoeff() > tol)
        throw ContractError("martingale does not start at zero");
    for (Index k = 1; k <= space.steps(); ++k) {
        const MatrixX<Scalar> avg = detail::average_to_parent(space, k, process.level(k));
        const Scalar defect = (avg - process.level(k - 1)).cwiseAbs().maxCoeff();
        if (defect > tol)
            throw ContractError("martingale property violated between levels " +
                                std::to_string(k - 1) + " and " + std::to_string(k));
    }
    return Martingale(std::move(process));
}

}  // namespace bsekit
