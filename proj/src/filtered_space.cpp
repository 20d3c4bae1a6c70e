#include "bsekit/filtered_space.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace bsekit {

TimeGrid::TimeGrid(std::vector<double> times) : times_(std::move(times)) {
    if (times_.size() < 2) throw DomainError("time grid needs at least one step");
    if (times_.front() != 0.0) throw DomainError("time grid must start at 0");
    for (std::size_t k = 1; k < times_.size(); ++k)
        if (!(times_[k] > times_[k - 1]) || !std::isfinite(times_[k]))
            throw DomainError("time grid must be strictly increasing at index " + std::to_string(k));
}

TimeGrid TimeGrid::uniform(Index steps, double horizon) {
    if (steps < 1) throw DomainError("time grid needs at least one step");
    if (!(horizon > 0.0)) throw DomainError("horizon must be positive");
    std::vector<double> t(static_cast<std::size_t>(steps + 1));
    for (Index k = 0; k <= steps; ++k)
        t[static_cast<std::size_t>(k)] = horizon * static_cast<double>(k) / static_cast<double>(steps);
    t.back() = horizon;
    return TimeGrid(std::move(t));
}

Index TimeGrid::nearest_level(double t) const {
    const auto it = std::lower_bound(times_.begin(), times_.end(), t);
    if (it == times_.begin()) return 0;
    if (it == times_.end()) return steps();
    const auto prev = it - 1;
    return static_cast<Index>((t - *prev <= *it - t) ? prev - times_.begin() : it - times_.begin());
}

namespace {

VectorXd validated(const std::vector<double>& probs, Index level, Index node) {
    if (probs.empty())
        throw StructuralError("node " + std::to_string(node) + " at level " + std::to_string(level) +
                              " has no children");
    double sum = 0.0;
    for (double q : probs) {
        if (!(q > 0.0) || !std::isfinite(q))
            throw StructuralError("non-positive child probability at level " + std::to_string(level) +
                                  ", node " + std::to_string(node));
        sum += q;
    }
    if (std::abs(sum - 1.0) > FiniteFilteredSpace::kProbabilityTolerance)
        throw StructuralError("child probabilities at level " + std::to_string(level) + ", node " +
                              std::to_string(node) + " sum to " + std::to_string(sum));
    VectorXd out(static_cast<Index>(probs.size()));
    for (std::size_t c = 0; c < probs.size(); ++c) out[static_cast<Index>(c)] = probs[c] / sum;
    return out;
}

}  // namespace

FiniteFilteredSpace::FiniteFilteredSpace(
    TimeGrid grid, std::vector<std::vector<std::vector<double>>> child_probabilities)
    : grid_(std::move(grid)) {
    const Index steps = grid_.steps();
    if (static_cast<Index>(child_probabilities.size()) != steps)
        throw StructuralError("expected child probabilities for " + std::to_string(steps) + " levels");
    child_offsets_.resize(static_cast<std::size_t>(steps));
    parents_.resize(static_cast<std::size_t>(steps + 1));
    cond_prob_.resize(static_cast<std::size_t>(steps + 1));
    cond_prob_[0] = VectorXd::Ones(1);
    Index width = 1;
    for (Index k = 0; k < steps; ++k) {
        const auto& lvl = child_probabilities[static_cast<std::size_t>(k)];
        if (static_cast<Index>(lvl.size()) != width)
            throw StructuralError("level " + std::to_string(k) + " lists " + std::to_string(lvl.size()) +
                                  " nodes, expected " + std::to_string(width));
        auto& offsets = child_offsets_[static_cast<std::size_t>(k)];
        offsets.assign(static_cast<std::size_t>(width + 1), 0);
        for (Index i = 0; i < width; ++i)
            offsets[static_cast<std::size_t>(i + 1)] =
                offsets[static_cast<std::size_t>(i)] + static_cast<Index>(lvl[static_cast<std::size_t>(i)].size());
        const Index next = offsets.back();
        auto& par = parents_[static_cast<std::size_t>(k + 1)];
        par.resize(static_cast<std::size_t>(next));
        VectorXd& cp = cond_prob_[static_cast<std::size_t>(k + 1)];
        cp.resize(next);
        for (Index i = 0; i < width; ++i) {
            const VectorXd q = validated(lvl[static_cast<std::size_t>(i)], k, i);
            const Index first = offsets[static_cast<std::size_t>(i)];
            cp.segment(first, q.size()) = q;
            std::fill(par.begin() + first, par.begin() + first + q.size(), i);
        }
        width = next;
    }
    finalize();
}

FiniteFilteredSpace FiniteFilteredSpace::with_level_branching(TimeGrid grid,
                                                              const std::vector<VectorXd>& branching) {
    const Index steps = grid.steps();
    if (static_cast<Index>(branching.size()) != steps)
        throw StructuralError("expected branching for " + std::to_string(steps) + " levels");
    FiniteFilteredSpace s;
    s.grid_ = std::move(grid);
    s.child_offsets_.resize(static_cast<std::size_t>(steps));
    s.parents_.resize(static_cast<std::size_t>(steps + 1));
    s.cond_prob_.resize(static_cast<std::size_t>(steps + 1));
    s.cond_prob_[0] = VectorXd::Ones(1);
    Index width = 1;
    for (Index k = 0; k < steps; ++k) {
        const std::vector<double> raw(branching[static_cast<std::size_t>(k)].data(),
                                      branching[static_cast<std::size_t>(k)].data() +
                                          branching[static_cast<std::size_t>(k)].size());
        const VectorXd q = validated(raw, k, 0);
        const Index b = q.size();
        auto& offsets = s.child_offsets_[static_cast<std::size_t>(k)];
        offsets.resize(static_cast<std::size_t>(width + 1));
        for (Index i = 0; i <= width; ++i) offsets[static_cast<std::size_t>(i)] = i * b;
        auto& par = s.parents_[static_cast<std::size_t>(k + 1)];
        par.resize(static_cast<std::size_t>(width * b));
        VectorXd& cp = s.cond_prob_[static_cast<std::size_t>(k + 1)];
        cp.resize(width * b);
        for (Index i = 0; i < width; ++i) {
            cp.segment(i * b, b) = q;
            std::fill(par.begin() + i * b, par.begin() + (i + 1) * b, i);
        }
        width *= b;
    }
    s.finalize();
    return s;
}

void FiniteFilteredSpace::finalize() {
    const Index steps = grid_.steps();
    prob_.resize(static_cast<std::size_t>(steps + 1));
    prob_[0] = VectorXd::Ones(1);
    for (Index k = 1; k <= steps; ++k) {
        const auto& par = parents_[static_cast<std::size_t>(k)];
        const VectorXd& cp = cond_prob_[static_cast<std::size_t>(k)];
        const VectorXd& up = prob_[static_cast<std::size_t>(k - 1)];
        VectorXd p(cp.size());
        for (Index i = 0; i < cp.size(); ++i) p[i] = up[par[static_cast<std::size_t>(i)]] * cp[i];
        prob_[static_cast<std::size_t>(k)] = std::move(p);
    }
    const double total = prob_.back().sum();
    if (std::abs(total - 1.0) > kLeafTolerance)
        throw StructuralError("leaf probabilities sum to " + std::to_string(total));
}

std::size_t FiniteFilteredSpace::check_level(Index level) const {
    if (level < 0 || level > steps())
        throw DomainError("level " + std::to_string(level) + " outside [0, " + std::to_string(steps()) + "]");
    return static_cast<std::size_t>(level);
}

Index FiniteFilteredSpace::total_nodes() const {
    Index n = 0;
    for (const auto& p : prob_) n += p.size();
    return n;
}

Index FiniteFilteredSpace::parent(Index level, Index node) const {
    if (level == 0) throw DomainError("the root has no parent");
    return parents_[check_level(level)].at(static_cast<std::size_t>(node));
}

Index FiniteFilteredSpace::first_child(Index level, Index node) const {
    if (level >= steps()) throw DomainError("leaves have no children");
    return child_offsets_[check_level(level)].at(static_cast<std::size_t>(node));
}

Index FiniteFilteredSpace::child_count(Index level, Index node) const {
    if (level >= steps()) return 0;
    const auto& off = child_offsets_[check_level(level)];
    return off.at(static_cast<std::size_t>(node + 1)) - off[static_cast<std::size_t>(node)];
}

double FiniteFilteredSpace::conditional_probability(Index level, Index node) const {
    return cond_prob_[check_level(level)][node];
}

std::pair<Index, Index> FiniteFilteredSpace::descendant_range(Index level, Index node,
                                                              Index target_level) const {
    check_level(target_level);
    if (target_level < level) throw DomainError("descendants live at deeper levels");
    Index first = node;
    Index last = node + 1;
    for (Index k = level; k < target_level; ++k) {
        const auto& off = child_offsets_[static_cast<std::size_t>(k)];
        first = off[static_cast<std::size_t>(first)];
        last = off[static_cast<std::size_t>(last)];
    }
    return {first, last};
}

Index FiniteFilteredSpace::ancestor(Index level, Index node, Index target_level) const {
    if (target_level > level) throw DomainError("ancestors live at shallower levels");
    for (Index k = level; k > target_level; --k) node = parent(k, node);
    return node;
}

}  // namespace bsekit
