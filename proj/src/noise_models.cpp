#include "bsekit/noise_models.hpp"

#include <cmath>
#include <sstream>
#include <string>

namespace bsekit {

namespace {

StepBranching idle_step() {
    StepBranching s;
    s.active = false;
    s.probabilities = VectorXd::Ones(1);
    s.sign_pattern = {0};
    s.jump_mark = {-1};
    s.coin = {0};
    return s;
}

StepBranching active_step(const NoiseSpec& spec, double dt) {
    const Index n = spec.brownian_dim;
    const Index m = static_cast<Index>(spec.intensities.size());
    const Index signs = Index{1} << n;
    const Index coins = spec.extra_noise ? 2 : 1;
    const Index branches = signs * (m + 1) * coins;

    VectorXd event_prob(m + 1);
    double none = 1.0;
    for (Index i = 0; i < m; ++i) {
        event_prob[i + 1] = spec.intensities[static_cast<std::size_t>(i)] * dt;
        none -= event_prob[i + 1];
    }
    event_prob[0] = none;

    StepBranching s;
    s.active = true;
    s.noise_dt = dt;
    s.probabilities.resize(branches);
    s.regressors.resize(n + m, branches);
    const double root_dt = std::sqrt(dt);
    Index b = 0;
    for (Index sign = 0; sign < signs; ++sign)
        for (Index e = 0; e <= m; ++e)
            for (Index c = 0; c < coins; ++c, ++b) {
                s.probabilities[b] = event_prob[e] / static_cast<double>(signs * coins);
                for (Index i = 0; i < n; ++i) s.regressors(i, b) = ((sign >> i) & 1) ? -root_dt : root_dt;
                for (Index i = 0; i < m; ++i)
                    s.regressors(n + i, b) = (e == i + 1 ? 1.0 : 0.0) - event_prob[i + 1];
                s.sign_pattern.push_back(static_cast<int>(sign));
                s.jump_mark.push_back(static_cast<int>(e) - 1);
                s.coin.push_back(static_cast<int>(c));
            }
    // Exact discrete Gram: dt I on the Brownian block, Bernoulli covariances on the Poisson block.
    s.gram = MatrixXd::Zero(n + m, n + m);
    for (Index i = 0; i < n; ++i) s.gram(i, i) = dt;
    for (Index i = 0; i < m; ++i)
        for (Index j = 0; j < m; ++j)
            s.gram(n + i, n + j) = (i == j ? event_prob[i + 1] : 0.0) - event_prob[i + 1] * event_prob[j + 1];
    return s;
}

void validate(const NoiseSpec& spec) {
    if (spec.brownian_dim < 0) throw DomainError("brownian_dim must be nonnegative");
    if (spec.brownian_dim > 20) throw DomainError("brownian_dim too large");
    if (spec.steps < 1) throw DomainError("steps must be at least 1");
    if (!(spec.horizon > 0.0) || !std::isfinite(spec.horizon)) throw DomainError("horizon must be positive");
    if (spec.marks.size() != spec.intensities.size())
        throw DimensionError("marks and intensities differ in length");
    for (std::size_t i = 0; i < spec.marks.size(); ++i) {
        if (spec.marks[i].size() == 0 || spec.marks[i].isZero(0.0))
            throw DomainError("mark " + std::to_string(i) + " must be a nonzero vector");
        if (!(spec.intensities[i] > 0.0) || !std::isfinite(spec.intensities[i]))
            throw DomainError("intensity " + std::to_string(i) + " must be positive");
    }
    if (spec.noise_steps) {
        const Index s = *spec.noise_steps;
        if (s < 1 || s > spec.steps || spec.steps % s != 0)
            throw DomainError("noise_steps must divide steps");
    }
}

}  // namespace

NoiseModel::NoiseModel(std::shared_ptr<const FiniteFilteredSpace> space, NoiseSpec spec,
                       std::vector<StepBranching> steps)
    : space_(std::move(space)), spec_(std::move(spec)), steps_(std::move(steps)) {
    if (!space_ || static_cast<Index>(steps_.size()) != space_->steps())
        throw StructuralError("noise model does not match its space");
}

NoiseModel build_jump_diffusion_tree(const NoiseSpec& spec) {
    validate(spec);
    const TimeGrid grid = TimeGrid::uniform(spec.steps, spec.horizon);
    const Index every = spec.steps / spec.noise_steps.value_or(spec.steps);

    std::vector<StepBranching> steps;
    std::vector<VectorXd> branching;
    double leaves = 1.0;
    for (Index k = 0; k < spec.steps; ++k) {
        if ((k + 1) % every != 0) {
            steps.push_back(idle_step());
        } else {
            const double dt = grid.time(k + 1) - grid.time(k + 1 - every);
            double mass = 0.0;
            for (double mu : spec.intensities) mass += mu * dt;
            if (!(mass < 1.0)) {
                std::ostringstream os;
                os << "invalid intensities: sum of intensity*dt = " << mass << " >= 1 (dt = " << dt << ")";
                throw DomainError(os.str());
            }
            steps.push_back(active_step(spec, dt));
        }
        leaves *= static_cast<double>(steps.back().probabilities.size());
        branching.push_back(steps.back().probabilities);
    }
    if (leaves > static_cast<double>(spec.leaf_budget)) {
        const auto count = leaves >= 1.8e19 ? UINT64_MAX : static_cast<std::uint64_t>(leaves);
        std::ostringstream os;
        os << "tree would have " << leaves << " leaves, budget is " << spec.leaf_budget;
        throw BudgetError(os.str(), count);
    }
    auto space = std::make_shared<const FiniteFilteredSpace>(
        FiniteFilteredSpace::with_level_branching(grid, branching));
    return NoiseModel(std::move(space), spec, std::move(steps));
}

NoiseModel build_brownian_tree(Index brownian_dim, Index steps, double horizon,
                               std::optional<Index> noise_steps, std::uint64_t leaf_budget) {
    if (brownian_dim < 1) throw DomainError("brownian_dim must be at least 1");
    NoiseSpec spec;
    spec.brownian_dim = brownian_dim;
    spec.steps = steps;
    spec.horizon = horizon;
    spec.noise_steps = noise_steps;
    spec.leaf_budget = leaf_budget;
    return build_jump_diffusion_tree(spec);
}

OneStepRegressors NoiseModel::one_step_regressors(Index level, Index node) const {
    if (level < 0 || level >= space_->steps())
        throw DomainError("level " + std::to_string(level) + " has no children in this model");
    if (node < 0 || node >= space_->node_count(level))
        throw DomainError("node " + std::to_string(node) + " is not in this model's space");
    const StepBranching& s = steps_[static_cast<std::size_t>(level)];
    OneStepRegressors out;
    out.probabilities = s.probabilities;
    if (s.active) {
        out.regressors = s.regressors;
        out.gram = s.gram;
    } else {
        out.regressors = MatrixXd::Zero(regressor_count(), 1);
        out.gram = MatrixXd::Zero(regressor_count(), regressor_count());
    }
    return out;
}

Index NoiseModel::branch_of(Index level, Index node) const {
    const Index up = space_->parent(level, node);
    return node - space_->first_child(level - 1, up);
}

AdaptedProcessd NoiseModel::accumulate(Index dim, const std::vector<MatrixXd>& increments) const {
    AdaptedProcessd out = AdaptedProcessd::zero(*space_, dim);
    for (Index k = 1; k <= space_->steps(); ++k) {
        const MatrixXd& inc = increments[static_cast<std::size_t>(k - 1)];
        MatrixXd& cur = out.level(k);
        const MatrixXd& prev = out.level(k - 1);
        for (Index i = 0; i < cur.cols(); ++i) {
            const Index b = branch_of(k, i);
            cur.col(i) = prev.col(space_->parent(k, i));
            if (inc.cols() > 0) cur.col(i) += inc.col(b);
        }
    }
    return out;
}

AdaptedProcessd NoiseModel::brownian_path() const {
    std::vector<MatrixXd> inc;
    for (const auto& s : steps_)
        inc.push_back(s.active ? MatrixXd(s.regressors.topRows(brownian_dim())) : MatrixXd());
    return accumulate(brownian_dim(), inc);
}

AdaptedProcessd NoiseModel::compensated_jump_path() const {
    std::vector<MatrixXd> inc;
    for (const auto& s : steps_)
        inc.push_back(s.active ? MatrixXd(s.regressors.bottomRows(mark_count())) : MatrixXd());
    return accumulate(mark_count(), inc);
}

AdaptedProcessd NoiseModel::jump_count_path() const {
    std::vector<MatrixXd> inc;
    for (const auto& s : steps_) {
        MatrixXd m = MatrixXd::Zero(mark_count(), static_cast<Index>(s.jump_mark.size()));
        for (std::size_t b = 0; b < s.jump_mark.size(); ++b)
            if (s.jump_mark[b] >= 0) m(s.jump_mark[b], static_cast<Index>(b)) = 1.0;
        inc.push_back(std::move(m));
    }
    return accumulate(mark_count(), inc);
}

AdaptedProcessd NoiseModel::coin_path() const {
    std::vector<MatrixXd> inc;
    for (const auto& s : steps_) {
        MatrixXd m(1, static_cast<Index>(s.coin.size()));
        for (std::size_t b = 0; b < s.coin.size(); ++b) m(0, static_cast<Index>(b)) = s.coin[b];
        inc.push_back(std::move(m));
    }
    return accumulate(1, inc);
}

}  // namespace bsekit
