#include "bsekit/generators.hpp"

#include <cmath>
#include <random>
#include <sstream>

namespace bsekit {

// GeneratorState --------------------------------------------------------------

GeneratorState::GeneratorState(const FiniteFilteredSpace& space, const NoiseModel* model,
                               const AdaptedProcessd& Y, const Martingaled& M)
    : space_(space), model_(model), Y_(Y), M_(M) {
    if (Y.steps() != space.steps() || M.steps() != space.steps())
        throw DimensionError("Y and M must live on the generator's space");
    if (Y.dim() != M.dim()) throw DimensionError("Y and M have different dimensions");
    if (model && &model->space() != &space) throw DomainError("noise model belongs to a different space");
}

const MartingaleDecomposition& GeneratorState::decomposition() const {
    if (!model_) throw DomainError("Z/U-dependent generators need a noise-generated space");
    if (!dec_) dec_ = represent(M_, *model_);
    return *dec_;
}

// DriverContext ---------------------------------------------------------------

DriverContext::DriverContext(const GeneratorState& state, Index step, unsigned signature, bool uses_y)
    : state_(state), step_(step), signature_(signature), uses_y_(uses_y) {
    if (step < 0 || step >= state.space().steps()) throw DomainError("driver step outside [0, K)");
}

double DriverContext::time() const { return state_.space().grid().time(step_); }
double DriverContext::dt() const { return state_.space().grid().dt(step_); }
Index DriverContext::dim() const { return state_.M().dim(); }
Index DriverContext::brownian_dim() const { return state_.model() ? state_.model()->brownian_dim() : 0; }
Index DriverContext::mark_count() const { return state_.model() ? state_.model()->mark_count() : 0; }
Index DriverContext::node_count() const { return state_.space().node_count(step_); }
const FiniteFilteredSpace& DriverContext::space() const { return state_.space(); }

void DriverContext::require(unsigned flag, const char* what) const {
    if (!(signature_ & flag))
        throw ContractError(std::string("driver reads ") + what + " outside its declared dependence");
}

void DriverContext::require_past(Index level, const char* what) const {
    if (level < 0) throw DomainError("negative level");
    if (level > step_)
        throw ContractError(std::string("driver reads ") + what + " at level " + std::to_string(level) +
                            " from step " + std::to_string(step_) +
                            "; future values must go through conditional expectations");
    if (level < step_) require(deps::whole_path, "earlier path values");
}

MatrixXd DriverContext::lifted(const MatrixXd& values, Index level) const {
    if (level == step_) return values;
    return lift(state_.space(), RandomVectord(level, values), step_).values();
}

MatrixXd DriverContext::Y(Index level) const {
    if (!uses_y_) throw ContractError("driver declared Y-free reads Y");
    require_past(level, "Y");
    if (level == step_ && !(signature_ & (deps::current | deps::whole_path))) require(deps::current, "Y");
    return lifted(state_.Y().level(level), level);
}

MatrixXd DriverContext::M(Index level) const {
    require_past(level, "M");
    if (level == step_ && !(signature_ & (deps::current | deps::whole_path))) require(deps::current, "M");
    return lifted(state_.M().level(level), level);
}

MatrixXd DriverContext::cond_expect_Y(Index level) const {
    if (!uses_y_) throw ContractError("driver declared Y-free reads Y");
    if (level <= step_) return Y(level);
    require(deps::anticipating, "future Y");
    return cond_expect(state_.space(), state_.Y().at(level), step_).values();
}

MatrixXd DriverContext::cond_expect_M(Index level) const {
    if (level <= step_) return M(level);
    require(deps::anticipating, "future M");
    return cond_expect(state_.space(), state_.M().at(level), step_).values();
}

MatrixXd DriverContext::Z(Index level) const {
    require(deps::zu, "Z");
    require_past(level, "Z");
    return lifted(state_.decomposition().Z[static_cast<std::size_t>(level)], level);
}

MatrixXd DriverContext::U(Index level) const {
    require(deps::zu, "U");
    require_past(level, "U");
    return lifted(state_.decomposition().U[static_cast<std::size_t>(level)], level);
}

DiscreteLaw DriverContext::law_Y(Index level) const {
    if (!uses_y_) throw ContractError("driver declared Y-free reads the law of Y");
    require(deps::law, "laws");
    if (level > step_) require(deps::anticipating, "future laws");
    return empirical_law(state_.space(), state_.Y().at(level));
}

DiscreteLaw DriverContext::law_Z(Index level) const {
    require(deps::law, "laws");
    require(deps::zu, "Z");
    if (level > step_) require(deps::anticipating, "future laws");
    const auto& z = state_.decomposition().Z[static_cast<std::size_t>(level)];
    return empirical_law(state_.space(), RandomVectord(level, z));
}

DiscreteLaw DriverContext::law_U(Index level) const {
    require(deps::law, "laws");
    require(deps::zu, "U");
    if (level > step_) require(deps::anticipating, "future laws");
    const auto& dec = state_.decomposition();
    const auto& mu = state_.model()->spec().intensities;
    VectorXd w(dec.dim * dec.mark_count);
    for (Index i = 0; i < dec.mark_count; ++i) w.segment(i * dec.dim, dec.dim).setConstant(mu[static_cast<std::size_t>(i)]);
    return empirical_law(state_.space(), RandomVectord(level, dec.U[static_cast<std::size_t>(level)]), w);
}

// GeneratorSpec ---------------------------------------------------------------

GeneratorSpec::GeneratorSpec(std::string name, Index dim, Form form)
    : name_(std::move(name)), dim_(dim), form_(std::move(form)) {
    if (dim_ < 1) throw DimensionError("generator dimension must be positive");
    if (const auto* s = std::get_if<SplitForm>(&form_)) {
        if (!s->first || !s->second) throw DomainError("split generator needs both parts");
        if (s->first->dim() != dim_ || s->second->dim() != dim_)
            throw DimensionError("split parts disagree on dimension");
    }
    if (const auto* d = std::get_if<DelayedConvolutionForm>(&form_))
        for (const auto& [t, w] : d->nu)
            if (!(w >= 0.0) || !std::isfinite(w) || !(t >= 0.0) || !std::isfinite(t))
                throw DomainError("delay measure atoms need t >= 0 and nonnegative finite weight");
}

namespace {

template <typename... Fs>
struct overloaded : Fs... {
    using Fs::operator()...;
};
template <typename... Fs>
overloaded(Fs...) -> overloaded<Fs...>;

}  // namespace

bool GeneratorSpec::y_free() const {
    return std::visit(overloaded{[](const FunctionalForm& f) { return !f.uses_y; },
                                 [](const IntegralForm& f) { return !f.uses_y; },
                                 [](const DelayedConvolutionForm&) { return true; },
                                 [](const SplitForm& s) { return s.first->y_free() && s.second->y_free(); }},
                      form_);
}

bool GeneratorSpec::needs_representation() const {
    return std::visit(overloaded{[](const FunctionalForm& f) { return f.needs_representation; },
                                 [](const IntegralForm& f) { return (f.signature & deps::zu) != 0; },
                                 [](const DelayedConvolutionForm&) { return true; },
                                 [](const SplitForm& s) {
                                     return s.first->needs_representation() || s.second->needs_representation();
                                 }},
                      form_);
}

bool GeneratorSpec::anticipating() const {
    return std::visit(overloaded{[](const FunctionalForm&) { return false; },
                                 [](const IntegralForm& f) { return (f.signature & deps::anticipating) != 0; },
                                 [](const DelayedConvolutionForm&) { return false; },
                                 [](const SplitForm& s) { return s.first->anticipating() || s.second->anticipating(); }},
                      form_);
}

bool GeneratorSpec::has_driver() const {
    return std::visit(overloaded{[](const FunctionalForm&) { return false; },
                                 [](const IntegralForm&) { return true; },
                                 [](const DelayedConvolutionForm&) { return true; },
                                 [](const SplitForm& s) { return s.first->has_driver() && s.second->has_driver(); }},
                      form_);
}

bool GeneratorSpec::forward_sweep() const { return has_driver() && !anticipating(); }

// Evaluation ------------------------------------------------------------------

SnappedMeasure snap_measure(const TimeGrid& grid, const std::vector<std::pair<double, double>>& nu) {
    SnappedMeasure out;
    const double scale = std::max(1.0, grid.horizon());
    for (const auto& [t, w] : nu) {
        if (w == 0.0) continue;
        const Index level = grid.nearest_level(t);
        if (std::abs(grid.time(level) - t) > 1e-12 * scale) {
            std::ostringstream os;
            os.precision(17);
            os << "delay atom at t=" << t << " snapped to grid time " << grid.time(level);
            out.warnings.push_back(os.str());
        }
        out.levels.push_back(level);
        out.weights.push_back(w);
    }
    return out;
}

namespace {

VectorXd column_or_empty(const MatrixXd& m, Index col) {
    return m.rows() == 0 ? VectorXd() : VectorXd(m.col(col));
}

MatrixXd delayed_driver(const DelayedConvolutionForm& form, Index dim, const GeneratorState& state, Index step) {
    const auto& space = state.space();
    const auto snapped = snap_measure(space.grid(), form.nu);
    const auto& dec = state.decomposition();
    MatrixXd out = MatrixXd::Zero(dim, space.node_count(step));
    for (std::size_t a = 0; a < snapped.levels.size(); ++a) {
        const Index lag = snapped.levels[a];
        if (lag > step) continue;
        const Index src = step - lag;
        const MatrixXd& z = dec.Z[static_cast<std::size_t>(src)];
        const MatrixXd& u = dec.U[static_cast<std::size_t>(src)];
        MatrixXd g(dim, space.node_count(src));
        for (Index i = 0; i < g.cols(); ++i) {
            const VectorXd v = form.g(space.grid().time(src), column_or_empty(z, i), column_or_empty(u, i));
            if (v.size() != dim) throw DimensionError("delay kernel returned the wrong dimension");
            g.col(i) = v;
        }
        out += snapped.weights[a] * (src == step ? g : lift(space, RandomVectord(src, g), step).values());
    }
    return out;
}

void check_driver_shape(const MatrixXd& v, Index dim, Index nodes, const std::string& name) {
    if (v.rows() != dim || v.cols() != nodes)
        throw DimensionError("driver '" + name + "' returned a " + std::to_string(v.rows()) + "x" +
                             std::to_string(v.cols()) + " block, expected " + std::to_string(dim) + "x" +
                             std::to_string(nodes));
}

AdaptedProcessd evaluate(const GeneratorSpec& gen, const GeneratorState& state) {
    const auto& space = state.space();
    if (gen.dim() != state.M().dim()) throw DimensionError("generator and processes differ in dimension");
    if (const auto* f = std::get_if<FunctionalForm>(&gen.form())) {
        AdaptedProcessd out = f->F(FunctionalArgs{space, state.model(), state.Y(), state.M(), state});
        if (out.steps() != space.steps() || out.dim() != gen.dim())
            throw DimensionError("generator '" + gen.name() + "' returned a process of the wrong shape");
        for (Index k = 0; k <= space.steps(); ++k) detail::check_node_count(space, k, out.level(k).cols());
        if (!out.level(0).isZero(0.0)) throw ContractError("generator '" + gen.name() + "' has F_0 != 0");
        return out;
    }
    if (const auto* s = std::get_if<SplitForm>(&gen.form())) {
        if (!gen.has_driver()) return evaluate(*s->first, state) + evaluate(*s->second, state);
    }
    return integrate_driver(gen, state, 0, space.steps());
}

}  // namespace

MatrixXd driver_at(const GeneratorSpec& gen, const GeneratorState& state, Index step) {
    const Index nodes = state.space().node_count(step);
    return std::visit(
        overloaded{[&](const FunctionalForm&) -> MatrixXd {
                       throw DomainError("generator '" + gen.name() + "' is not given by a driver");
                   },
                   [&](const IntegralForm& f) -> MatrixXd {
                       MatrixXd v = f.f(DriverContext(state, step, f.signature, f.uses_y));
                       check_driver_shape(v, gen.dim(), nodes, gen.name());
                       return v;
                   },
                   [&](const DelayedConvolutionForm& f) -> MatrixXd { return delayed_driver(f, gen.dim(), state, step); },
                   [&](const SplitForm& s) -> MatrixXd {
                       return driver_at(*s.first, state, step) + driver_at(*s.second, state, step);
                   }},
        gen.form());
}

AdaptedProcessd integrate_driver(const GeneratorSpec& gen, const GeneratorState& state, Index from, Index to) {
    const auto& space = state.space();
    AdaptedProcessd F = AdaptedProcessd::zero(space, gen.dim());
    for (Index k = 0; k < space.steps(); ++k) {
        MatrixXd cur = F.level(k);
        if (k >= from && k < to) cur += driver_at(gen, state, k) * space.grid().dt(k);
        F.level(k + 1) = detail::copy_to_children(space, k, cur);
    }
    return F;
}

AdaptedProcessd evaluate_F(const GeneratorSpec& gen, const NoiseModel& model, const AdaptedProcessd& Y,
                           const Martingaled& M) {
    GeneratorState state(model.space(), &model, Y, M);
    return evaluate(gen, state);
}

AdaptedProcessd evaluate_F(const GeneratorSpec& gen, const FiniteFilteredSpace& space, const AdaptedProcessd& Y,
                           const Martingaled& M) {
    if (gen.needs_representation())
        throw DomainError("generator '" + gen.name() + "' needs a noise-generated space");
    GeneratorState state(space, nullptr, Y, M);
    return evaluate(gen, state);
}

DelayedResult delayed_convolution_F(const KernelFn& g, const std::vector<std::pair<double, double>>& nu,
                                    Index dim, const NoiseModel& model, const Martingaled& M) {
    const auto& space = model.space();
    const Index K = space.steps();
    auto snapped = snap_measure(space.grid(), nu);
    AdaptedProcessd zeroY = AdaptedProcessd::zero(space, dim);
    GeneratorState state(space, &model, zeroY, M);
    const auto& dec = state.decomposition();
    AdaptedProcessd F = AdaptedProcessd::zero(space, dim);
    for (Index j = 0; j < K; ++j) {
        // nu[0, T - t_j) on the grid: atoms at levels < K - j
        double mass = 0.0;
        for (std::size_t a = 0; a < snapped.levels.size(); ++a)
            if (snapped.levels[a] < K - j) mass += snapped.weights[a];
        MatrixXd h = MatrixXd::Zero(dim, space.node_count(j));
        if (mass != 0.0)
            for (Index i = 0; i < h.cols(); ++i) {
                const VectorXd v = g(space.grid().time(j), column_or_empty(dec.Z[static_cast<std::size_t>(j)], i),
                                     column_or_empty(dec.U[static_cast<std::size_t>(j)], i));
                if (v.size() != dim) throw DimensionError("delay kernel returned the wrong dimension");
                h.col(i) = mass * v;
            }
        F.level(j + 1) = detail::copy_to_children(space, j, MatrixXd(F.level(j) + h * space.grid().dt(j)));
    }
    return {std::move(F), std::move(snapped.warnings)};
}

// Builders --------------------------------------------------------------------

GeneratorSpec zero_generator(Index dim) {
    return integral_generator(
        "zero", dim, 0u, [dim](const DriverContext& c) { return MatrixXd::Zero(dim, c.node_count()); }, false);
}

GeneratorSpec integral_generator(std::string name, Index dim, unsigned signature, DriverFn f, bool uses_y) {
    return GeneratorSpec(std::move(name), dim, IntegralForm{std::move(f), signature, uses_y});
}

GeneratorSpec functional_generator(std::string name, Index dim,
                                   std::function<AdaptedProcessd(const FunctionalArgs&)> F, bool uses_y,
                                   bool needs_representation) {
    return GeneratorSpec(std::move(name), dim, FunctionalForm{std::move(F), uses_y, needs_representation});
}

GeneratorSpec delayed_convolution_generator(std::string name, Index dim, KernelFn g,
                                            std::vector<std::pair<double, double>> nu) {
    return GeneratorSpec(std::move(name), dim, DelayedConvolutionForm{std::move(g), std::move(nu)});
}

GeneratorSpec split_generator(std::string name, GeneratorSpec first, GeneratorSpec second) {
    const Index dim = first.dim();
    return GeneratorSpec(std::move(name), dim,
                         SplitForm{std::make_shared<const GeneratorSpec>(std::move(first)),
                                   std::make_shared<const GeneratorSpec>(std::move(second))});
}

GeneratorSpec pointwise_generator(std::string name, Index dim, PointwiseFn f, bool uses_y, bool uses_zu) {
    const unsigned sig = deps::current | (uses_zu ? deps::zu : 0u);
    auto driver = [f = std::move(f), dim, uses_y, uses_zu](const DriverContext& c) {
        const MatrixXd y = uses_y ? c.Y() : MatrixXd(0, c.node_count());
        const MatrixXd z = uses_zu ? c.Z() : MatrixXd(0, c.node_count());
        const MatrixXd u = uses_zu ? c.U() : MatrixXd(0, c.node_count());
        MatrixXd out(dim, c.node_count());
        for (Index i = 0; i < out.cols(); ++i) {
            const VectorXd v = f(c.time(), column_or_empty(y, i), column_or_empty(z, i), column_or_empty(u, i));
            if (v.size() != dim) throw DimensionError("pointwise driver returned the wrong dimension");
            out.col(i) = v;
        }
        return out;
    };
    return integral_generator(std::move(name), dim, sig, std::move(driver), uses_y);
}

namespace {

DriverFn meanfield_fn(MeanFieldFn f, Index dim, bool uses_zu) {
    return [f = std::move(f), dim, uses_zu](const DriverContext& c) {
        const MatrixXd y = c.Y();
        const DiscreteLaw ly = c.law_Y();
        std::optional<DiscreteLaw> lz, lu;
        MatrixXd z(0, c.node_count()), u(0, c.node_count());
        if (uses_zu) {
            z = c.Z();
            u = c.U();
            if (c.brownian_dim() > 0) lz = c.law_Z();
            if (c.mark_count() > 0) lu = c.law_U();
        }
        const LawSet laws{ly, lz ? &*lz : nullptr, lu ? &*lu : nullptr};
        MatrixXd out(dim, c.node_count());
        for (Index i = 0; i < out.cols(); ++i) {
            const VectorXd v = f(c.time(), y.col(i), column_or_empty(z, i), column_or_empty(u, i), laws);
            if (v.size() != dim) throw DimensionError("mean-field driver returned the wrong dimension");
            out.col(i) = v;
        }
        return out;
    };
}

}  // namespace

GeneratorSpec meanfield_generator(std::string name, Index dim, MeanFieldFn f, bool uses_zu) {
    const unsigned sig = deps::current | deps::law | (uses_zu ? deps::zu : 0u);
    return integral_generator(std::move(name), dim, sig, meanfield_fn(std::move(f), dim, uses_zu));
}

AdaptedProcessd meanfield_driver(const MeanFieldFn& f, Index dim, const NoiseModel& model, const AdaptedProcessd& Y,
                                 const Martingaled& M, bool uses_zu) {
    return evaluate_F(meanfield_generator("meanfield", dim, f, uses_zu), model, Y, M);
}

VectorXd quadratic_meanfield_part(const DiscreteLaw& law_z, Index d, const VectorXd& alpha, const VectorXd& beta) {
    const Index n = beta.size();
    if (alpha.size() != d || law_z.dim() != d * n) throw DimensionError("quadratic mean-field dimensions disagree");
    MatrixXd acc = MatrixXd::Zero(d, n);
    for (Index a = 0; a < law_z.size(); ++a) {
        const Eigen::Map<const MatrixXd> z(law_z.atoms.col(a).data(), d, n);
        acc += law_z.weights[a] * z.norm() * z;
    }
    return alpha + acc * beta;
}

GeneratorSpec quadratic_meanfield_driver(const VectorXd& alpha, const VectorXd& beta,
                                         std::function<VectorXd(const MatrixXd&)> f1) {
    const Index d = alpha.size();
    const Index n = beta.size();
    if (d < 1 || n < 1) throw DimensionError("alpha and beta must be non-empty");
    if (!f1) throw DomainError("quadratic mean-field driver needs a Lipschitz part");
    auto lipschitz = [d, n, f1 = std::move(f1)](const DriverContext& c) {
        if (c.brownian_dim() != n) throw DimensionError("beta length must equal the Brownian dimension");
        const MatrixXd z = c.Z();
        MatrixXd out(d, c.node_count());
        for (Index i = 0; i < out.cols(); ++i) {
            const VectorXd v = f1(Eigen::Map<const MatrixXd>(z.col(i).data(), d, n));
            if (v.size() != d) throw DimensionError("f1 returned the wrong dimension");
            out.col(i) = v;
        }
        return out;
    };
    auto quadratic = [d, n, alpha, beta](const DriverContext& c) {
        if (c.brownian_dim() != n) throw DimensionError("beta length must equal the Brownian dimension");
        const VectorXd q = quadratic_meanfield_part(c.law_Z(), d, alpha, beta);
        return MatrixXd(q.replicate(1, c.node_count()));
    };
    return split_generator("quadratic_meanfield",
                           integral_generator("quadratic_meanfield.f1", d, deps::current | deps::zu, lipschitz, false),
                           integral_generator("quadratic_meanfield.f2", d, deps::law | deps::zu, quadratic, false));
}

// Lipschitz estimation ----------------------------------------------------------

namespace {

AdaptedProcessd random_process(std::mt19937_64& rng, const FiniteFilteredSpace& space, Index dim) {
    std::normal_distribution<double> g;
    AdaptedProcessd out = AdaptedProcessd::zero(space, dim);
    for (Index k = 0; k <= space.steps(); ++k)
        for (Index i = 0; i < out.level(k).size(); ++i) out.level(k).data()[i] = g(rng);
    return out;
}

Martingaled random_martingale(std::mt19937_64& rng, const FiniteFilteredSpace& space, Index dim) {
    std::normal_distribution<double> g;
    MatrixXd v(dim, space.leaf_count());
    for (Index i = 0; i < v.size(); ++i) v.data()[i] = g(rng);
    return martingale_from_terminal(space, RandomVectord(space.steps(), v)).martingale;
}

AdaptedProcessd iterate_k(const GeneratorSpec& gen, const NoiseModel& model, AdaptedProcessd Y,
                          const Martingaled& M, Index k) {
    const auto& space = model.space();
    for (Index j = 2; j <= k; ++j) {
        const AdaptedProcessd F = evaluate_F(gen, model, Y, M);
        AdaptedProcessd next = AdaptedProcessd::zero(space, Y.dim());
        const MatrixXd y0 = Y.level(0);
        for (Index l = 0; l <= space.steps(); ++l)
            next.level(l) = (-(F.level(l) + M.level(l))).colwise() + y0.col(0);
        Y = std::move(next);
    }
    return Y;
}

}  // namespace

DriverLipschitzProfile estimate_lipschitz(const GeneratorSpec& gen, const NoiseModel& model,
                                          const LipschitzOptions& options) {
    if (options.trials < 1) throw DomainError("estimate_lipschitz needs at least one trial");
    if (options.k < 1) throw DomainError("k must be at least 1");
    const auto& space = model.space();
    const Index d = gen.dim();
    std::mt19937_64 rng(options.seed);
    std::normal_distribution<double> g;
    DriverLipschitzProfile out;
    out.empirical = true;
    for (Index t = 0; t < options.trials; ++t) {
        const AdaptedProcessd Y = random_process(rng, space, d);
        const Martingaled M = random_martingale(rng, space, d);
        AdaptedProcessd Y2 = Y;
        Martingaled M2 = M;
        const int kind = static_cast<int>(t % 4);
        if (kind == 0 || kind == 3) {
            // constant shift on levels >= 1 keeps Y_0 fixed and aligns every node
            VectorXd c(d);
            for (Index r = 0; r < d; ++r) c[r] = g(rng);
            for (Index l = 1; l <= space.steps(); ++l) Y2.level(l).colwise() += c;
        }
        if (kind == 1) {
            const AdaptedProcessd P = random_process(rng, space, d);
            for (Index l = (options.k > 1 ? 1 : 0); l <= space.steps(); ++l) Y2.level(l) += P.level(l);
        }
        if (kind == 2 || kind == 3) {
            const Martingaled P = random_martingale(rng, space, d);
            M2 = Martingaled::assume(M.process() + P.process());
        }
        const double dy = sp_norm(space, AdaptedProcessd(Y - Y2), options.p);
        const double dm = sp_norm(space, AdaptedProcessd(M.process() - M2.process()), options.p);
        if (!(dy + dm > 0.0)) continue;
        const AdaptedProcessd F1 = evaluate_F(gen, model, iterate_k(gen, model, Y, M, options.k), M);
        const AdaptedProcessd F2 = evaluate_F(gen, model, iterate_k(gen, model, Y2, M2, options.k), M2);
        const double ratio = sp_norm(space, AdaptedProcessd(F1 - F2), options.p) / (dy + dm);
        out.C = std::max(out.C, ratio);
        ++out.pairs;
    }
    return out;
}

}  // namespace bsekit
