#include "bsekit/fixed_point_solver.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <functional>
#include <limits>
#include <ostream>
#include <random>
#include <sstream>

namespace bsekit {

void SolverConfig::validate(double horizon) const {
    if (!(p > 1.0)) throw DomainError("solver p must exceed 1");
    if (!(tol > 0.0) || !std::isfinite(tol)) throw DomainError("solver tol must be positive and finite");
    if (max_iter < 1) throw DomainError("solver max_iter must be at least 1");
    if (block_delta && !(*block_delta > 0.0 && *block_delta <= horizon * (1.0 + 1e-12)))
        throw DomainError("block_delta must lie in (0, T]");
    if (!(mann_theta > 0.0 && mann_theta <= 1.0)) throw DomainError("mann_theta must lie in (0, 1]");
    if (declared_C && !(*declared_C >= 0.0)) throw DomainError("declared_C must be nonnegative");
    for (const auto* r : {&radius_C, &R1, &R2})
        if (*r && !(**r >= 0.0 && std::isfinite(**r))) throw DomainError("radius constants must be nonnegative");
    if (!(forward_tol > 0.0)) throw DomainError("forward_tol must be positive");
    if (forward_max_iter < 1) throw DomainError("forward_max_iter must be at least 1");
    if (divergence_window < 1) throw DomainError("divergence_window must be at least 1");
}

const char* to_string(SolveStatus s) {
    switch (s) {
        case SolveStatus::converged: return "converged";
        case SolveStatus::max_iterations: return "max_iterations";
        case SolveStatus::diverged: return "diverged";
        case SolveStatus::non_finite: return "non_finite";
        case SolveStatus::forward_failed: return "forward_failed";
        case SolveStatus::window_failed: return "window_failed";
    }
    return "unknown";
}

// Constants ---------------------------------------------------------------

double contraction_constant(double p) {
    if (!(p > 1.0)) throw DomainError("p must exceed 1");
    if (std::isinf(p)) return 0.25;
    if (p == 2.0) return 0.2;
    return (p - 1.0) / (4.0 * p - 1.0);
}

std::optional<double> theoretical_bound(double C, double p) {
    if (!(C >= 0.0)) throw DomainError("Lipschitz constant must be nonnegative");
    if (C >= contraction_constant(p)) return std::nullopt;
    if (p == 2.0) return 4.0 * C / (1.0 - C);
    const double Cp = std::isinf(p) ? 1.0 : p / (p - 1.0);
    return 3.0 * Cp * C / (1.0 - C);
}

double prop_genBSDE_bound(double C1, double T, double p) {
    if (!(C1 >= 0.0)) throw DomainError("C1 must be nonnegative");
    if (!(T > 0.0)) throw DomainError("horizon must be positive");
    const double c = contraction_constant(p);
    if (C1 <= 1e-12) return c / T;
    return c * C1 / std::expm1(C1 * T);
}

// Forward equation ----------------------------------------------------------

namespace {

double max_abs(const AdaptedProcessd& a) {
    double m = 0.0;
    for (Index k = 0; k <= a.steps(); ++k)
        if (a.level(k).size()) m = std::max(m, a.level(k).cwiseAbs().maxCoeff());
    return m;
}

AdaptedProcessd lifted_initial(const FiniteFilteredSpace& space, const RandomVectord& y) {
    std::vector<MatrixXd> levels(static_cast<std::size_t>(space.steps() + 1));
    levels[0] = y.values();
    for (Index k = 0; k < space.steps(); ++k)
        levels[static_cast<std::size_t>(k + 1)] = detail::copy_to_children(space, k, levels[static_cast<std::size_t>(k)]);
    return AdaptedProcessd(std::move(levels));
}

ForwardSolution forward_impl(const GeneratorSpec& gen, const FiniteFilteredSpace& space, const NoiseModel* model,
                             const RandomVectord& y, const Martingaled& M, double tol, Index max_iter) {
    if (y.level() != 0 || y.dim() != gen.dim()) throw DimensionError("initial value must be a level-0 vector of the generator's dimension");
    detail::check_node_count(space, 0, y.size());
    if (M.dim() != gen.dim() || M.steps() != space.steps()) throw DimensionError("martingale does not match the generator");

    const Index K = space.steps();
    const AdaptedProcessd ylift = lifted_initial(space, y);
    ForwardSolution out;

    if (gen.forward_sweep()) {
        AdaptedProcessd Y = AdaptedProcessd::zero(space, gen.dim());
        AdaptedProcessd F = AdaptedProcessd::zero(space, gen.dim());
        Y.level(0) = ylift.level(0) - M.level(0);
        GeneratorState state(space, model, Y, M);
        for (Index k = 0; k < K; ++k) {
            MatrixXd cur = F.level(k);
            cur += driver_at(gen, state, k) * space.grid().dt(k);
            F.level(k + 1) = detail::copy_to_children(space, k, cur);
            Y.level(k + 1) = ylift.level(k + 1) - F.level(k + 1) - M.level(k + 1);
        }
        const double size = max_abs(Y);
        if (!std::isfinite(size)) throw ForwardSolveError("forward sweep produced non-finite values", INFINITY);
        out.Y = std::move(Y);
        out.F = std::move(F);
        out.iterations = 1;
        return out;
    }

    auto eval = [&](const AdaptedProcessd& Y) {
        return model ? evaluate_F(gen, *model, Y, M) : evaluate_F(gen, space, Y, M);
    };
    AdaptedProcessd Y = ylift - M.process();
    double diff = INFINITY;
    for (Index it = 1; it <= max_iter; ++it) {
        AdaptedProcessd next = ylift - eval(Y) - M.process();
        diff = max_abs(next - Y);
        Y = std::move(next);
        if (!std::isfinite(diff))
            throw ForwardSolveError("forward iteration produced non-finite values", diff);
        if (diff <= tol * (1.0 + max_abs(Y))) {
            out.F = eval(Y);
            out.defect = max_abs(ylift - out.F - M.process() - Y);
            out.Y = std::move(Y);
            out.iterations = it;
            return out;
        }
    }
    std::ostringstream os;
    os.precision(6);
    os << "forward equation did not settle after " << max_iter << " iterations (defect " << diff << ")";
    throw ForwardSolveError(os.str(), diff);
}

}  // namespace

ForwardSolution solve_condition_S(const GeneratorSpec& gen, const NoiseModel& model, const RandomVectord& y,
                                  const Martingaled& M, double tol, Index max_iter) {
    return forward_impl(gen, model.space(), &model, y, M, tol, max_iter);
}

ForwardSolution solve_condition_S(const GeneratorSpec& gen, const FiniteFilteredSpace& space, const RandomVectord& y,
                                  const Martingaled& M, double tol, Index max_iter) {
    return forward_impl(gen, space, nullptr, y, M, tol, max_iter);
}

namespace {

void check_terminal(const FiniteFilteredSpace& space, const RandomVectord& v, Index dim, const char* what) {
    if (v.level() != space.steps())
        throw DomainError(std::string(what) + " must be measurable at the terminal level");
    detail::check_node_count(space, v.level(), v.size());
    if (v.dim() != dim) throw DimensionError(std::string(what) + " has the wrong dimension");
}

RandomVectord centered(const FiniteFilteredSpace& space, const RandomVectord& v) {
    return v - lift(space, cond_expect(space, v, 0), v.level());
}

}  // namespace

GEvaluation evaluate_G(const GeneratorSpec& gen, const NoiseModel& model, const RandomVectord& xi,
                       const RandomVectord& V, double forward_tol, Index forward_max_iter) {
    const auto& space = model.space();
    check_terminal(space, xi, gen.dim(), "xi");
    check_terminal(space, V, gen.dim(), "V");
    auto tm = martingale_from_terminal(space, V);
    ForwardSolution fwd = solve_condition_S(gen, model, tm.initial, tm.martingale, forward_tol, forward_max_iter);
    RandomVectord G = xi + fwd.F.at(space.steps());
    return {std::move(tm.initial), std::move(tm.martingale), std::move(fwd), std::move(G)};
}

RandomVectord G_map(const GeneratorSpec& gen, const NoiseModel& model, const RandomVectord& xi, const RandomVectord& V) {
    return evaluate_G(gen, model, xi, V).G;
}

RandomVectord G0_map(const GeneratorSpec& gen, const NoiseModel& model, const RandomVectord& xi, const RandomVectord& V) {
    if (!gen.y_free()) throw DomainError("the centered map needs a Y-free generator");
    return centered(model.space(), G_map(gen, model, xi, V));
}

double bse_residual(const FiniteFilteredSpace& space, const RandomVectord& xi, const AdaptedProcessd& Y,
                    const AdaptedProcessd& F, const Martingaled& M) {
    const Index K = space.steps();
    check_terminal(space, xi, Y.dim(), "xi");
    if (Y.steps() != K || F.steps() != K || M.steps() != K || F.dim() != Y.dim() || M.dim() != Y.dim())
        throw DimensionError("residual inputs do not share a shape");
    const MatrixXd target = xi.values() + F.level(K) + M.level(K);
    const Index leaves = space.leaf_count();
    std::vector<Index> anc(static_cast<std::size_t>(leaves));
    for (Index i = 0; i < leaves; ++i) anc[static_cast<std::size_t>(i)] = i;
    double worst = 0.0;
    for (Index k = K; k >= 0; --k) {
        const MatrixXd s = Y.level(k) + F.level(k) + M.level(k);
        for (Index i = 0; i < leaves; ++i) {
            const double r = (s.col(anc[static_cast<std::size_t>(i)]) - target.col(i)).norm();
            if (!(r <= worst)) worst = std::isnan(r) ? INFINITY : r;
        }
        if (k > 0)
            for (auto& a : anc) a = space.parent(k, a);
    }
    return worst;
}

// Iteration driver ----------------------------------------------------------

namespace {

struct Candidate {
    RandomVectord next;  ///< the map applied to the current iterate
    AdaptedProcessd Y;
    AdaptedProcessd F;
    Martingaled M;
};

using StepMap = std::function<Candidate(const RandomVectord&)>;

void attach_bound(SolverReport& rep, const SolverConfig& cfg) {
    if (!cfg.declared_C) return;
    rep.theoretical_bound = theoretical_bound(*cfg.declared_C, cfg.p);
    if (!rep.theoretical_bound) {
        std::ostringstream os;
        os << "declared C = " << *cfg.declared_C << " is not below c_p = " << contraction_constant(cfg.p)
           << "; no contraction bound applies";
        rep.warnings.push_back(os.str());
    }
}

SolverReport run_iteration(const FiniteFilteredSpace& space, const RandomVectord& xi, RandomVectord V,
                           const SolverConfig& cfg, const std::string& method, double theta, const StepMap& step) {
    SolverReport rep;
    rep.method = method;
    rep.tol = cfg.tol;
    rep.xi_norm = lp_norm(space, xi, cfg.p);
    rep.window_to = space.steps();
    attach_bound(rep, cfg);

    const double threshold = cfg.tol * (1.0 + rep.xi_norm);
    const double tiny = 100.0 * std::numeric_limits<double>::epsilon() * (1.0 + rep.xi_norm);
    Index streak = 0;
    std::optional<Candidate> last;

    for (Index k = 0; k < cfg.max_iter; ++k) {
        Candidate c;
        try {
            c = step(V);
        } catch (const ForwardSolveError& e) {
            rep.status = SolveStatus::forward_failed;
            rep.message = e.what();
            rep.iterations = k;
            break;
        }
        rep.iterations = k + 1;
        const RandomVectord gap = c.next - V;
        const double gap_norm = lp_norm(space, gap, cfg.p);
        const double diff = theta == 1.0 ? gap_norm : theta * gap_norm;
        rep.iterates.push_back(diff);
        if (!std::isfinite(diff)) {
            rep.status = SolveStatus::non_finite;
            rep.message = "iteration produced non-finite values";
            rep.ratios.push_back(NAN);
            break;
        }
        if (rep.iterates.size() >= 2 && rep.iterates[rep.iterates.size() - 2] > tiny) {
            const double r = diff / rep.iterates[rep.iterates.size() - 2];
            rep.ratios.push_back(r);
            rep.observed_ratio = std::max(rep.observed_ratio, r);
            streak = r >= 1.0 ? streak + 1 : 0;
        } else {
            rep.ratios.push_back(NAN);
            streak = 0;
        }
        const double residual = bse_residual(space, xi, c.Y, c.F, c.M);
        if (gap_norm <= cfg.tol && residual <= threshold) {
            rep.status = SolveStatus::converged;
            rep.converged = true;
            rep.residual = residual;
            rep.V = std::move(V);
            rep.Y = std::move(c.Y);
            rep.F = std::move(c.F);
            rep.M = std::move(c.M);
            return rep;
        }
        if (streak >= cfg.divergence_window) {
            rep.status = SolveStatus::diverged;
            std::ostringstream os;
            os << "successive differences grew for " << streak << " consecutive iterations";
            rep.message = os.str();
            rep.residual = residual;
            rep.V = std::move(V);
            last = std::move(c);
            break;
        }
        if (theta == 1.0) {
            V = c.next;
        } else {
            V = (1.0 - theta) * V + theta * c.next;
        }
        rep.residual = residual;
        last = std::move(c);
    }
    if (rep.status == SolveStatus::max_iterations)
        rep.message = "no convergence within " + std::to_string(cfg.max_iter) + " iterations";
    if (rep.V.size() == 0) rep.V = std::move(V);
    if (last) {
        rep.Y = std::move(last->Y);
        rep.F = std::move(last->F);
        rep.M = std::move(last->M);
    }
    return rep;
}

RandomVectord start_of(const FiniteFilteredSpace& space, const RandomVectord& xi, const SolverConfig& cfg) {
    if (!cfg.initial) return xi;
    check_terminal(space, *cfg.initial, xi.dim(), "initial iterate");
    return *cfg.initial;
}

StepMap plain_step(const GeneratorSpec& gen, const NoiseModel& model, const RandomVectord& xi, const SolverConfig& cfg) {
    return [&gen, &model, &xi, &cfg](const RandomVectord& V) {
        GEvaluation ev = evaluate_G(gen, model, xi, V, cfg.forward_tol, cfg.forward_max_iter);
        return Candidate{std::move(ev.G), std::move(ev.forward.Y), std::move(ev.forward.F), std::move(ev.M)};
    };
}

void prepare(const GeneratorSpec& gen, const NoiseModel& model, const RandomVectord& xi, const SolverConfig& cfg) {
    cfg.validate(model.space().grid().horizon());
    check_terminal(model.space(), xi, gen.dim(), "xi");
}

std::optional<RadiusCheck> radius_check(const GeneratorSpec& gen, const NoiseModel& model, const RandomVectord& xi,
                                        const SolverConfig& cfg) {
    if (!cfg.radius_C || !cfg.R1 || !cfg.R2) return std::nullopt;
    const auto& space = model.space();
    const GeneratorSpec* first = &gen;
    if (const auto* s = std::get_if<SplitForm>(&gen.form())) first = s->first.get();
    const AdaptedProcessd zeroY = AdaptedProcessd::zero(space, gen.dim());
    const Martingaled zeroM = Martingaled::assume(zeroY);
    const AdaptedProcessd F1 = evaluate_F(*first, model, zeroY, zeroM);
    RadiusCheck rc;
    rc.R1 = *cfg.R1;
    rc.lhs = lp_norm(space, xi, 2.0) + lp_norm(space, F1.at(space.steps()), 2.0) + *cfg.radius_C * *cfg.R1 + *cfg.R2;
    rc.holds = rc.lhs <= rc.R1;
    return rc;
}

}  // namespace

SolverReport picard_solve(const GeneratorSpec& gen, const NoiseModel& model, const RandomVectord& xi,
                          const SolverConfig& config) {
    prepare(gen, model, xi, config);
    SolverReport rep = run_iteration(model.space(), xi, start_of(model.space(), xi, config), config, "picard", 1.0,
                                     plain_step(gen, model, xi, config));
    rep.radius = radius_check(gen, model, xi, config);
    if (rep.radius && !rep.radius->holds) rep.warnings.push_back("radius condition does not hold for the declared constants");
    return rep;
}

SolverReport mann_solve(const GeneratorSpec& gen, const NoiseModel& model, const RandomVectord& xi,
                        const SolverConfig& config) {
    prepare(gen, model, xi, config);
    SolverReport rep = run_iteration(model.space(), xi, start_of(model.space(), xi, config), config, "mann",
                                     config.mann_theta, plain_step(gen, model, xi, config));
    rep.radius = radius_check(gen, model, xi, config);
    if (rep.radius && !rep.radius->holds) rep.warnings.push_back("radius condition does not hold for the declared constants");
    return rep;
}

SolverReport centered_solve(const GeneratorSpec& gen, const NoiseModel& model, const RandomVectord& xi,
                            const SolverConfig& config) {
    prepare(gen, model, xi, config);
    if (!gen.y_free()) throw DomainError("the centered route needs a Y-free generator");
    const auto& space = model.space();
    const Index K = space.steps();
    const RandomVectord xi_mean = cond_expect(space, xi, 0);
    const RandomVectord start = centered(space, start_of(space, xi, config));

    auto step = [&](const RandomVectord& V) {
        GEvaluation ev = evaluate_G(gen, model, xi, V, config.forward_tol, config.forward_max_iter);
        const RandomVectord g_mean = cond_expect(space, ev.G, 0);
        RandomVectord next = ev.G - lift(space, g_mean, K);
        const RandomVectord y0 = xi_mean + cond_expect(space, ev.forward.F.at(K), 0);
        AdaptedProcessd Y = lifted_initial(space, y0) - ev.forward.F - ev.M.process();
        return Candidate{std::move(next), std::move(Y), std::move(ev.forward.F), std::move(ev.M)};
    };
    SolverReport rep = run_iteration(space, xi, start, config, "centered", 1.0, step);
    if (rep.Y.steps() == K) rep.V = lift(space, rep.Y.at(0), K) - rep.M.at(K);
    return rep;
}

SolverReport block_solve(const GeneratorSpec& gen, const NoiseModel& model, const RandomVectord& xi,
                         const SolverConfig& config) {
    prepare(gen, model, xi, config);
    const auto& space = model.space();
    const auto& grid = space.grid();
    const Index K = space.steps();
    const double T = grid.horizon();
    const double delta = config.block_delta.value_or(T);
    const double ratio = T / delta;
    const Index windows = static_cast<Index>(std::llround(ratio));
    if (windows < 1 || std::abs(ratio - static_cast<double>(windows)) > 1e-9 * ratio)
        throw DomainError("block_delta must divide the horizon");

    if (windows == 1) {
        SolverReport rep = picard_solve(gen, model, xi, config);
        return rep;
    }
    if (!gen.has_driver()) throw DomainError("block solving needs a generator given by a driver");

    std::vector<Index> bounds;  // descending level boundaries K = b_0 > b_1 > ... > 0
    for (Index j = 0; j <= windows; ++j) {
        const double t = T - static_cast<double>(j) * delta;
        const Index level = j == windows ? 0 : grid.nearest_level(t);
        if (std::abs(grid.time(level) - t) > 1e-9 * std::max(1.0, T))
            throw DomainError("block_delta must place window boundaries on grid times");
        if (!bounds.empty() && level >= bounds.back())
            throw DomainError("block_delta is finer than the time grid");
        bounds.push_back(level);
    }

    SolverReport rep;
    rep.method = "block";
    rep.tol = config.tol;
    rep.xi_norm = lp_norm(space, xi, config.p);
    rep.window_to = K;
    attach_bound(rep, config);

    AdaptedProcessd frozenY = AdaptedProcessd::zero(space, gen.dim());
    AdaptedProcessd frozenM = AdaptedProcessd::zero(space, gen.dim());
    SolverConfig wcfg = config;
    wcfg.initial.reset();
    wcfg.block_delta.reset();

    for (Index j = 0; j < windows; ++j) {
        const Index b = bounds[static_cast<std::size_t>(j)];
        const Index a = bounds[static_cast<std::size_t>(j + 1)];
        const RandomVectord xi_w = b == K ? xi : lift(space, frozenY.at(b), K);

        auto F = [&gen, &frozenY, &frozenM, a, b, K](const FunctionalArgs& args) {
            const auto& sp = args.space;
            std::vector<MatrixXd> yl(static_cast<std::size_t>(K + 1)), ml(static_cast<std::size_t>(K + 1));
            const RandomVectord Mb = args.M.at(b);
            const RandomVectord frozen_b = frozenM.at(b);
            for (Index l = 0; l <= K; ++l) {
                const auto s = static_cast<std::size_t>(l);
                yl[s] = (l < b || b == K) ? args.Y.level(l) : frozenY.level(l);
                if (l <= b)
                    ml[s] = args.M.level(l);
                else
                    ml[s] = lift(sp, Mb, l).values() + frozenM.level(l) - lift(sp, frozen_b, l).values();
            }
            const AdaptedProcessd Yh(std::move(yl));
            const Martingaled Mh = Martingaled::assume(AdaptedProcessd(std::move(ml)));
            GeneratorState st(sp, args.model, Yh, Mh);
            return integrate_driver(gen, st, a, b);
        };
        const GeneratorSpec window_gen = functional_generator(gen.name() + " window", gen.dim(), F, !gen.y_free(),
                                                              gen.needs_representation());
        SolverReport sub = picard_solve(window_gen, model, xi_w, wcfg);
        sub.method = "picard";
        sub.window_from = a;
        sub.window_to = b;
        rep.iterations += sub.iterations;
        rep.iterates.insert(rep.iterates.end(), sub.iterates.begin(), sub.iterates.end());
        rep.ratios.insert(rep.ratios.end(), sub.ratios.begin(), sub.ratios.end());
        rep.observed_ratio = std::max(rep.observed_ratio, sub.observed_ratio);
        if (!sub.converged) {
            std::ostringstream os;
            os << "window [" << grid.time(a) << ", " << grid.time(b) << "] failed: " << to_string(sub.status);
            if (!sub.message.empty()) os << " (" << sub.message << ")";
            rep.status = SolveStatus::window_failed;
            rep.message = os.str();
            rep.blocks.push_back(std::move(sub));
            rep.V = xi;
            return rep;
        }
        for (Index l = a; l < b; ++l) frozenY.level(l) = sub.Y.level(l);
        if (b == K) frozenY.level(K) = sub.Y.level(K);
        const RandomVectord sub_b = sub.M.at(b);
        const RandomVectord frozen_b = frozenM.at(b);
        for (Index l = K; l > b; --l)
            frozenM.level(l) = lift(space, sub_b, l).values() + frozenM.level(l) - lift(space, frozen_b, l).values();
        for (Index l = 0; l <= b; ++l) frozenM.level(l) = sub.M.level(l);
        rep.blocks.push_back(std::move(sub));
    }

    rep.Y = std::move(frozenY);
    rep.M = Martingaled::assume(std::move(frozenM));
    try {
        rep.F = evaluate_F(gen, model, rep.Y, rep.M);
    } catch (const ForwardSolveError& e) {
        rep.status = SolveStatus::forward_failed;
        rep.message = e.what();
        rep.V = xi;
        return rep;
    }
    rep.V = lift(space, rep.Y.at(0), K) - rep.M.at(K);
    rep.residual = bse_residual(space, xi, rep.Y, rep.F, rep.M);
    if (rep.residual <= config.tol * (1.0 + rep.xi_norm)) {
        rep.status = SolveStatus::converged;
        rep.converged = true;
    } else {
        std::ostringstream os;
        os << "pasted solution leaves a residual of " << rep.residual;
        rep.message = os.str();
    }
    return rep;
}

UniquenessReport verify_uniqueness(const GeneratorSpec& gen, const NoiseModel& model, const RandomVectord& xi,
                                   const SolverConfig& config, Index n_starts, std::uint64_t seed) {
    if (n_starts < 1) throw DomainError("need at least one starting point");
    const auto& space = model.space();
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal;
    UniquenessReport out;
    for (Index i = 0; i < n_starts; ++i) {
        SolverConfig cfg = config;
        if (i == 0) {
            cfg.initial = xi;
        } else if (i == 1) {
            cfg.initial = RandomVectord::zero(space, space.steps(), xi.dim());
        } else {
            MatrixXd v(xi.dim(), xi.size());
            for (Index c = 0; c < v.cols(); ++c)
                for (Index r = 0; r < v.rows(); ++r) v(r, c) = normal(rng);
            cfg.initial = RandomVectord(space.steps(), std::move(v));
        }
        SolverReport rep = config.block_delta ? block_solve(gen, model, xi, cfg) : picard_solve(gen, model, xi, cfg);
        out.statuses.push_back(rep.status);
        out.all_converged = out.all_converged && rep.converged;
        if (rep.converged) out.fixed_points.push_back(std::move(rep.V));
    }
    for (std::size_t i = 0; i < out.fixed_points.size(); ++i)
        for (std::size_t j = i + 1; j < out.fixed_points.size(); ++j)
            out.max_distance =
                std::max(out.max_distance, lp_norm(space, out.fixed_points[i] - out.fixed_points[j], config.p));
    return out;
}

// Output --------------------------------------------------------------------

std::string format_double(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

namespace {

nlohmann::json number(double v) {
    if (std::isfinite(v)) return v;
    return nullptr;
}

nlohmann::json matrix_json(const MatrixXd& m) {
    nlohmann::json cols = nlohmann::json::array();
    for (Index c = 0; c < m.cols(); ++c) {
        nlohmann::json col = nlohmann::json::array();
        for (Index r = 0; r < m.rows(); ++r) col.push_back(number(m(r, c)));
        cols.push_back(std::move(col));
    }
    return cols;
}

nlohmann::json process_json(const AdaptedProcessd& p) {
    nlohmann::json levels = nlohmann::json::array();
    for (Index k = 0; k <= p.steps(); ++k) levels.push_back(matrix_json(p.level(k)));
    return levels;
}

}  // namespace

nlohmann::json report_to_json(const SolverReport& r, bool include_processes) {
    nlohmann::json j;
    j["method"] = r.method;
    j["status"] = to_string(r.status);
    j["converged"] = r.converged;
    j["iterations"] = r.iterations;
    j["residual"] = number(r.residual);
    j["tol"] = r.tol;
    j["xi_norm"] = number(r.xi_norm);
    j["observed_ratio"] = number(r.observed_ratio);
    j["theoretical_bound"] = r.theoretical_bound ? nlohmann::json(*r.theoretical_bound) : nlohmann::json(nullptr);
    nlohmann::json it = nlohmann::json::array(), ra = nlohmann::json::array();
    for (double v : r.iterates) it.push_back(number(v));
    for (double v : r.ratios) ra.push_back(number(v));
    j["iterates"] = std::move(it);
    j["ratios"] = std::move(ra);
    j["message"] = r.message;
    j["warnings"] = r.warnings;
    j["window"] = {r.window_from, r.window_to};
    if (r.radius) j["radius"] = {{"lhs", number(r.radius->lhs)}, {"R1", r.radius->R1}, {"holds", r.radius->holds}};
    if (!r.blocks.empty()) {
        nlohmann::json blocks = nlohmann::json::array();
        for (const auto& b : r.blocks) blocks.push_back(report_to_json(b, false));
        j["blocks"] = std::move(blocks);
    }
    if (include_processes) {
        if (r.V.size()) j["V"] = matrix_json(r.V.values());
        if (r.Y.steps() >= 0 && r.Y.dim()) j["Y"] = process_json(r.Y);
        if (r.M.dim()) j["M"] = process_json(r.M.process());
    }
    return j;
}

void write_iterates_csv(std::ostream& os, const SolverReport& r) {
    os << "k,diff_norm,ratio\n";
    for (std::size_t k = 0; k < r.iterates.size(); ++k) {
        os << k << ',' << format_double(r.iterates[k]) << ',';
        if (k < r.ratios.size() && !std::isnan(r.ratios[k])) os << format_double(r.ratios[k]);
        os << '\n';
    }
}

}  // namespace bsekit
