#include <doctest.h>

#include "bsekit/fixed_point_solver.hpp"
#include "bsekit/oracles.hpp"

#include <cmath>
#include <random>
#include <sstream>

using namespace bsekit;

namespace {

RandomVectord random_terminal(std::mt19937_64& rng, const FiniteFilteredSpace& s, Index d) {
    std::normal_distribution<double> g;
    MatrixXd v(d, s.leaf_count());
    for (Index i = 0; i < v.size(); ++i) v.data()[i] = g(rng);
    return RandomVectord(s.steps(), v);
}

Martingaled random_martingale(std::mt19937_64& rng, const FiniteFilteredSpace& s, Index d) {
    return martingale_from_terminal(s, random_terminal(rng, s, d)).martingale;
}

double max_gap(const AdaptedProcessd& a, const AdaptedProcessd& b) {
    double m = 0.0;
    for (Index k = 0; k <= a.steps(); ++k) m = std::max(m, (a.level(k) - b.level(k)).cwiseAbs().maxCoeff());
    return m;
}

GeneratorSpec constant_driver(double c) {
    return pointwise_generator(
        "constant", 1, [c](double, const VectorXd&, const VectorXd&, const VectorXd&) { return VectorXd::Constant(1, c); },
        false, false);
}

GeneratorSpec linear_driver(double a, double b) {
    return pointwise_generator(
        "linear", 1,
        [a, b](double, const VectorXd& y, const VectorXd&, const VectorXd&) { return VectorXd((a * y.array() + b).matrix()); },
        true, false);
}

// f = a sin(y) + c cos(z_1) + ... + b, so C = max(|a| T, |c| sqrt(n T)) bounds the Lipschitz constant.
GeneratorSpec sin_cos_driver(double a, double c, double b) {
    return pointwise_generator(
        "sin_cos", 1,
        [a, c, b](double, const VectorXd& y, const VectorXd& z, const VectorXd&) {
            return VectorXd::Constant(1, a * std::sin(y[0]) + c * z.array().cos().sum() + b);
        },
        true, true);
}

RandomVectord terminal_W(const NoiseModel& m) {
    return m.brownian_path().at(m.space().steps());
}

}  // namespace

TEST_CASE("contraction constants and thresholds") {
    CHECK(contraction_constant(2.0) == 0.2);
    CHECK(contraction_constant(INFINITY) == 0.25);
    CHECK(contraction_constant(3.0) == doctest::Approx(2.0 / 11.0).epsilon(1e-15));
    CHECK_THROWS_AS(contraction_constant(1.0), DomainError);
    CHECK_THROWS_AS(contraction_constant(0.5), DomainError);

    CHECK(*theoretical_bound(0.1, 2.0) == doctest::Approx(0.4 / 0.9).epsilon(1e-15));
    CHECK(*theoretical_bound(0.1, 3.0) == doctest::Approx(3.0 * 1.5 * 0.1 / 0.9).epsilon(1e-15));
    CHECK_FALSE(theoretical_bound(0.2, 2.0).has_value());

    CHECK(prop_genBSDE_bound(1.0, 1.0, 2.0) == doctest::Approx(0.2 / (std::exp(1.0) - 1.0)).epsilon(1e-15));
    CHECK(prop_genBSDE_bound(1e-13, 2.0, 2.0) == 0.1);
    CHECK(prop_genBSDE_bound(1e-9, 2.0, 2.0) == doctest::Approx(0.1).epsilon(1e-8));
    CHECK_THROWS_AS(prop_genBSDE_bound(-1.0, 1.0, 2.0), DomainError);
    for (double C1 : {0.01, 0.5, 1.0, 3.0}) {
        double prev = INFINITY;
        for (double T = 0.1; T < 10.0; T *= 1.3) {
            const double v = prop_genBSDE_bound(C1, T, 2.0);
            CHECK(v < prev);
            prev = v;
        }
    }
}

TEST_CASE("condition S: trivial generators") {
    const auto model = build_brownian_tree(1, 3, 1.0);
    const auto& s = model.space();
    std::mt19937_64 rng(3);
    const auto M = random_martingale(rng, s, 1);
    const RandomVectord y(0, MatrixXd::Constant(1, 1, 0.7));

    const auto zero = solve_condition_S(zero_generator(1), model, y, M);
    for (Index k = 0; k <= 3; ++k) CHECK((zero.Y.level(k).array() - (0.7 - M.level(k).array())).abs().maxCoeff() == 0.0);

    const auto fm = functional_generator(
        "M", 1, [](const FunctionalArgs& a) { return a.M.process(); }, false);
    const auto twice = solve_condition_S(fm, s, y, M);
    for (Index k = 0; k <= 3; ++k)
        CHECK((twice.Y.level(k).array() - (0.7 - 2.0 * M.level(k).array())).abs().maxCoeff() <= 1e-15);
    CHECK(twice.iterations <= 2);
    CHECK(twice.defect <= 1e-15);
}

TEST_CASE("condition S: f = aY against the explicit forward recursion") {
    const double a = 0.8;
    const auto model = build_brownian_tree(1, 3, 1.2);
    const auto& s = model.space();
    std::mt19937_64 rng(5);
    for (int trial = 0; trial < 10; ++trial) {
        const auto M = random_martingale(rng, s, 1);
        const RandomVectord y(0, MatrixXd::Constant(1, 1, 0.3 + trial));
        const auto sol = solve_condition_S(linear_driver(a, 0.0), model, y, M);

        std::vector<MatrixXd> ref{y.values()};
        for (Index k = 0; k < 3; ++k) {
            const double dt = s.grid().dt(k);
            MatrixXd next(1, s.node_count(k + 1));
            for (Index i = 0; i < next.cols(); ++i) {
                const Index p = s.parent(k + 1, i);
                const double yk = ref.back()(0, p);
                next(0, i) = yk - a * yk * dt - (M.level(k + 1)(0, i) - M.level(k)(0, p));
            }
            ref.push_back(next);
        }
        for (Index k = 0; k <= 3; ++k)
            CHECK((sol.Y.level(k) - ref[static_cast<std::size_t>(k)]).cwiseAbs().maxCoeff() <= 1e-13);
    }
}

TEST_CASE("condition S: iteration failure reports its defect") {
    const auto model = build_brownian_tree(1, 2, 1.0);
    std::mt19937_64 rng(2);
    const auto M = random_martingale(rng, model.space(), 1);
    // F_t = 3 (Y_t - Y_0) makes the iteration expand
    const auto bad = functional_generator("expanding", 1, [](const FunctionalArgs& a) {
        AdaptedProcessd out = a.Y;
        for (Index k = 0; k <= a.space.steps(); ++k)
            out.level(k) = 3.0 * (a.Y.level(k).array() - a.Y.level(0)(0, 0)).matrix();
        return out;
    });
    try {
        solve_condition_S(bad, model, RandomVectord(0, MatrixXd::Constant(1, 1, 1.0)), M, 1e-14, 50);
        FAIL("expected a forward failure");
    } catch (const ForwardSolveError& e) {
        CHECK(e.defect() > 1.0);
    }
}

TEST_CASE("G map: trivial and hand-computed cases") {
    const auto model = build_brownian_tree(1, 2, 1.0);
    const auto& s = model.space();
    std::mt19937_64 rng(9);
    const auto xi = random_terminal(rng, s, 1);
    const auto V = random_terminal(rng, s, 1);
    CHECK((G_map(zero_generator(1), model, xi, V).values() - xi.values()).cwiseAbs().maxCoeff() == 0.0);
    CHECK((G_map(constant_driver(1.5), model, xi, V).values().array() - xi.values().array() - 1.5).abs().maxCoeff() <=
          1e-15);

    // f = 0.4 M_t: G(V) = xi + 0.4 * 0.5 * (E_0 V - E_1 V)
    const auto alphaM = integral_generator(
        "alphaM", 1, deps::current, [](const DriverContext& c) { return MatrixXd(0.4 * c.M()); }, false);
    RandomVectord W(2, (MatrixXd(1, 4) << 1.0, 2.0, 3.0, 4.0).finished());
    const auto G = G_map(alphaM, model, xi, W);
    const VectorXd expected = (VectorXd(4) << 0.2, 0.2, -0.2, -0.2).finished();
    CHECK((G.values().row(0).transpose() - xi.values().row(0).transpose() - expected).cwiseAbs().maxCoeff() <= 1e-15);
}

TEST_CASE("G0 map and the centered route") {
    const auto model = build_brownian_tree(1, 4, 1.0);
    const auto& s = model.space();
    std::mt19937_64 rng(11);
    const auto xi = random_terminal(rng, s, 1);
    const auto V = martingale_from_terminal(s, random_terminal(rng, s, 1));
    RandomVectord V0 = random_terminal(rng, s, 1);
    V0 = V0 - lift(s, cond_expect(s, V0, 0), 4);

    const auto g0 = G0_map(zero_generator(1), model, xi, V0);
    const auto expect = xi - lift(s, cond_expect(s, xi, 0), 4);
    CHECK((g0.values() - expect.values()).cwiseAbs().maxCoeff() <= 1e-15);

    const RandomVectord det(4, MatrixXd::Constant(1, s.leaf_count(), 2.0));
    CHECK(G0_map(zero_generator(1), model, det, RandomVectord::zero(s, 4, 1)).values().cwiseAbs().maxCoeff() <= 1e-15);
    CHECK_THROWS_AS(G0_map(linear_driver(0.1, 0.0), model, xi, V0), DomainError);

    // Y-free linear driver in M and Z
    const auto gen = integral_generator(
        "mz", 1, deps::current | deps::zu,
        [](const DriverContext& c) { return MatrixXd(0.15 * c.M() + 0.1 * c.Z() + MatrixXd::Constant(1, c.node_count(), 0.3)); },
        false);
    SolverConfig cfg;
    cfg.tol = 1e-13;
    const auto plain = picard_solve(gen, model, xi, cfg);
    const auto cent = centered_solve(gen, model, xi, cfg);
    REQUIRE(plain.converged);
    REQUIRE(cent.converged);
    CHECK(max_gap(plain.Y, cent.Y) <= 1e-10);
    CHECK(max_gap(plain.M.process(), cent.M.process()) <= 1e-10);
    CHECK((plain.V.values() - cent.V.values()).cwiseAbs().maxCoeff() <= 1e-10);
    CHECK(cent.residual <= cfg.tol * (1.0 + cent.xi_norm));
}

TEST_CASE("picard with a zero driver is exact in one iteration") {
    for (Index n : {1, 2}) {
        const auto model = build_brownian_tree(n, 4, 2.0);
        const auto& s = model.space();
        std::mt19937_64 rng(static_cast<std::uint64_t>(n));
        const auto xi = random_terminal(rng, s, 2);
        const auto rep = picard_solve(zero_generator(2), model, xi);
        REQUIRE(rep.converged);
        CHECK(rep.iterations == 1);
        CHECK(rep.status == SolveStatus::converged);
        CHECK((rep.V.values() - xi.values()).cwiseAbs().maxCoeff() == 0.0);
        const auto ref = zero_driver_oracle(s, xi);
        CHECK(max_gap(rep.Y, ref.Y) <= 1e-14);
        CHECK(max_gap(rep.M.process(), ref.M.process()) <= 1e-14);
        CHECK(rep.residual <= 1e-14);
    }
}

TEST_CASE("picard against the linear scalar oracle") {
    std::mt19937_64 rng(21);
    for (Index K : {1, 3, 5, 7}) {
        const auto model = build_brownian_tree(1, K, 1.0);
        const auto& s = model.space();
        const auto xi = random_terminal(rng, s, 1);
        SolverConfig cfg;
        cfg.tol = 1e-12;
        const auto rep = picard_solve(linear_driver(0.5, 1.0), model, xi, cfg);
        REQUIRE(rep.converged);
        const auto ref = linear_scalar_oracle(s, xi, 0.5, 1.0);
        CHECK(sp_norm(s, rep.Y - ref.Y, 2.0) <= 10 * cfg.tol);
        CHECK(sp_norm(s, rep.M.process() - ref.M.process(), 2.0) <= 10 * cfg.tol);
    }
}

TEST_CASE("linear oracle: a = 0 is exact and the gap is first order") {
    const auto m = build_brownian_tree(1, 6, 1.0);
    const auto xi = terminal_W(m);
    const double mean = cond_expect(m.space(), xi, 0).values()(0, 0);
    const auto ref = linear_scalar_oracle(m.space(), xi, 0.0, 1.0);
    CHECK(ref.Y.level(0)(0, 0) == doctest::Approx(mean + 1.0).epsilon(1e-15));
    CHECK(linear_scalar_closed_form(2.0, 0.0, 1.0, 3.0) == 5.0);

    std::vector<double> gaps;
    for (Index K : {32, 64, 128}) {
        const auto model = build_brownian_tree(1, K, 1.0, Index{4});
        const auto x = terminal_W(model);
        RandomVectord sq(K, x.values().array().square().matrix());
        const auto o = linear_scalar_oracle(model.space(), sq, 0.5, 1.0);
        const double e = cond_expect(model.space(), sq, 0).values()(0, 0);
        gaps.push_back(std::abs(o.Y.level(0)(0, 0) - linear_scalar_closed_form(e, 0.5, 1.0, 1.0)));
    }
    CHECK(gaps[1] < gaps[0]);
    CHECK(gaps[2] < gaps[1]);
    CHECK(gaps[0] / gaps[1] >= 1.7);
    CHECK(gaps[0] / gaps[1] <= 2.3);
    CHECK(gaps[1] / gaps[2] >= 1.7);
    CHECK(gaps[1] / gaps[2] <= 2.3);
}

TEST_CASE("picard against the backward recursion oracle on Markov drivers") {
    std::mt19937_64 rng(33);
    std::uniform_real_distribution<double> coef(-1.0, 1.0);
    for (int trial = 0; trial < 8; ++trial) {
        const Index n = 1 + trial % 2;
        const Index K = 3 + trial % 4;
        const double T = 1.0;
        const auto model = build_brownian_tree(n, K, T);
        const auto xi = random_terminal(rng, model.space(), 1);
        const double a = 0.15 * coef(rng), c = 0.1 * coef(rng) / std::sqrt(static_cast<double>(n)), b = coef(rng);
        SolverConfig cfg;
        cfg.tol = 1e-12;
        const auto rep = picard_solve(sin_cos_driver(a, c, b), model, xi, cfg);
        REQUIRE(rep.converged);
        const auto ref = backward_recursion_oracle(
            model, xi,
            [a, c, b](double, const VectorXd& y, const MatrixXd& z) {
                return VectorXd::Constant(1, a * std::sin(y[0]) + c * z.array().cos().sum() + b);
            },
            cfg.tol / 10);
        CHECK(sp_norm(model.space(), rep.Y - ref.Y, 2.0) <= 10 * cfg.tol);
    }
}

TEST_CASE("declared contraction: ratios under the bound, geometric decay, round trip") {
    std::mt19937_64 rng(44);
    for (int trial = 0; trial < 6; ++trial) {
        const auto model = build_brownian_tree(1, 5, 1.0);
        const auto& s = model.space();
        const auto xi = random_terminal(rng, s, 1);
        const double C = 0.1;
        SolverConfig cfg;
        cfg.tol = 1e-13;
        cfg.declared_C = C;
        cfg.initial = random_terminal(rng, s, 1);
        const auto rep = picard_solve(sin_cos_driver(C, C, 0.5), model, xi, cfg);
        REQUIRE(rep.converged);
        REQUIRE(rep.theoretical_bound.has_value());
        const double r = *rep.theoretical_bound;
        CHECK(rep.observed_ratio <= r + 1e-9);
        for (std::size_t k = 0; k < rep.iterates.size(); ++k)
            CHECK(rep.iterates[k] <= std::pow(r, static_cast<double>(k)) * rep.iterates[0] + 1e-15);
        const auto back = lift(s, rep.Y.at(0), 5) - rep.M.at(5);
        CHECK((back.values() - rep.V.values()).cwiseAbs().maxCoeff() <= 1e-12);
        CHECK(bse_residual(s, xi, rep.Y, rep.F, rep.M) <= cfg.tol * (1.0 + rep.xi_norm));
    }
}

TEST_CASE("divergence is a report state") {
    const auto model = build_brownian_tree(1, 3, 1.0);
    std::mt19937_64 rng(7);
    const auto xi = random_terminal(rng, model.space(), 1);
    const auto expanding = functional_generator(
        "2M", 1, [](const FunctionalArgs& a) { return AdaptedProcessd(2.0 * a.M.process()); }, false);
    const auto rep = picard_solve(expanding, model, xi);
    CHECK_FALSE(rep.converged);
    CHECK(rep.status == SolveStatus::diverged);
    CHECK(rep.observed_ratio == doctest::Approx(2.0));
    CHECK(rep.iterations <= 12);
    CHECK_FALSE(rep.message.empty());
}

TEST_CASE("block solving") {
    std::mt19937_64 rng(55);
    const auto model = build_brownian_tree(1, 6, 1.0);
    const auto& s = model.space();
    for (int trial = 0; trial < 3; ++trial) {
        const auto xi = random_terminal(rng, s, 1);
        const auto gen = sin_cos_driver(0.3, 0.2, 0.1 * trial);
        SolverConfig cfg;
        cfg.tol = 1e-12;
        const auto pic = picard_solve(gen, model, xi, cfg);
        cfg.block_delta = 1.0;
        const auto one = block_solve(gen, model, xi, cfg);
        REQUIRE(pic.converged);
        REQUIRE(one.converged);
        CHECK(max_gap(pic.Y, one.Y) <= 1e-12);
        CHECK((pic.V.values() - one.V.values()).cwiseAbs().maxCoeff() <= 1e-12);

        for (double delta : {0.5, 1.0 / 3.0}) {
            cfg.block_delta = delta;
            const auto split = block_solve(gen, model, xi, cfg);
            REQUIRE(split.converged);
            CHECK(split.blocks.size() == static_cast<std::size_t>(std::llround(1.0 / delta)));
            CHECK(max_gap(pic.Y, split.Y) <= 1e-10);
            CHECK(max_gap(pic.M.process(), split.M.process()) <= 1e-10);
            CHECK(split.residual <= cfg.tol * (1.0 + split.xi_norm));
        }
    }

    const auto xi = random_terminal(rng, s, 1);
    SolverConfig cfg;
    cfg.block_delta = 0.5;
    const auto zero = block_solve(zero_generator(1), model, xi, cfg);
    const auto ref = zero_driver_oracle(s, xi);
    REQUIRE(zero.converged);
    CHECK(max_gap(zero.Y, ref.Y) <= 1e-14);
    CHECK(max_gap(zero.M.process(), ref.M.process()) <= 1e-14);

    cfg.block_delta = 0.3;
    CHECK_THROWS_AS(block_solve(zero_generator(1), model, xi, cfg), DomainError);
    cfg.block_delta = 0.5;
    const auto fm = functional_generator("M", 1, [](const FunctionalArgs& a) { return a.M.process(); }, false);
    CHECK_THROWS_AS(block_solve(fm, model, xi, cfg), DomainError);
}

TEST_CASE("block solving with an anticipating driver") {
    const auto model = build_brownian_tree(1, 4, 1.0);
    const auto& s = model.space();
    std::mt19937_64 rng(66);
    const auto xi = random_terminal(rng, s, 1);
    // f_t = 0.2 E_t[Y_T] + 0.1 sin(Y_t)
    const auto gen = integral_generator(
        "anticipating", 1, deps::current | deps::anticipating,
        [](const DriverContext& c) {
            return MatrixXd(0.2 * c.cond_expect_Y(c.space().steps()) + 0.1 * c.Y().array().sin().matrix());
        });
    SolverConfig cfg;
    cfg.tol = 1e-12;
    const auto pic = picard_solve(gen, model, xi, cfg);
    cfg.block_delta = 0.25;
    const auto blk = block_solve(gen, model, xi, cfg);
    REQUIRE(pic.converged);
    REQUIRE(blk.converged);
    CHECK(max_gap(pic.Y, blk.Y) <= 1e-10);
}

TEST_CASE("mann iteration") {
    std::mt19937_64 rng(77);
    const auto model = build_brownian_tree(1, 5, 1.0);
    const auto& s = model.space();
    const auto xi = random_terminal(rng, s, 1);
    const auto gen = sin_cos_driver(0.1, 0.1, 0.2);
    SolverConfig cfg;
    cfg.tol = 1e-12;
    cfg.mann_theta = 1.0;
    const auto pic = picard_solve(gen, model, xi, cfg);
    const auto m1 = mann_solve(gen, model, xi, cfg);
    REQUIRE(m1.converged);
    CHECK(m1.iterates == pic.iterates);
    CHECK((m1.V.values() - pic.V.values()).cwiseAbs().maxCoeff() == 0.0);
    cfg.mann_theta = 0.5;
    const auto mh = mann_solve(gen, model, xi, cfg);
    REQUIRE(mh.converged);
    CHECK((mh.V.values() - pic.V.values()).cwiseAbs().maxCoeff() <= 1e-9);
    CHECK(mh.iterations > pic.iterations);
}

TEST_CASE("mann iteration on the quadratic mean-field driver") {
    const auto model = build_brownian_tree(1, 6, 1.0);
    const auto& s = model.space();
    const auto W = terminal_W(model);
    MatrixXd x(2, s.leaf_count());
    x.row(0) = W.values().row(0);
    x.row(1) = W.values().row(0).array().abs().matrix();
    const RandomVectord xi(6, x);
    const VectorXd alpha = (VectorXd(2) << 0.1, -0.2).finished();
    auto f1 = [](const MatrixXd& z) { return VectorXd(0.1 * z.col(0).array().tanh().matrix()); };

    SolverConfig cfg;
    cfg.tol = 1e-11;
    cfg.max_iter = 2000;
    cfg.mann_theta = 0.7;
    cfg.radius_C = 0.1;
    cfg.R1 = 10.0;
    cfg.R2 = 0.5;
    std::optional<RandomVectord> previous;
    for (double b : {0.0, 0.05, 0.1}) {
        const auto gen = quadratic_meanfield_driver(alpha, VectorXd::Constant(1, b), f1);
        if (previous) cfg.initial = previous;
        const auto rep = mann_solve(gen, model, xi, cfg);
        REQUIRE(rep.converged);
        CHECK(rep.residual <= 1e-8);
        REQUIRE(rep.radius.has_value());
        CHECK(rep.radius->holds);
        previous = rep.V;

        SolverConfig zero_start = cfg;
        zero_start.initial = RandomVectord::zero(s, 6, 2);
        const auto from_zero = mann_solve(gen, model, xi, zero_start);
        REQUIRE(from_zero.converged);
        CHECK((from_zero.V.values() - rep.V.values()).cwiseAbs().maxCoeff() <= 1e-7);
    }
}

TEST_CASE("uniqueness checks") {
    std::mt19937_64 rng(88);
    const auto model = build_brownian_tree(1, 4, 1.0);
    const auto& s = model.space();
    const auto xi = random_terminal(rng, s, 1);
    SolverConfig cfg;
    const auto zero = verify_uniqueness(zero_generator(1), model, xi, cfg, 4, 3);
    CHECK(zero.all_converged);
    CHECK(zero.max_distance == 0.0);
    CHECK(zero.fixed_points.size() == 4);

    cfg.tol = 1e-12;
    const auto mf = meanfield_generator(
        "mf", 1,
        [](double, const VectorXd& y, const VectorXd& z, const VectorXd&, const LawSet& laws) {
            return VectorXd::Constant(1, 0.1 * std::sin(y[0]) + 0.05 * laws.Y.mean()[0] + 0.1 * std::cos(z[0]));
        });
    const auto u = verify_uniqueness(mf, model, xi, cfg, 5, 9);
    CHECK(u.all_converged);
    CHECK(u.max_distance <= 10 * cfg.tol);

    const auto expanding = functional_generator(
        "2M", 1, [](const FunctionalArgs& a) { return AdaptedProcessd(2.0 * a.M.process()); }, false);
    const auto bad = verify_uniqueness(expanding, model, xi, SolverConfig{}, 3, 1);
    CHECK_FALSE(bad.all_converged);
    CHECK_THROWS_AS(verify_uniqueness(zero_generator(1), model, xi, cfg, 0), DomainError);
}

TEST_CASE("randomized BSE identity on converged reports") {
    std::mt19937_64 rng(99);
    std::uniform_real_distribution<double> u(-0.15, 0.15);
    for (int trial = 0; trial < 20; ++trial) {
        NoiseSpec spec;
        spec.brownian_dim = trial % 3 == 0 ? 2 : 1;
        spec.steps = 2 + trial % 3;
        spec.horizon = 0.5 + 0.25 * (trial % 4);
        if (trial % 2) {
            spec.marks = {VectorXd::Constant(1, 1.0)};
            spec.intensities = {0.4};
        }
        const auto model = build_jump_diffusion_tree(spec);
        const auto xi = random_terminal(rng, model.space(), 1);
        const double a = u(rng), c = u(rng);
        const auto gen = pointwise_generator(
            "mixed", 1,
            [a, c](double t, const VectorXd& y, const VectorXd& z, const VectorXd& uu) {
                double v = a * std::tanh(y[0]) + t;
                for (Index i = 0; i < z.size(); ++i) v += c * std::sin(z[i]);
                for (Index i = 0; i < uu.size(); ++i) v += c * uu[i];
                return VectorXd::Constant(1, v);
            });
        SolverConfig cfg;
        cfg.tol = 1e-12;
        const auto rep = picard_solve(gen, model, xi, cfg);
        REQUIRE(rep.converged);
        CHECK(rep.residual >= 0.0);
        CHECK(bse_residual(model.space(), xi, rep.Y, rep.F, rep.M) <= cfg.tol * (1.0 + rep.xi_norm));
        const auto back = lift(model.space(), rep.Y.at(0), spec.steps) - rep.M.at(spec.steps);
        CHECK((back.values() - rep.V.values()).cwiseAbs().maxCoeff() <= 1e-12);
    }
}

TEST_CASE("config validation and report output") {
    const auto model = build_brownian_tree(1, 2, 1.0);
    const RandomVectord xi(2, (MatrixXd(1, 4) << 1.0, 0.0, 0.5, 2.0).finished());
    SolverConfig bad;
    bad.tol = 0.0;
    CHECK_THROWS_AS(picard_solve(zero_generator(1), model, xi, bad), DomainError);
    bad = {};
    bad.mann_theta = 1.5;
    CHECK_THROWS_AS(mann_solve(zero_generator(1), model, xi, bad), DomainError);
    bad = {};
    bad.block_delta = 2.0;
    CHECK_THROWS_AS(block_solve(zero_generator(1), model, xi, bad), DomainError);
    CHECK_THROWS_AS(picard_solve(zero_generator(2), model, xi), DimensionError);
    CHECK_THROWS_AS(picard_solve(zero_generator(1), model, RandomVectord(1, MatrixXd::Zero(1, 2))), DomainError);

    SolverConfig cfg;
    cfg.declared_C = 0.05;
    const auto rep = picard_solve(linear_driver(0.05, 1.0), model, xi, cfg);
    REQUIRE(rep.converged);
    const auto j = report_to_json(rep);
    CHECK(j["status"] == "converged");
    CHECK(j["iterations"].get<Index>() == rep.iterations);
    CHECK(j["Y"].size() == 3);
    CHECK(j["V"].size() == 4);
    CHECK(j["theoretical_bound"].get<double>() == doctest::Approx(0.2 / 0.95));
    CHECK(j["ratios"][0].is_null());

    std::ostringstream csv;
    write_iterates_csv(csv, rep);
    std::istringstream lines(csv.str());
    std::string line;
    std::getline(lines, line);
    CHECK(line == "k,diff_norm,ratio");
    std::getline(lines, line);
    CHECK(line.rfind("0,", 0) == 0);
    CHECK(line.back() == ',');
    Index rows = 0;
    while (std::getline(lines, line)) ++rows;
    CHECK(rows + 1 == static_cast<Index>(rep.iterates.size()));

    CHECK(format_double(0.1) == "0.1");
    CHECK(format_double(1e-300) == "1e-300");
    CHECK(std::stod(format_double(1.0 / 3.0)) == 1.0 / 3.0);
    CHECK(format_double(NAN) == "nan");
}
