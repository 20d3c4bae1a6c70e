#include <doctest.h>

#include "bsekit/gauss_sobolev.hpp"

#include <cmath>
#include <random>

using namespace bsekit;

namespace {

GaussianCoordinateModel small_model(Index J, Index q) {
    GaussianModelSpec spec;
    spec.J = J;
    spec.q = q;
    return GaussianCoordinateModel::from_spec(spec);
}

VectorXd random_vector(std::mt19937_64& rng, Index n) {
    std::normal_distribution<double> g;
    VectorXd v(n);
    for (Index i = 0; i < n; ++i) v[i] = g(rng);
    return v;
}

}  // namespace

TEST_CASE("Gauss-Hermite rules reproduce normal moments") {
    for (Index q : {1, 2, 3, 5, 8, 12}) {
        const auto r = gauss_hermite(q);
        CHECK(r.weights.sum() == doctest::Approx(1.0).epsilon(1e-15));
        CHECK((r.weights.array() > 0.0).all());
        // E X^{2k} = (2k-1)!! for 2k <= 2q - 1
        double dfact = 1.0;
        for (int k = 0; 2 * k <= 2 * q - 1; ++k) {
            if (k > 0) dfact *= 2 * k - 1;
            double m = 0.0, odd = 0.0;
            for (Index i = 0; i < q; ++i) {
                m += r.weights[i] * std::pow(r.nodes[i], 2 * k);
                odd += r.weights[i] * std::pow(r.nodes[i], 2 * k + 1);
            }
            CHECK(m == doctest::Approx(dfact).epsilon(1e-12));
            CHECK(std::abs(odd) <= 1e-12 * dfact);
        }
    }
    CHECK_THROWS_AS(gauss_hermite(0), DomainError);
}

TEST_CASE("sampling plans") {
    const auto m = small_model(3, 4);
    CHECK(m.is_quadrature());
    CHECK(m.point_count() == 64);
    CHECK(m.eigenvalues()[0] == 0.5);
    CHECK(m.eigenvalues()[2] == 0.125);
    CHECK(m.argmax() == 0);
    for (Index j = 0; j < 3; ++j) {
        const double v = expectation(m, [j](const VectorXd& w) { return VectorXd::Constant(1, w[j] * w[j]); })[0];
        CHECK(std::abs(v - m.eigenvalues()[j]) <= 1e-12);
    }

    GaussianModelSpec spec;
    spec.J = 12;
    spec.q = 5;
    spec.samples = 500;
    const auto mc = GaussianCoordinateModel::from_spec(spec);
    CHECK_FALSE(mc.is_quadrature());
    CHECK(mc.point_count() == 500);
    const auto mc2 = GaussianCoordinateModel::from_spec(spec);
    VectorXd a, b;
    mc.point(17, a);
    mc2.point(17, b);
    CHECK(a == b);

    spec.eigenvalues = VectorXd::Constant(3, 1.0);
    CHECK_THROWS_AS(GaussianCoordinateModel::from_spec(spec), DimensionError);
    CHECK_THROWS_AS(GaussianCoordinateModel::quadrature(VectorXd::Constant(2, -1.0), 3), DomainError);
}

TEST_CASE("white noise isometry") {
    const auto m = small_model(4, 3);
    VectorXd e1 = VectorXd::Zero(4);
    e1[0] = 1.0;
    CHECK(white_noise_inner(m, e1, e1) == doctest::Approx(1.0).epsilon(1e-14));
    VectorXd omega(4);
    m.point(5, omega);
    CHECK(white_noise(m, e1)(omega)[0] == doctest::Approx(omega[0] / std::sqrt(0.5)).epsilon(1e-15));
    CHECK(white_noise(m, VectorXd::Zero(4))(omega)[0] == 0.0);
    std::mt19937_64 rng(1);
    for (int t = 0; t < 50; ++t) {
        const VectorXd h = random_vector(rng, 4), g = random_vector(rng, 4);
        CHECK(std::abs(white_noise_inner(m, h, g) - h.dot(g)) <= 1e-12);
    }
    CHECK_THROWS_AS(white_noise(m, VectorXd::Zero(3)), DimensionError);
}

TEST_CASE("directional derivatives") {
    const auto m = small_model(2, 3);
    const CylindricalFunction lin = [](const VectorXd& w) { return VectorXd::Constant(1, w[0]); };
    const CylindricalFunction sq = [](const VectorXd& w) { return VectorXd::Constant(1, w[0] * w[0]); };
    const CylindricalFunction sn = [](const VectorXd& w) { return VectorXd::Constant(1, std::sin(w[0])); };
    VectorXd w(2);
    w << 0.3, -1.1;
    const double eps = default_step(m, 0);
    CHECK(eps == doctest::Approx(1e-5 * std::sqrt(0.5)));
    // rounding of w +- eps limits "exact" to a few ulps relative to eps
    const double round = 4.0 * std::numeric_limits<double>::epsilon() * (1.0 + std::abs(w[0])) / eps;
    CHECK(std::abs(directional_derivative(m, lin, 0)(w)[0] - 1.0) <= round);
    CHECK(std::abs(directional_derivative(m, sq, 0)(w)[0] - 0.6) <= round);
    CHECK(directional_derivative(m, lin, 1)(w)[0] == 0.0);
    CHECK(std::abs(directional_derivative(m, sn, 0)(w)[0] - std::cos(0.3)) <= eps * eps * 1.0 / 6.0 + round);
    const double big = 1e-2;
    const double err = std::abs(directional_derivative(m, sn, 0, big)(w)[0] - std::cos(0.3));
    CHECK(err <= big * big / 6.0);
    CHECK(err > 0.0);
}

TEST_CASE("Sobolev norms") {
    const auto c = sobolev_norm(small_model(2, 3), [](const VectorXd&) { return VectorXd::Constant(2, 1.5); });
    CHECK(c.l2 == doctest::Approx(1.5 * std::sqrt(2.0)));
    CHECK(c.grad == 0.0);

    const auto one = GaussianCoordinateModel::quadrature(VectorXd::Constant(1, 0.3), 4);
    const auto s = sobolev_norm(one, [](const VectorXd& w) { return VectorXd::Constant(1, w[0]); });
    CHECK(s.l2 == doctest::Approx(std::sqrt(0.3)).epsilon(1e-12));
    CHECK(s.grad == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(s.w12 * s.w12 == doctest::Approx(1.3).epsilon(1e-9));

    // additivity for independent, mean-zero coordinate functions
    const auto m = small_model(3, 6);
    const CylindricalFunction f = [](const VectorXd& w) { return VectorXd::Constant(1, std::sin(w[0])); };
    const CylindricalFunction g = [](const VectorXd& w) { return VectorXd::Constant(1, w[2] * w[2] * w[2]); };
    const CylindricalFunction fg = [&](const VectorXd& w) { return VectorXd(f(w) + g(w)); };
    const auto nf = sobolev_norm(m, f), ng = sobolev_norm(m, g), nfg = sobolev_norm(m, fg);
    CHECK(std::abs(nfg.l2 * nfg.l2 - nf.l2 * nf.l2 - ng.l2 * ng.l2) <= 1e-10);
    CHECK(std::abs(nfg.grad * nfg.grad - nf.grad * nf.grad - ng.grad * ng.grad) <= 1e-10);

    // closed form: ||D sin(k w_1)||^2 = k^2 (1 + exp(-2 k^2 lambda)) / 2
    const auto fine = GaussianCoordinateModel::quadrature(VectorXd::Constant(1, 0.5), 60);
    for (int k = 1; k <= 3; ++k) {
        const auto n = sobolev_norm(fine, [k](const VectorXd& w) { return VectorXd::Constant(1, std::sin(k * w[0])); });
        CHECK(n.grad * n.grad == doctest::Approx(k * k * (1.0 + std::exp(-2.0 * k * k * 0.5)) / 2.0).epsilon(1e-8));
    }
}

TEST_CASE("Poincare inequality") {
    const auto m = small_model(4, 5);
    const auto c = poincare_check(m, [](const VectorXd&) { return VectorXd::Constant(1, 3.0); });
    CHECK(c.lhs == 0.0);
    CHECK(c.rhs == 0.0);
    CHECK(c.holds);

    const auto eq = poincare_check(m, [](const VectorXd& w) { return VectorXd::Constant(1, w[0]); }, 0.0);
    CHECK(eq.holds);
    CHECK(eq.lhs == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(std::abs(eq.lhs - eq.rhs) <= 1e-9);

    const auto strict = poincare_check(m, [](const VectorXd& w) { return VectorXd::Constant(1, w[3]); }, 0.0);
    CHECK(strict.holds);
    CHECK(strict.lhs < 0.5 * strict.rhs);

    std::mt19937_64 rng(4);
    for (int t = 0; t < 100; ++t) {
        const auto wh = white_noise(m, random_vector(rng, 4));
        const auto r = poincare_check(m, [wh](const VectorXd& w) { return VectorXd(wh(w).array().tanh().matrix()); }, 100.0);
        CHECK(r.holds);
    }
    for (const auto& f : test_function_library(m)) {
        INFO(f.name);
        CHECK(poincare_check(m, f.phi, f.third_derivative_bound).holds);
    }
}

TEST_CASE("omega-Lipschitz estimates and the lemma construction") {
    const auto m = small_model(3, 3);
    CHECK(omega_lipschitz_estimate(m, [](const VectorXd&) { return VectorXd::Constant(1, 2.0); }, 50) == 0.0);

    const VectorXd g = (VectorXd(3) << 1.0, -2.0, 0.5).finished();
    const double est = omega_lipschitz_estimate(m, [g](const VectorXd& w) { return VectorXd::Constant(1, g.dot(w)); }, 4000);
    CHECK(est <= g.norm() * (1 + 1e-12));
    CHECK(est >= 0.95 * g.norm());

    const auto first = lemma_lip_construct(m, [](const VectorXd& u) { return VectorXd::Constant(1, u[0]); },
                                           (VectorXd(3) << 1.0, 0.0, 0.0).finished());
    VectorXd w(3);
    w << 0.7, 1.0, 2.0;
    CHECK(first(w)[0] == 0.7);

    const VectorXd x2 = (VectorXd(3) << 1.0, 1.0, 0.0).finished() / std::sqrt(2.0);
    const auto l1 = lemma_lip_construct(m, [](const VectorXd& u) { return VectorXd::Constant(1, u.cwiseAbs().sum()); }, x2);
    CHECK(omega_lipschitz_estimate(m, l1, 2000) <= 1.0 + 1e-9);

    const auto zero = lemma_lip_construct(m, [](const VectorXd& u) { return VectorXd::Constant(1, std::sin(u.sum())); },
                                          VectorXd::Zero(3));
    CHECK(omega_lipschitz_estimate(m, zero, 100) == 0.0);
    CHECK_THROWS_AS(lemma_lip_construct(m, [](const VectorXd& u) { return u; }, VectorXd::Zero(2)), DimensionError);

    std::mt19937_64 rng(6);
    std::uniform_real_distribution<double> unit(-1.0, 1.0);
    for (int t = 0; t < 30; ++t) {
        const VectorXd x = random_vector(rng, 3);
        VectorXd a(3);
        for (Index j = 0; j < 3; ++j) a[j] = unit(rng);
        const double K = 0.5 + std::abs(unit(rng));
        const auto phi = lemma_lip_construct(
            m,
            [a, K](const VectorXd& u) {
                double s = 0.0;
                for (Index j = 0; j < u.size(); ++j) s += a[j] * std::sin(u[j]);
                return VectorXd::Constant(1, K * s);
            },
            x);
        CHECK(omega_lipschitz_estimate(m, phi, 200, static_cast<std::uint64_t>(t)) <= K * x.norm() + 1e-9);
    }
}

TEST_CASE("compactness diagnostic") {
    const auto m = GaussianCoordinateModel::quadrature(VectorXd::Constant(1, 0.5), 40);
    std::vector<NamedFunction> constants;
    for (double c : {0.1, 0.2, 0.3}) constants.push_back({"c", [c](const VectorXd&) { return VectorXd::Constant(1, c); }});
    const auto rc = compactness_diagnostic(m, constants, 1.0, 0.5);
    CHECK(rc.net_size == 1);
    CHECK(rc.diameter == doctest::Approx(0.2));
    CHECK(compactness_diagnostic(m, {constants[0]}, 1.0, 1e-6).net_size == 1);

    std::vector<NamedFunction> sines;
    for (int k = 1; k <= 5; ++k)
        sines.push_back({"sin" + std::to_string(k), [k](const VectorXd& w) { return VectorXd::Constant(1, std::sin(k * w[0])); }});
    const double R3 = 2.5;
    const auto rs = compactness_diagnostic(m, sines, R3, 0.1);
    for (int k = 1; k <= 5; ++k) {
        const auto& mem = rs.members[static_cast<std::size_t>(k - 1)];
        const double exact = k * std::sqrt((1.0 + std::exp(-2.0 * k * k * 0.5)) / 2.0);
        CHECK(mem.grad == doctest::Approx(exact).epsilon(1e-6));
        CHECK(mem.flagged == (exact > R3));
    }
    CHECK(rs.net_size == 5);
    CHECK_THROWS_AS(compactness_diagnostic(m, sines, R3, 0.0), DomainError);
    CHECK(to_json(rs)["members"].size() == 5);
}

TEST_CASE("test function library lookup") {
    const auto m = small_model(2, 3);
    CHECK(find_test_function(m, "tanh_white_noise").has_value());
    CHECK_FALSE(find_test_function(m, "nope").has_value());
    CHECK(test_function_library(m).size() >= 8);
}
