#include "bsekit/cli_bench.hpp"

#include "bsekit/laws.hpp"
#include "bsekit/martingale_repr.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <ostream>
#include <random>

namespace bsekit {

namespace {

using Rng = std::mt19937_64;

Index uniform_index(Rng& rng, Index lo, Index hi) {
    return std::uniform_int_distribution<Index>(lo, hi)(rng);
}

MatrixXd normal_matrix(Rng& rng, Index rows, Index cols) {
    std::normal_distribution<double> g;
    MatrixXd m(rows, cols);
    for (Index i = 0; i < m.size(); ++i) m.data()[i] = g(rng);
    return m;
}

// Random non-uniform tree with 1..max_branch children per node.
FiniteFilteredSpace random_space(Rng& rng, Index max_steps, Index max_branch) {
    const Index K = uniform_index(rng, 1, max_steps);
    std::uniform_real_distribution<double> step(0.1, 1.0), weight(0.05, 1.0);
    std::vector<double> times{0.0};
    for (Index k = 0; k < K; ++k) times.push_back(times.back() + step(rng));
    std::vector<std::vector<std::vector<double>>> probs(static_cast<std::size_t>(K));
    Index nodes = 1;
    for (Index k = 0; k < K; ++k) {
        Index next = 0;
        for (Index i = 0; i < nodes; ++i) {
            const Index b = uniform_index(rng, 1, max_branch);
            std::vector<double> w(static_cast<std::size_t>(b));
            for (auto& x : w) x = weight(rng);
            const double s = std::accumulate(w.begin(), w.end(), 0.0);
            for (auto& x : w) x /= s;
            probs[static_cast<std::size_t>(k)].push_back(std::move(w));
            next += b;
        }
        nodes = next;
    }
    return FiniteFilteredSpace(TimeGrid(std::move(times)), std::move(probs));
}

NoiseModel random_noise_model(Rng& rng) {
    NoiseSpec spec;
    std::uniform_real_distribution<double> unit(0.2, 2.0), share(0.1, 0.9);
    spec.steps = uniform_index(rng, 1, 3);
    spec.horizon = unit(rng);
    const double dt = spec.horizon / static_cast<double>(spec.steps);
    do {
        spec.brownian_dim = uniform_index(rng, 0, 2);
        spec.marks.clear();
        spec.intensities.clear();
        const Index m = uniform_index(rng, 0, 2);
        // keeps sum_i lambda_i dt < 1, so at most one event per step stays a valid law
        for (Index i = 0; i < m; ++i) {
            spec.marks.push_back(normal_matrix(rng, 1, 1).col(0));
            spec.intensities.push_back(share(rng) / (static_cast<double>(m) * dt));
        }
    } while (spec.brownian_dim + static_cast<Index>(spec.marks.size()) == 0);
    spec.extra_noise = uniform_index(rng, 0, 3) == 0;
    return build_jump_diffusion_tree(spec);
}

CheckRow doob_row(Rng& rng, Index instances) {
    CheckRow row{"doob_p2", instances, 0.0, 2.0, true};
    for (Index t = 0; t < instances; ++t) {
        const auto space = random_space(rng, 4, 3);
        const RandomVectord v(space.steps(), normal_matrix(rng, uniform_index(rng, 1, 2), space.leaf_count()));
        row.observed = std::max(row.observed, doob_ratio(space, v, 2.0));
    }
    row.passed = row.observed <= row.bound;
    return row;
}

// Largest |dM - (Z dW + U dN~ + dK)| together with the conditional mean and
// regressor correlation of dK, over every non-leaf node.
double representation_defect(const MartingaleDecomposition& dec, const NoiseModel& model, const Martingaled& M) {
    const auto& space = model.space();
    const Index n = model.brownian_dim();
    const Index m = model.mark_count();
    double worst = 0.0;
    for (Index k = 0; k < space.steps(); ++k) {
        for (Index i = 0; i < space.node_count(k); ++i) {
            const auto reg = model.one_step_regressors(k, i);
            const MatrixXd Z = dec.z_at(k, i);
            const MatrixXd U = dec.u_at(k, i);
            const Index first = space.first_child(k, i);
            VectorXd mean = VectorXd::Zero(dec.dim);
            MatrixXd corr = MatrixXd::Zero(dec.dim, n + m);
            for (Index c = 0; c < space.child_count(k, i); ++c) {
                const VectorXd r = reg.regressors.col(c);
                const VectorXd dK = dec.K.level(k + 1).col(first + c) - dec.K.level(k).col(i);
                const VectorXd dM = M.level(k + 1).col(first + c) - M.level(k).col(i);
                const VectorXd pred = Z * r.head(n) + U * r.tail(m) + dK;
                worst = std::max(worst, (dM - pred).cwiseAbs().maxCoeff());
                mean += reg.probabilities[c] * dK;
                corr += reg.probabilities[c] * dK * r.transpose();
            }
            worst = std::max(worst, mean.cwiseAbs().maxCoeff());
            if (corr.size() > 0) worst = std::max(worst, corr.cwiseAbs().maxCoeff());
        }
    }
    return worst;
}

std::pair<CheckRow, CheckRow> representation_rows(Rng& rng, Index instances) {
    CheckRow rep{"representation_reconstruction", instances, 0.0, 1e-11, true};
    CheckRow iso{"isometry", instances, 0.0, 1e-11, true};
    for (Index t = 0; t < instances; ++t) {
        const auto model = random_noise_model(rng);
        const auto& space = model.space();
        const RandomVectord xi(space.steps(), normal_matrix(rng, uniform_index(rng, 1, 2), space.leaf_count()));
        const auto M = martingale_from_terminal(space, xi).martingale;
        const auto dec = represent(M, model);
        rep.observed = std::max(rep.observed, representation_defect(dec, model, M));
        for (Index level = 1; level <= space.steps(); ++level) {
            const auto c = isometry_check(dec, space, level);
            iso.observed = std::max(iso.observed, std::abs(c.lhs - c.rhs) / std::max(1.0, c.lhs));
        }
    }
    rep.passed = rep.observed <= rep.bound;
    iso.passed = iso.observed <= iso.bound;
    return {rep, iso};
}

CheckRow coupling_row(Rng& rng, Index instances) {
    CheckRow row{"wasserstein_coupling", instances, -INFINITY, 1e-10, true};
    for (Index t = 0; t < instances; ++t) {
        const auto space = random_space(rng, 3, 3);
        const Index d = uniform_index(rng, 1, 3);
        const Index K = space.steps();
        const RandomVectord x(K, normal_matrix(rng, d, space.leaf_count()));
        RandomVectord y(K, normal_matrix(rng, d, space.leaf_count()));
        if (t % 2 == 0) y = x + RandomVectord(K, 0.1 * normal_matrix(rng, d, space.leaf_count()));
        const double w = wasserstein2(empirical_law(space, x), empirical_law(space, y));
        row.observed = std::max(row.observed, w - lp_norm(space, RandomVectord(x - y), 2.0));
    }
    row.passed = row.observed <= row.bound;
    return row;
}

CheckRow bruteforce_row(Rng& rng, Index instances) {
    CheckRow row{"wasserstein_bruteforce", instances, 0.0, 1e-10, true};
    for (Index t = 0; t < instances; ++t) {
        const Index k = uniform_index(rng, 2, 5);
        const Index d = uniform_index(rng, 2, 3);
        const MatrixXd a = normal_matrix(rng, d, k);
        const MatrixXd b = normal_matrix(rng, d, k);
        const VectorXd w = VectorXd::Constant(k, 1.0 / static_cast<double>(k));
        std::vector<Index> perm(static_cast<std::size_t>(k));
        std::iota(perm.begin(), perm.end(), Index{0});
        double best = INFINITY;
        do {
            double cost = 0.0;
            for (Index i = 0; i < k; ++i) cost += (a.col(i) - b.col(perm[static_cast<std::size_t>(i)])).squaredNorm();
            best = std::min(best, cost / static_cast<double>(k));
        } while (std::next_permutation(perm.begin(), perm.end()));
        const double exact = wasserstein2(DiscreteLaw(a, w), DiscreteLaw(b, w));
        row.observed = std::max(row.observed, std::abs(exact - std::sqrt(best)));
    }
    row.passed = row.observed <= row.bound;
    return row;
}

CheckRow poincare_row(Rng& rng, Index instances) {
    CheckRow row{"poincare", instances, 0.0, 1.0, true};
    // The budget covers finite differences only, so the rule must integrate tanh
    // to near machine precision; 12 nodes per axis does at these scales.
    const Index J = 3;
    VectorXd lambda(J);
    for (Index j = 0; j < J; ++j) lambda[j] = std::ldexp(1.0, -static_cast<int>(j + 1));
    const auto model = GaussianCoordinateModel::quadrature(lambda, 12);
    std::uniform_real_distribution<double> coef(-2.0, 2.0);
    for (Index t = 0; t < instances; ++t) {
        VectorXd a(J);
        for (Index j = 0; j < J; ++j) a[j] = coef(rng);
        const double c = coef(rng);
        const auto phi = [a, c](const VectorXd& w) { return VectorXd::Constant(1, std::tanh(a.dot(w) + c)); };
        const auto r = poincare_check(model, phi, 2.0 * std::pow(a.cwiseAbs().maxCoeff(), 3));
        row.observed = std::max(row.observed, r.lhs / (r.rhs + r.budget));
        row.passed = row.passed && r.holds;
    }
    row.passed = row.passed && row.observed <= row.bound;
    return row;
}

CheckRow contraction_row() {
    CheckRow row{"contraction_constants", 0, 0.0, 0.0, true};
    double dev = std::abs(contraction_constant(2.0) - 0.2) + std::abs(contraction_constant(INFINITY) - 0.25);
    Index count = 2;
    for (double p = 1.125; p <= 64.0; p *= 1.5) {
        if (p == 2.0) continue;
        dev = std::max(dev, std::abs(contraction_constant(p) - (p - 1.0) / (4.0 * p - 1.0)));
        ++count;
    }
    for (double C = 0.0; C < 0.2; C += 0.0125) {
        const auto b = theoretical_bound(C, 2.0);
        dev = std::max(dev, b ? std::abs(*b - 4.0 * C / (1.0 - C)) : INFINITY);
        ++count;
    }
    if (theoretical_bound(0.2, 2.0)) dev = INFINITY;
    row.instances = count;
    row.observed = dev;
    row.passed = dev <= 1e-15;
    return row;
}

}  // namespace

std::vector<CheckRow> run_inequality_suite(std::uint64_t seed, Index instances) {
    if (instances < 1) throw DomainError("inequality suite needs at least one instance");
    // Independent streams per row, so changing one check does not shift the others.
    std::seed_seq seq{seed};
    std::vector<std::uint64_t> seeds(6);
    seq.generate(seeds.begin(), seeds.end());
    std::vector<CheckRow> rows;
    Rng r0(seeds[0]), r1(seeds[1]), r2(seeds[2]), r3(seeds[3]), r4(seeds[4]);
    rows.push_back(doob_row(r0, instances));
    auto [rep, iso] = representation_rows(r1, instances);
    rows.push_back(rep);
    rows.push_back(iso);
    rows.push_back(coupling_row(r2, instances));
    rows.push_back(bruteforce_row(r3, instances));
    rows.push_back(poincare_row(r4, instances));
    rows.push_back(contraction_row());
    return rows;
}

std::vector<CheckRow> run_gauss_diagnostics(const GaussDiagnosticsConfig& config) {
    const auto model = GaussianCoordinateModel::from_spec(config.model);
    const Index J = model.J();
    Rng rng(config.seed);
    std::vector<CheckRow> rows;

    CheckRow iso{"white_noise_isometry", config.isometry_pairs, 0.0, 0.0, true};
    for (Index t = 0; t < config.isometry_pairs; ++t) {
        const VectorXd h = normal_matrix(rng, J, 1).col(0);
        const VectorXd g = normal_matrix(rng, J, 1).col(0);
        const double defect = std::abs(white_noise_inner(model, h, g) - h.dot(g));
        iso.observed = std::max(iso.observed, defect);
        const double bound =
            model.is_quadrature() ? 1e-12 : 5.0 * h.norm() * g.norm() / std::sqrt(static_cast<double>(model.point_count()));
        iso.bound = std::max(iso.bound, bound);
        iso.passed = iso.passed && defect <= bound;
    }
    rows.push_back(iso);

    std::vector<NamedFunction> family;
    if (config.functions.empty()) {
        family = test_function_library(model);
    } else {
        for (std::size_t i = 0; i < config.functions.size(); ++i) {
            auto f = find_test_function(model, config.functions[i]);
            if (!f)
                throw ConfigError("/gauss/functions/" + std::to_string(i) + ": unknown test function '" +
                                  config.functions[i] + "'");
            family.push_back(std::move(*f));
        }
    }
    for (const auto& f : family) {
        const auto r = poincare_check(model, f.phi, f.third_derivative_bound);
        rows.push_back({"poincare:" + f.name, 1, r.lhs, r.rhs + r.budget, r.holds});
    }

    if (auto f = find_test_function(model, "coordinate_max")) {
        const auto r = poincare_check(model, f->phi, f->third_derivative_bound);
        const double gap = std::abs(r.lhs - r.rhs);
        rows.push_back({"poincare_equality:coordinate_max", 1, gap, 1e-9, gap <= 1e-9});
    }

    CheckRow lemma{"lipschitz_lemma_chain", config.lemma_pairs, -INFINITY, 1e-9, true};
    std::uniform_real_distribution<double> unit(-1.0, 1.0);
    for (Index t = 0; t < config.lemma_pairs; ++t) {
        const VectorXd x = normal_matrix(rng, J, 1).col(0);
        VectorXd a(J);
        for (Index j = 0; j < J; ++j) a[j] = unit(rng);
        const double Kc = 0.5 + std::abs(unit(rng));
        // |a_j| <= 1, so h is Kc-Lipschitz for the l1 norm.
        const auto phi = lemma_lip_construct(
            model,
            [a, Kc](const VectorXd& u) {
                double s = 0.0;
                for (Index j = 0; j < u.size(); ++j) s += a[j] * std::sin(u[j]);
                return VectorXd::Constant(1, Kc * s);
            },
            x);
        const double est = omega_lipschitz_estimate(model, phi, config.lipschitz_pairs,
                                                     config.seed + static_cast<std::uint64_t>(t));
        lemma.observed = std::max(lemma.observed, est - Kc * x.norm());
    }
    lemma.passed = lemma.observed <= lemma.bound;
    rows.push_back(lemma);
    return rows;
}

void write_metric_csv(std::ostream& os, const std::vector<MetricRow>& rows) {
    os << "metric,value\n";
    for (const auto& r : rows) os << r.metric << ',' << format_double(r.value) << '\n';
}

void write_check_csv(std::ostream& os, const std::vector<CheckRow>& rows) {
    os << "name,instances,observed,bound,passed\n";
    for (const auto& r : rows)
        os << r.name << ',' << r.instances << ',' << format_double(r.observed) << ',' << format_double(r.bound) << ','
           << (r.passed ? "true" : "false") << '\n';
}

namespace {
nlohmann::json number_or_null(double v) { return std::isfinite(v) ? nlohmann::json(v) : nlohmann::json(nullptr); }
}  // namespace

nlohmann::json to_json(const std::vector<MetricRow>& rows) {
    auto out = nlohmann::json::array();
    for (const auto& r : rows) out.push_back({{"metric", r.metric}, {"value", number_or_null(r.value)}});
    return out;
}

nlohmann::json to_json(const std::vector<CheckRow>& rows) {
    auto out = nlohmann::json::array();
    for (const auto& r : rows)
        out.push_back({{"name", r.name},
                       {"instances", r.instances},
                       {"observed", number_or_null(r.observed)},
                       {"bound", number_or_null(r.bound)},
                       {"passed", r.passed}});
    return out;
}

}  // namespace bsekit
