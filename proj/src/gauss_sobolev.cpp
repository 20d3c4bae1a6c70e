#include "bsekit/gauss_sobolev.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <exception>
#include <limits>
#include <random>
#include <thread>

namespace bsekit {

QuadratureRule gauss_hermite(Index q) {
    if (q < 1) throw DomainError("quadrature needs at least one node");
    // Golub-Welsch on the Jacobi matrix of the probabilists' Hermite polynomials.
    MatrixXd jacobi = MatrixXd::Zero(q, q);
    for (Index k = 1; k < q; ++k) jacobi(k - 1, k) = jacobi(k, k - 1) = std::sqrt(static_cast<double>(k));
    Eigen::SelfAdjointEigenSolver<MatrixXd> es(jacobi);
    QuadratureRule rule{es.eigenvalues(), es.eigenvectors().row(0).transpose().array().square()};
    // symmetrize so odd moments vanish exactly
    for (Index i = 0; i < q / 2; ++i) {
        const double x = 0.5 * (rule.nodes[q - 1 - i] - rule.nodes[i]);
        const double w = 0.5 * (rule.weights[q - 1 - i] + rule.weights[i]);
        rule.nodes[i] = -x;
        rule.nodes[q - 1 - i] = x;
        rule.weights[i] = rule.weights[q - 1 - i] = w;
    }
    if (q % 2) rule.nodes[q / 2] = 0.0;
    rule.weights /= rule.weights.sum();
    return rule;
}

namespace {

VectorXd check_eigenvalues(VectorXd lambda) {
    if (lambda.size() < 1) throw DomainError("Gaussian model needs at least one coordinate");
    for (Index j = 0; j < lambda.size(); ++j)
        if (!(lambda[j] > 0.0) || !std::isfinite(lambda[j])) throw DomainError("eigenvalues must be positive and finite");
    return lambda;
}

}  // namespace

GaussianCoordinateModel GaussianCoordinateModel::quadrature(VectorXd eigenvalues, Index q) {
    GaussianCoordinateModel m;
    m.lambda_ = check_eigenvalues(std::move(eigenvalues));
    m.q_ = q;
    m.rule_ = gauss_hermite(q);
    m.count_ = 1;
    for (Index j = 0; j < m.J(); ++j) {
        if (m.count_ > std::numeric_limits<std::uint64_t>::max() / static_cast<std::uint64_t>(q))
            throw BudgetError("quadrature grid too large", static_cast<std::uint64_t>(-1));
        m.count_ *= static_cast<std::uint64_t>(q);
    }
    return m;
}

GaussianCoordinateModel GaussianCoordinateModel::monte_carlo(VectorXd eigenvalues, Index samples, std::uint64_t seed) {
    if (samples < 1) throw DomainError("Monte Carlo plan needs at least one sample");
    GaussianCoordinateModel m;
    m.lambda_ = check_eigenvalues(std::move(eigenvalues));
    m.samples_.resize(m.J(), samples);
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> g;
    for (Index s = 0; s < samples; ++s)
        for (Index j = 0; j < m.J(); ++j) m.samples_(j, s) = std::sqrt(m.lambda_[j]) * g(rng);
    m.count_ = static_cast<std::uint64_t>(samples);
    return m;
}

GaussianCoordinateModel GaussianCoordinateModel::from_spec(const GaussianModelSpec& spec) {
    VectorXd lambda = spec.eigenvalues;
    if (lambda.size() == 0) {
        if (spec.J < 1) throw DomainError("J must be positive");
        lambda.resize(spec.J);
        for (Index j = 0; j < spec.J; ++j) lambda[j] = std::ldexp(1.0, -static_cast<int>(j + 1));
    } else if (lambda.size() != spec.J) {
        throw DimensionError("eigenvalue list length differs from J");
    }
    if (spec.q < 1) throw DomainError("q must be positive");
    double size = static_cast<double>(lambda.size());
    for (Index j = 0; j < lambda.size(); ++j) size *= static_cast<double>(spec.q);
    if (size <= static_cast<double>(spec.budget)) return quadrature(std::move(lambda), spec.q);
    return monte_carlo(std::move(lambda), spec.samples, spec.seed);
}

Index GaussianCoordinateModel::argmax() const {
    Index best = 0;
    for (Index j = 1; j < J(); ++j)
        if (lambda_[j] > lambda_[best]) best = j;
    return best;
}

double GaussianCoordinateModel::point(std::uint64_t index, VectorXd& omega) const {
    omega.resize(J());
    if (!is_quadrature()) {
        omega = samples_.col(static_cast<Index>(index));
        return 1.0 / static_cast<double>(count_);
    }
    double w = 1.0;
    const auto q = static_cast<std::uint64_t>(q_);
    for (Index j = 0; j < J(); ++j) {
        const auto digit = static_cast<Index>(index % q);
        index /= q;
        omega[j] = std::sqrt(lambda_[j]) * rule_.nodes[digit];
        w *= rule_.weights[digit];
    }
    return w;
}

namespace {

using Body = std::function<void(VectorXd& omega, double weight, double* sums, double& peak)>;

struct Reduction {
    std::vector<double> sums;
    double peak = 0.0;
};

// Fixed-size chunks reduced in chunk order, so results do not depend on the thread count.
Reduction reduce(const GaussianCoordinateModel& m, std::size_t nsum, const Body& body) {
    constexpr std::uint64_t chunk = 4096;
    const std::uint64_t n = m.point_count();
    const std::uint64_t chunks = (n + chunk - 1) / chunk;
    std::vector<std::vector<double>> partial(chunks, std::vector<double>(nsum, 0.0));
    std::vector<double> peaks(chunks, 0.0);
    std::vector<std::exception_ptr> errors(chunks);
    auto work = [&](std::uint64_t first_chunk, std::uint64_t stride) {
        VectorXd omega(m.J());
        for (std::uint64_t c = first_chunk; c < chunks; c += stride) {
            try {
                for (std::uint64_t i = c * chunk; i < std::min(n, (c + 1) * chunk); ++i) {
                    const double w = m.point(i, omega);
                    body(omega, w, partial[c].data(), peaks[c]);
                }
            } catch (...) {
                errors[c] = std::current_exception();
                return;
            }
        }
    };
    const unsigned threads = std::max(1u, std::min(std::thread::hardware_concurrency(), static_cast<unsigned>(chunks)));
    if (threads <= 1) {
        work(0, 1);
    } else {
        std::vector<std::thread> pool;
        for (unsigned t = 0; t < threads; ++t) pool.emplace_back(work, t, threads);
        for (auto& t : pool) t.join();
    }
    for (const auto& e : errors)
        if (e) std::rethrow_exception(e);
    Reduction r;
    r.sums.assign(nsum, 0.0);
    for (std::uint64_t c = 0; c < chunks; ++c) {
        for (std::size_t k = 0; k < nsum; ++k) r.sums[k] += partial[c][k];
        r.peak = std::max(r.peak, peaks[c]);
    }
    return r;
}

Index output_dim(const GaussianCoordinateModel& m, const CylindricalFunction& phi) {
    VectorXd omega(m.J());
    m.point(0, omega);
    return phi(omega).size();
}

}  // namespace

VectorXd expectation(const GaussianCoordinateModel& model, const CylindricalFunction& phi) {
    const Index d = output_dim(model, phi);
    const auto r = reduce(model, static_cast<std::size_t>(d), [&](VectorXd& w, double p, double* s, double&) {
        const VectorXd v = phi(w);
        if (v.size() != d) throw DimensionError("cylindrical function changed its output dimension");
        for (Index i = 0; i < d; ++i) s[i] += p * v[i];
    });
    return Eigen::Map<const VectorXd>(r.sums.data(), d);
}

CylindricalFunction white_noise(const GaussianCoordinateModel& model, const VectorXd& h) {
    if (h.size() != model.J()) throw DimensionError("white-noise coefficients must have length J");
    if (!h.allFinite()) throw DomainError("white-noise coefficients must be finite");
    const VectorXd scaled = (h.array() / model.eigenvalues().array().sqrt()).matrix();
    return [scaled](const VectorXd& omega) { return VectorXd::Constant(1, scaled.dot(omega)); };
}

double white_noise_inner(const GaussianCoordinateModel& model, const VectorXd& h, const VectorXd& g) {
    const auto wh = white_noise(model, h);
    const auto wg = white_noise(model, g);
    const auto r = reduce(model, 1, [&](VectorXd& w, double p, double* s, double&) { s[0] += p * wh(w)[0] * wg(w)[0]; });
    return r.sums[0];
}

double default_step(const GaussianCoordinateModel& model, Index j) {
    if (j < 0 || j >= model.J()) throw DomainError("coordinate index outside [0, J)");
    return 1e-5 * std::sqrt(model.eigenvalues()[j]);
}

CylindricalFunction directional_derivative(const GaussianCoordinateModel& model, CylindricalFunction phi, Index j,
                                           double eps) {
    const double h = eps > 0.0 ? eps : default_step(model, j);
    return [phi = std::move(phi), j, h](const VectorXd& omega) {
        VectorXd up = omega, down = omega;
        up[j] += h;
        down[j] -= h;
        return VectorXd((phi(up) - phi(down)) / (2.0 * h));
    };
}

namespace {

// Adds sum_j |D_j phi|^2 at omega to `grad`; omega is restored bit for bit.
void add_gradient(const GaussianCoordinateModel& m, const CylindricalFunction& phi, VectorXd& omega, double& grad) {
    for (Index j = 0; j < m.J(); ++j) {
        const double h = default_step(m, j);
        const double keep = omega[j];
        omega[j] = keep + h;
        const VectorXd up = phi(omega);
        omega[j] = keep - h;
        const VectorXd down = phi(omega);
        omega[j] = keep;
        grad += ((up - down) / (2.0 * h)).squaredNorm();
    }
}

}  // namespace

SobolevNorms sobolev_norm(const GaussianCoordinateModel& model, const CylindricalFunction& phi) {
    const auto r = reduce(model, 2, [&](VectorXd& w, double p, double* s, double&) {
        s[0] += p * phi(w).squaredNorm();
        double g = 0.0;
        add_gradient(model, phi, w, g);
        s[1] += p * g;
    });
    SobolevNorms n;
    n.l2 = std::sqrt(r.sums[0]);
    n.grad = std::sqrt(r.sums[1]);
    n.w12 = std::sqrt(r.sums[0] + r.sums[1]);
    return n;
}

PoincareResult poincare_check(const GaussianCoordinateModel& model, const CylindricalFunction& phi,
                              double third_derivative_bound) {
    if (!(third_derivative_bound >= 0.0)) throw DomainError("third-derivative bound must be nonnegative");
    // shift by the value at the first plan point so constants give exactly zero
    VectorXd origin(model.J());
    model.point(0, origin);
    const VectorXd ref = phi(origin);
    const VectorXd mean = expectation(model, [&](const VectorXd& w) { return VectorXd(phi(w) - ref); });
    const Index d = mean.size();
    const auto r = reduce(model, 2, [&](VectorXd& w, double p, double* s, double& peak) {
        const VectorXd v = phi(w);
        s[0] += p * (v - ref - mean).squaredNorm();
        peak = std::max(peak, v.cwiseAbs().maxCoeff());
        double g = 0.0;
        add_gradient(model, phi, w, g);
        s[1] += p * g;
    });
    PoincareResult out;
    out.lhs = r.sums[0];
    out.rhs = model.lambda_max() * r.sums[1];
    // Per-derivative error: Taylor remainder plus cancellation in the difference.
    constexpr double u = std::numeric_limits<double>::epsilon();
    double delta2 = 0.0;
    for (Index j = 0; j < model.J(); ++j) {
        const double h = default_step(model, j);
        const double e = h * h * third_derivative_bound / 6.0 + 4.0 * u * (1.0 + r.peak) / h;
        delta2 += static_cast<double>(d) * e * e;
    }
    const double delta = std::sqrt(delta2);
    out.budget = model.lambda_max() * (2.0 * std::sqrt(r.sums[1]) * delta + delta2) + 64.0 * u * (1.0 + out.lhs);
    out.holds = out.lhs <= out.rhs + out.budget;
    return out;
}

double omega_lipschitz_estimate(const GaussianCoordinateModel& model, const CylindricalFunction& phi, Index n_pairs,
                                std::uint64_t seed) {
    if (n_pairs < 1) throw DomainError("need at least one pair");
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> g;
    const VectorXd sd = model.eigenvalues().array().sqrt();
    double best = 0.0;
    VectorXd a(model.J()), b(model.J());
    for (Index k = 0; k < n_pairs; ++k) {
        for (Index j = 0; j < model.J(); ++j) a[j] = sd[j] * g(rng);
        // alternate distant pairs with nearby ones that probe local slopes
        const double scale = k % 2 == 0 ? 1.0 : 1e-3;
        for (Index j = 0; j < model.J(); ++j) b[j] = a[j] + scale * sd[j] * g(rng);
        const double dist = (a - b).norm();
        if (!(dist > 0.0)) continue;
        best = std::max(best, (phi(a) - phi(b)).norm() / dist);
    }
    return best;
}

CylindricalFunction lemma_lip_construct(const GaussianCoordinateModel& model, CylindricalFunction h, const VectorXd& x) {
    if (x.size() != model.J()) throw DimensionError("coefficients must have length J");
    // sqrt(lambda_j) x_j W(e_j) = x_j omega_j
    return [h = std::move(h), x](const VectorXd& omega) { return h(VectorXd(x.cwiseProduct(omega))); };
}

CompactnessReport compactness_diagnostic(const GaussianCoordinateModel& model, const std::vector<NamedFunction>& family,
                                         double R3, double epsilon) {
    if (!(epsilon > 0.0)) throw DomainError("net radius must be positive");
    CompactnessReport rep;
    rep.epsilon = epsilon;
    const std::size_t n = family.size();
    for (const auto& f : family) {
        const auto s = sobolev_norm(model, f.phi);
        rep.members.push_back({f.name, s.l2, s.grad, s.grad > R3});
    }
    // pairwise L2 distances over the plan
    std::vector<double> dist2(n * n, 0.0);
    if (n > 1) {
        const auto r = reduce(model, n * n, [&](VectorXd& w, double p, double* s, double&) {
            std::vector<VectorXd> v;
            v.reserve(n);
            for (const auto& f : family) v.push_back(f.phi(w));
            for (std::size_t a = 0; a < n; ++a)
                for (std::size_t b = a + 1; b < n; ++b) s[a * n + b] += p * (v[a] - v[b]).squaredNorm();
        });
        dist2 = r.sums;
    }
    auto dist = [&](std::size_t a, std::size_t b) {
        if (a == b) return 0.0;
        return std::sqrt(dist2[std::min(a, b) * n + std::max(a, b)]);
    };
    std::vector<std::size_t> centers;
    for (std::size_t a = 0; a < n; ++a) {
        bool covered = false;
        for (std::size_t c : centers) covered = covered || dist(a, c) <= epsilon;
        if (!covered) centers.push_back(a);
        for (std::size_t b = 0; b < n; ++b) rep.diameter = std::max(rep.diameter, dist(a, b));
    }
    rep.net_size = static_cast<Index>(centers.size());
    return rep;
}

std::vector<NamedFunction> test_function_library(const GaussianCoordinateModel& model) {
    const Index J = model.J();
    const Index top = model.argmax();
    const Index last = J - 1;
    VectorXd h = VectorXd::Constant(J, 1.0 / std::sqrt(static_cast<double>(J)));
    const double slope = (h.array() / model.eigenvalues().array().sqrt()).abs().maxCoeff();
    const auto wh = white_noise(model, h);
    std::vector<NamedFunction> lib;
    lib.push_back({"constant", [](const VectorXd&) { return VectorXd::Constant(1, 1.5); }, 0.0});
    lib.push_back({"coordinate_max", [top](const VectorXd& w) { return VectorXd::Constant(1, w[top]); }, 0.0});
    lib.push_back({"coordinate_last", [last](const VectorXd& w) { return VectorXd::Constant(1, w[last]); }, 0.0});
    lib.push_back({"quadratic",
                   [last](const VectorXd& w) { return VectorXd::Constant(1, w[0] * w[0] + 0.5 * w[last] * w[last] + w[0]); },
                   0.0});
    lib.push_back({"sin_first", [](const VectorXd& w) { return VectorXd::Constant(1, std::sin(w[0])); }, 1.0});
    lib.push_back({"sin_3_first", [](const VectorXd& w) { return VectorXd::Constant(1, std::sin(3.0 * w[0])); }, 27.0});
    lib.push_back({"tanh_white_noise", [wh](const VectorXd& w) { return VectorXd(wh(w).array().tanh().matrix()); },
                   2.0 * slope * slope * slope});
    lib.push_back({"gaussian_bump", [](const VectorXd& w) { return VectorXd::Constant(1, std::exp(-w[0] * w[0])); }, 4.0});
    lib.push_back({"sin_cos_product",
                   [last](const VectorXd& w) { return VectorXd::Constant(1, std::sin(w[0]) * std::cos(w[last])); }, 1.0});
    lib.push_back({"vector_valued",
                   [J](const VectorXd& w) {
                       VectorXd v(2);
                       v << std::sin(w[0]), w[J > 1 ? 1 : 0] * w[J > 2 ? 2 : 0];
                       return v;
                   },
                   1.0});
    lib.push_back({"log_cosh_sum",
                   [](const VectorXd& w) {
                       double s = 0.0;
                       for (Index j = 0; j < w.size(); ++j) s += std::log(std::cosh(w[j]));
                       return VectorXd::Constant(1, s);
                   },
                   1.0});
    return lib;
}

std::optional<NamedFunction> find_test_function(const GaussianCoordinateModel& model, const std::string& name) {
    for (auto& f : test_function_library(model))
        if (f.name == name) return f;
    return std::nullopt;
}

nlohmann::json to_json(const PoincareResult& r) {
    return {{"lhs", r.lhs}, {"rhs", r.rhs}, {"budget", r.budget}, {"holds", r.holds}};
}

nlohmann::json to_json(const SobolevNorms& r) { return {{"l2", r.l2}, {"grad", r.grad}, {"w12", r.w12}}; }

nlohmann::json to_json(const CompactnessReport& r) {
    nlohmann::json members = nlohmann::json::array();
    for (const auto& m : r.members)
        members.push_back({{"name", m.name}, {"l2", m.l2}, {"grad", m.grad}, {"flagged", m.flagged}});
    return {{"members", members}, {"epsilon", r.epsilon}, {"net_size", r.net_size}, {"diameter", r.diameter}};
}

}  // namespace bsekit
