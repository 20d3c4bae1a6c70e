#pragma once

#include "bsekit/core.hpp"

#include <json.hpp>

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace bsekit {

/// Gauss-Hermite rule for the standard normal law (nodes ascending, weights summing to 1).
struct QuadratureRule {
    VectorXd nodes;
    VectorXd weights;
};

QuadratureRule gauss_hermite(Index q);

struct GaussianModelSpec {
    Index J = 8;
    VectorXd eigenvalues;  ///< empty: lambda_j = 2^{-j}
    Index q = 5;
    /// Quadrature is used when J * q^J stays within this many coordinate values.
    std::uint64_t budget = std::uint64_t{1} << 22;
    Index samples = 20000;  ///< Monte Carlo fallback
    std::uint64_t seed = 1;
};

/// Coordinates omega_j ~ N(0, lambda_j), j = 1..J, with a fixed sampling plan:
/// a tensor Gauss-Hermite grid or seeded Monte Carlo points.
class GaussianCoordinateModel {
public:
    static GaussianCoordinateModel quadrature(VectorXd eigenvalues, Index q);
    static GaussianCoordinateModel monte_carlo(VectorXd eigenvalues, Index samples, std::uint64_t seed);
    static GaussianCoordinateModel from_spec(const GaussianModelSpec& spec);

    Index J() const noexcept { return lambda_.size(); }
    const VectorXd& eigenvalues() const noexcept { return lambda_; }
    double lambda_max() const { return lambda_.maxCoeff(); }
    /// First index attaining the largest eigenvalue.
    Index argmax() const;
    bool is_quadrature() const noexcept { return q_ > 0; }
    Index q() const noexcept { return q_; }
    std::uint64_t point_count() const noexcept { return count_; }

    /// Writes plan point `index` into omega and returns its weight.
    double point(std::uint64_t index, VectorXd& omega) const;

private:
    GaussianCoordinateModel() = default;
    VectorXd lambda_;
    Index q_ = 0;
    QuadratureRule rule_;
    MatrixXd samples_;  ///< J x count, Monte Carlo only
    std::uint64_t count_ = 0;
};

/// A function of the first J coordinates with values in R^d.
using CylindricalFunction = std::function<VectorXd(const VectorXd& omega)>;

/// Expectation of each component over the plan.
VectorXd expectation(const GaussianCoordinateModel& model, const CylindricalFunction& phi);

/// W(h)(omega) = sum_j h_j omega_j / sqrt(lambda_j).
CylindricalFunction white_noise(const GaussianCoordinateModel& model, const VectorXd& h);

/// E[W(h) W(g)] over the plan.
double white_noise_inner(const GaussianCoordinateModel& model, const VectorXd& h, const VectorXd& g);

/// Default finite-difference step 1e-5 sqrt(lambda_j).
double default_step(const GaussianCoordinateModel& model, Index j);

/// Central difference in direction e_j; eps <= 0 selects default_step.
CylindricalFunction directional_derivative(const GaussianCoordinateModel& model, CylindricalFunction phi, Index j,
                                           double eps = 0.0);

struct SobolevNorms {
    double l2 = 0.0;
    double grad = 0.0;
    double w12 = 0.0;
};

SobolevNorms sobolev_norm(const GaussianCoordinateModel& model, const CylindricalFunction& phi);

struct PoincareResult {
    double lhs = 0.0;     ///< E|phi - E phi|^2
    double rhs = 0.0;     ///< lambda ||D phi||^2
    double budget = 0.0;  ///< finite-difference allowance
    bool holds = false;
};

/// `third_derivative_bound` bounds |d^3 phi / d omega_j^3| for every j and component.
PoincareResult poincare_check(const GaussianCoordinateModel& model, const CylindricalFunction& phi,
                              double third_derivative_bound = 1.0);

/// Largest |phi(w) - phi(w')| / ||w - w'|| over seeded pairs; a lower bound on the true constant.
double omega_lipschitz_estimate(const GaussianCoordinateModel& model, const CylindricalFunction& phi, Index n_pairs,
                                std::uint64_t seed = 1);

/// omega -> h(x_1 omega_1, ..., x_J omega_J), omega-Lipschitz with constant Kc ||x||_2
/// whenever h is Kc-Lipschitz in the l1 norm.
CylindricalFunction lemma_lip_construct(const GaussianCoordinateModel& model, CylindricalFunction h, const VectorXd& x);

struct CompactnessMember {
    std::string name;
    double l2 = 0.0;
    double grad = 0.0;
    bool flagged = false;
};

struct CompactnessReport {
    std::vector<CompactnessMember> members;
    double epsilon = 0.0;
    Index net_size = 0;
    double diameter = 0.0;
};

struct NamedFunction {
    std::string name;
    CylindricalFunction phi;
    double third_derivative_bound = 1.0;
};

/// Flags members with ||D phi||_2 > R3 and counts a greedy L2 epsilon-net.
CompactnessReport compactness_diagnostic(const GaussianCoordinateModel& model, const std::vector<NamedFunction>& family,
                                         double R3, double epsilon);

/// Named smooth test functions with declared third-derivative bounds.
std::vector<NamedFunction> test_function_library(const GaussianCoordinateModel& model);
std::optional<NamedFunction> find_test_function(const GaussianCoordinateModel& model, const std::string& name);

nlohmann::json to_json(const PoincareResult& r);
nlohmann::json to_json(const SobolevNorms& r);
nlohmann::json to_json(const CompactnessReport& r);

}  // namespace bsekit
