#pragma once

#include "bsekit/generators.hpp"

#include <json.hpp>

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace bsekit {

struct SolverConfig {
    double p = 2.0;
    double tol = 1e-10;
    Index max_iter = 500;
    std::optional<double> block_delta;
    double mann_theta = 0.5;
    std::optional<RandomVectord> initial;  ///< defaults to xi
    std::optional<double> declared_C;
    /// Declared (C, R1, R2) for the radius condition of the split regime.
    std::optional<double> radius_C;
    std::optional<double> R1;
    std::optional<double> R2;
    double forward_tol = 1e-14;
    Index forward_max_iter = 2000;
    Index divergence_window = 10;

    void validate(double horizon) const;
};

enum class SolveStatus { converged, max_iterations, diverged, non_finite, forward_failed, window_failed };

const char* to_string(SolveStatus s);

struct RadiusCheck {
    double lhs = 0.0;  ///< ||xi||_2 + ||F1_T(0,0)||_2 + C R1 + R2
    double R1 = 0.0;
    bool holds = false;
};

struct SolverReport {
    std::string method;
    SolveStatus status = SolveStatus::max_iterations;
    bool converged = false;
    RandomVectord V;
    AdaptedProcessd Y;
    Martingaled M;
    AdaptedProcessd F;
    double residual = INFINITY;
    double tol = 0.0;
    double xi_norm = 0.0;
    std::vector<double> iterates;  ///< ||V_{k+1} - V_k||_p
    std::vector<double> ratios;    ///< successive ratios (NaN where skipped)
    double observed_ratio = 0.0;
    std::optional<double> theoretical_bound;
    Index iterations = 0;
    std::string message;
    std::vector<std::string> warnings;
    std::vector<SolverReport> blocks;
    std::optional<RadiusCheck> radius;
    Index window_from = 0;
    Index window_to = 0;
};

/// Thrown when the forward equation Y = y - F(Y, M) - M does not settle.
class ForwardSolveError : public Error {
public:
    ForwardSolveError(const std::string& what, double defect) : Error(what), defect_(defect) {}
    double defect() const noexcept { return defect_; }

private:
    double defect_;
};

struct ForwardSolution {
    AdaptedProcessd Y;
    AdaptedProcessd F;  ///< F(Y, M) at the returned Y
    double defect = 0.0;
    Index iterations = 0;
};

/// Solves Y_t = y - F_t(Y, M) - M_t: one forward sweep for non-anticipating
/// drivers, the iteration Y <- y - F(Y, M) - M otherwise.
ForwardSolution solve_condition_S(const GeneratorSpec& gen, const NoiseModel& model, const RandomVectord& y,
                                  const Martingaled& M, double tol = 1e-14, Index max_iter = 2000);
ForwardSolution solve_condition_S(const GeneratorSpec& gen, const FiniteFilteredSpace& space,
                                  const RandomVectord& y, const Martingaled& M, double tol = 1e-14,
                                  Index max_iter = 2000);

struct GEvaluation {
    RandomVectord y;
    Martingaled M;
    ForwardSolution forward;
    RandomVectord G;
};

GEvaluation evaluate_G(const GeneratorSpec& gen, const NoiseModel& model, const RandomVectord& xi,
                       const RandomVectord& V, double forward_tol = 1e-14, Index forward_max_iter = 2000);

/// G(V) = xi + F_T(Y^V, M^V).
RandomVectord G_map(const GeneratorSpec& gen, const NoiseModel& model, const RandomVectord& xi, const RandomVectord& V);

/// G(V) - E_0 G(V) for Y-free generators and E_0 V = 0.
RandomVectord G0_map(const GeneratorSpec& gen, const NoiseModel& model, const RandomVectord& xi, const RandomVectord& V);

SolverReport picard_solve(const GeneratorSpec& gen, const NoiseModel& model, const RandomVectord& xi,
                          const SolverConfig& config = {});

/// Iterates G_0 on mean-zero vectors and rebuilds (Y, M) from
/// M_t = -E_t V and Y_t = E_0 xi + E_0 F_T(M) - F_t(M) - M_t.
SolverReport centered_solve(const GeneratorSpec& gen, const NoiseModel& model, const RandomVectord& xi,
                            const SolverConfig& config = {});

SolverReport block_solve(const GeneratorSpec& gen, const NoiseModel& model, const RandomVectord& xi,
                         const SolverConfig& config);

SolverReport mann_solve(const GeneratorSpec& gen, const NoiseModel& model, const RandomVectord& xi,
                        const SolverConfig& config);

struct UniquenessReport {
    double max_distance = 0.0;
    bool all_converged = true;
    std::vector<SolveStatus> statuses;
    std::vector<RandomVectord> fixed_points;
};

/// Solves from xi, 0 and seeded random starts and compares the fixed points.
UniquenessReport verify_uniqueness(const GeneratorSpec& gen, const NoiseModel& model, const RandomVectord& xi,
                                   const SolverConfig& config, Index n_starts, std::uint64_t seed = 1);

/// c_2 = 1/5, c_inf = 1/4, c_p = (p-1)/(4p-1).
double contraction_constant(double p);

/// Lipschitz bound of G for a declared C < c_p: 4C/(1-C) at p = 2,
/// 3 C_p C/(1-C) with C_p = p/(p-1) otherwise.
std::optional<double> theoretical_bound(double C, double p);

/// Admissible C_2 threshold c_p C_1 / (e^{C_1 T} - 1).
double prop_genBSDE_bound(double C1, double T, double p);

/// Largest |Y_t + F_t + M_t - (xi + F_T + M_T)| over nodes and times.
double bse_residual(const FiniteFilteredSpace& space, const RandomVectord& xi, const AdaptedProcessd& Y,
                    const AdaptedProcessd& F, const Martingaled& M);

nlohmann::json report_to_json(const SolverReport& report, bool include_processes = true);
/// Columns k, diff_norm, ratio.
void write_iterates_csv(std::ostream& os, const SolverReport& report);

/// Shortest round-trip decimal rendering used by every CSV writer.
std::string format_double(double v);

}  // namespace bsekit
