#pragma once

#include "bsekit/filtered_space.hpp"
#include "bsekit/laws.hpp"
#include "bsekit/martingale_repr.hpp"
#include "bsekit/noise_models.hpp"

#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <variant>
#include <vector>

namespace bsekit {

/// Declared dependence signature of a driver. Reads outside the signature
/// throw ContractError at evaluation time.
namespace deps {
inline constexpr unsigned current = 1u;       ///< Y_t, M_t at the current node
inline constexpr unsigned whole_path = 2u;    ///< values at earlier levels
inline constexpr unsigned law = 4u;           ///< laws of Y, Z, U
inline constexpr unsigned zu = 8u;            ///< Z^M, U^M from the representation
inline constexpr unsigned anticipating = 16u; ///< E_t of later values
}  // namespace deps

class GeneratorState;

/// What a driver sees at step k: values on the nodes of level k.
class DriverContext {
public:
    DriverContext(const GeneratorState& state, Index step, unsigned signature, bool uses_y);

    Index step() const noexcept { return step_; }
    double time() const;
    double dt() const;
    Index dim() const;
    Index brownian_dim() const;
    Index mark_count() const;
    Index node_count() const;
    const FiniteFilteredSpace& space() const;

    /// Y at `level` <= step, one column per node of the current level.
    MatrixXd Y(Index level) const;
    MatrixXd Y() const { return Y(step_); }
    MatrixXd M(Index level) const;
    MatrixXd M() const { return M(step_); }
    /// E_{t_step}[Y_level] for level >= step.
    MatrixXd cond_expect_Y(Index level) const;
    MatrixXd cond_expect_M(Index level) const;
    /// Z at `level` <= step as columns of length d*n (column-major d x n).
    MatrixXd Z(Index level) const;
    MatrixXd Z() const { return Z(step_); }
    /// U at `level` <= step as columns of length d*m (column i of d x m is U(x_i)).
    MatrixXd U(Index level) const;
    MatrixXd U() const { return U(step_); }

    DiscreteLaw law_Y(Index level) const;
    DiscreteLaw law_Y() const { return law_Y(step_); }
    DiscreteLaw law_Z(Index level) const;
    DiscreteLaw law_Z() const { return law_Z(step_); }
    /// Law of U with the intensities as metric weights.
    DiscreteLaw law_U(Index level) const;
    DiscreteLaw law_U() const { return law_U(step_); }

private:
    void require(unsigned flag, const char* what) const;
    void require_past(Index level, const char* what) const;
    MatrixXd lifted(const MatrixXd& values, Index level) const;

    const GeneratorState& state_;
    Index step_;
    unsigned signature_;
    bool uses_y_;
};

/// Returns the driver value on every node of `ctx.step()` (dim x nodes).
using DriverFn = std::function<MatrixXd(const DriverContext&)>;

struct FunctionalArgs {
    const FiniteFilteredSpace& space;
    const NoiseModel* model;
    const AdaptedProcessd& Y;
    const Martingaled& M;
    const GeneratorState& state;
};

/// (a) arbitrary F(Y, M); must return an adapted process with F_0 = 0.
struct FunctionalForm {
    std::function<AdaptedProcessd(const FunctionalArgs&)> F;
    bool uses_y = true;
    bool needs_representation = false;
};

/// (b) F_{t_k} = sum_{j<k} f(t_j, .) dt_j.
struct IntegralForm {
    DriverFn f;
    unsigned signature = deps::current;
    bool uses_y = true;
};

/// (c) F_t = int_0^t int_0^s g(s-r, Z_{s-r}, U_{s-r}) nu(dr) ds with nu a finite
/// sum of atoms (time, weight).
using KernelFn = std::function<VectorXd(double s, const VectorXd& z, const VectorXd& u)>;
struct DelayedConvolutionForm {
    KernelFn g;
    std::vector<std::pair<double, double>> nu;
};

class GeneratorSpec;

/// (d) F = F1 + F2, F1 the contraction part and F2 the compact part.
struct SplitForm {
    std::shared_ptr<const GeneratorSpec> first;
    std::shared_ptr<const GeneratorSpec> second;
};

struct DriverLipschitzProfile {
    double C = 0.0;
    std::optional<double> C1;
    std::optional<double> C2;
    bool empirical = false;
    Index pairs = 0;
};

class GeneratorSpec {
public:
    using Form = std::variant<FunctionalForm, IntegralForm, DelayedConvolutionForm, SplitForm>;

    GeneratorSpec(std::string name, Index dim, Form form);

    const std::string& name() const noexcept { return name_; }
    Index dim() const noexcept { return dim_; }
    const Form& form() const noexcept { return form_; }

    bool y_free() const;
    bool needs_representation() const;
    bool anticipating() const;
    /// True when F is a time integral of a driver (block solving applies).
    bool has_driver() const;
    /// True when condition (S) can be solved by one forward sweep.
    bool forward_sweep() const;

    std::optional<DriverLipschitzProfile> declared;

private:
    std::string name_;
    Index dim_;
    Form form_;
};

/// Evaluation inputs with a lazily computed martingale representation.
class GeneratorState {
public:
    GeneratorState(const FiniteFilteredSpace& space, const NoiseModel* model, const AdaptedProcessd& Y,
                   const Martingaled& M);

    const FiniteFilteredSpace& space() const noexcept { return space_; }
    const NoiseModel* model() const noexcept { return model_; }
    const AdaptedProcessd& Y() const noexcept { return Y_; }
    const Martingaled& M() const noexcept { return M_; }
    const MartingaleDecomposition& decomposition() const;

private:
    const FiniteFilteredSpace& space_;
    const NoiseModel* model_;
    const AdaptedProcessd& Y_;
    const Martingaled& M_;
    mutable std::optional<MartingaleDecomposition> dec_;
};

struct SnappedMeasure {
    std::vector<Index> levels;
    std::vector<double> weights;
    std::vector<std::string> warnings;
};

/// Snaps atoms to the nearest grid level, recording a warning for each moved atom.
SnappedMeasure snap_measure(const TimeGrid& grid, const std::vector<std::pair<double, double>>& nu);

AdaptedProcessd evaluate_F(const GeneratorSpec& gen, const NoiseModel& model, const AdaptedProcessd& Y,
                           const Martingaled& M);
/// Overload for hand-built spaces; throws for generators that need a representation.
AdaptedProcessd evaluate_F(const GeneratorSpec& gen, const FiniteFilteredSpace& space,
                           const AdaptedProcessd& Y, const Martingaled& M);

/// Driver value at one step (dim x nodes(step)); only for generators with a driver.
MatrixXd driver_at(const GeneratorSpec& gen, const GeneratorState& state, Index step);

/// sum_{j<k, j in [from, to)} f_j dt_j for every level k.
AdaptedProcessd integrate_driver(const GeneratorSpec& gen, const GeneratorState& state, Index from, Index to);

struct DelayedResult {
    AdaptedProcessd F;
    std::vector<std::string> warnings;
};

/// Reduced form: F_{t_k} = sum_{j<k} nu[0, T - t_j) g(t_j, Z_j, U_j) dt_j.
DelayedResult delayed_convolution_F(const KernelFn& g, const std::vector<std::pair<double, double>>& nu,
                                    Index dim, const NoiseModel& model, const Martingaled& M);

// Builders ------------------------------------------------------------------

GeneratorSpec zero_generator(Index dim);
GeneratorSpec integral_generator(std::string name, Index dim, unsigned signature, DriverFn f,
                                 bool uses_y = true);
GeneratorSpec functional_generator(std::string name, Index dim,
                                   std::function<AdaptedProcessd(const FunctionalArgs&)> F,
                                   bool uses_y = true, bool needs_representation = false);
GeneratorSpec delayed_convolution_generator(std::string name, Index dim, KernelFn g,
                                            std::vector<std::pair<double, double>> nu);
GeneratorSpec split_generator(std::string name, GeneratorSpec first, GeneratorSpec second);

/// f(t, y, z, u) applied node by node at the current step.
using PointwiseFn = std::function<VectorXd(double t, const VectorXd& y, const VectorXd& z, const VectorXd& u)>;
GeneratorSpec pointwise_generator(std::string name, Index dim, PointwiseFn f, bool uses_y = true,
                                  bool uses_zu = true);

struct LawSet {
    const DiscreteLaw& Y;
    const DiscreteLaw* Z;  ///< null when the model has no Brownian part
    const DiscreteLaw* U;  ///< null without marks
};
using MeanFieldFn = std::function<VectorXd(double t, const VectorXd& y, const VectorXd& z,
                                           const VectorXd& u, const LawSet& laws)>;

GeneratorSpec meanfield_generator(std::string name, Index dim, MeanFieldFn f, bool uses_zu = true);

/// Evaluates a mean-field driver: laws per time, then f per node, then integration.
AdaptedProcessd meanfield_driver(const MeanFieldFn& f, Index dim, const NoiseModel& model,
                                 const AdaptedProcessd& Y, const Martingaled& M, bool uses_zu = true);

/// f(Z) = f1(Z) + alpha + E[Z|Z|] beta as a split generator (F1 from f1, F2 the rest).
/// `f1` receives Z as a d x n matrix.
GeneratorSpec quadratic_meanfield_driver(const VectorXd& alpha, const VectorXd& beta,
                                         std::function<VectorXd(const MatrixXd&)> f1);

/// The deterministic quadratic part alpha + E[Z|Z|] beta for a law of Z.
VectorXd quadratic_meanfield_part(const DiscreteLaw& law_z, Index d, const VectorXd& alpha, const VectorXd& beta);

struct LipschitzOptions {
    Index trials = 32;
    double p = 2.0;
    Index k = 1;  ///< use F^{(k)}(Y, M) = F(Y^{(k,M)}, M)
    std::uint64_t seed = 1;
};

/// Empirical lower bound on sup ||F(Y,M) - F(Y',M')||_S / (||Y - Y'||_S + ||M - M'||_S).
DriverLipschitzProfile estimate_lipschitz(const GeneratorSpec& gen, const NoiseModel& model,
                                          const LipschitzOptions& options = {});

}  // namespace bsekit
