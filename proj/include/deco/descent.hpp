#pragma once

#include <Eigen/Core>

#include <deque>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "deco/adjoint.hpp"

namespace deco::descent {

using problems::AffineStateSystem;
using problems::ControlVector;

inline constexpr std::size_t kDefaultMaxIter = 1'000'000;
inline constexpr double kDivergenceNorm = 1e12;

// --- Gradient oracles -------------------------------------------------------

struct OracleResult {
    Vector gradient;
    double grad_norm = 0.0;
    /// Objective at the state used for the gradient (telemetry only).
    double objective = 0.0;
    double tau_R = 0.0;
    double tau_psi = 0.0;
    double state_residual = 0.0;
    double adjoint_residual = 0.0;
    std::size_t state_solves = 0;
    std::size_t adjoint_solves = 0;
    bool at_floor = false;
};

class GradientOracle {
public:
    virtual ~GradientOracle() = default;
    /// Gradient estimate at iterate k; prev_grad_norm is empty for k = 0.
    virtual OracleResult evaluate(const ControlVector& z, std::size_t k, std::optional<double> prev_grad_norm) = 0;
};

inline constexpr std::size_t kMaxExtrapolationOrder = 2;

/// Initial guesses for the next evaluation, extrapolated through the last
/// accepted states and adjoints. Iterates move along a smooth path, so a
/// low-order polynomial fit starts much closer than x_k alone. Order 0
/// reuses x_k; order 1 gives 2 x_k - x_{k-1}; order 2 gives
/// 3 x_k - 3 x_{k-1} + x_{k-2}. Short histories fall back to lower orders.
class WarmStartHistory {
public:
    void record(const adjoint::GradientEstimate& est, std::size_t order);
    [[nodiscard]] const adjoint::WarmStart& guess() const noexcept { return guess_; }

private:
    std::deque<Vector> states_, adjoints_;
    adjoint::WarmStart guess_;
};

/// Adaptive-tolerance gradients on an AffineStateSystem, warm-started from the
/// previous states and adjoints. Keeps the last estimate for inspection.
class AdaptiveAdjointOracle final : public GradientOracle {
public:
    AdaptiveAdjointOracle(const AffineStateSystem& problem, adjoint::ToleranceSchedule sched);
    OracleResult evaluate(const ControlVector& z, std::size_t k, std::optional<double> prev_grad_norm) override;
    [[nodiscard]] const adjoint::GradientEstimate& last() const noexcept { return last_; }
    /// Called with every estimate before it is returned.
    std::function<void(const ControlVector&, const adjoint::GradientEstimate&, std::size_t)> on_estimate;
    std::size_t extrapolation_order = 1;

private:
    const AffineStateSystem* problem_;
    adjoint::ToleranceSchedule sched_;
    WarmStartHistory warm_;
    adjoint::GradientEstimate last_;
};

/// Fixed solver tolerances (the GD baseline), warm-started like the
/// adaptive oracle.
class FixedToleranceOracle final : public GradientOracle {
public:
    FixedToleranceOracle(const AffineStateSystem& problem, double tau_R, double tau_psi);
    OracleResult evaluate(const ControlVector& z, std::size_t k, std::optional<double> prev_grad_norm) override;
    [[nodiscard]] const adjoint::GradientEstimate& last() const noexcept { return last_; }
    std::function<void(const ControlVector&, const adjoint::GradientEstimate&, std::size_t)> on_estimate;
    std::size_t extrapolation_order = 1;

private:
    const AffineStateSystem* problem_;
    double tau_R_;
    double tau_psi_;
    WarmStartHistory warm_;
    adjoint::GradientEstimate last_;
};

// --- Directions -------------------------------------------------------------

enum class DirectionKind { IGD, IBFGS, NewtonType };
std::string to_string(DirectionKind kind);

struct ConditionConstants {
    double c1p;
    double c2p;
};

class DirectionPolicy {
public:
    virtual ~DirectionPolicy() = default;
    [[nodiscard]] virtual DirectionKind kind() const = 0;
    virtual Vector direction(const Vector& g_bar) = 0;
    /// Constants for which the most recent direction must satisfy the
    /// directional conditions.
    [[nodiscard]] virtual ConditionConstants condition_constants() const = 0;
    /// Called after each accepted step with the new gradient estimate.
    /// residual_level is the summed achieved state and adjoint residual
    /// norms of both estimates, a proxy for the error in g_next - g_k.
    virtual void update(const Vector& z_k, const Vector& z_next, const Vector& g_k, const Vector& g_next,
                        double residual_level = 0.0) {
        (void)z_k, (void)z_next, (void)g_k, (void)g_next, (void)residual_level;
    }
};

Vector igd_direction(const Vector& g_bar);

/// c1p ||g||^2 <= -g^T s and ||s|| <= c2p ||g||.
bool check_direction_conditions(const Vector& g_bar, const Vector& s, double c1p, double c2p);

class IgdDirection final : public DirectionPolicy {
public:
    [[nodiscard]] DirectionKind kind() const override { return DirectionKind::IGD; }
    Vector direction(const Vector& g_bar) override { return igd_direction(g_bar); }
    [[nodiscard]] ConditionConstants condition_constants() const override { return {1.0, 1.0}; }
};

enum class BfgsOutcome { Updated, Damped, Skipped, Reset };

/// Dense inverse-Hessian approximation with Powell damping.
class BfgsState {
public:
    explicit BfgsState(std::size_t m, double damping_threshold = 0.2, double curvature_floor = 1e-14);

    [[nodiscard]] const Eigen::MatrixXd& D() const noexcept { return D_; }
    void set_D(const Eigen::MatrixXd& D);

    [[nodiscard]] Vector direction(const Vector& g_bar) const;

    /// p = z_{k+1} - z_k, y = g_{k+1} - g_k. The damping test uses q = D^{-1} p;
    /// if p^T y < theta_min p^T q, y is replaced by theta y + (1-theta) q with
    /// theta = (1-theta_min) p^T q / (p^T q - p^T y).
    BfgsOutcome update(const Vector& p, const Vector& y);

    /// (lambda_min, lambda_max) of D.
    [[nodiscard]] std::pair<double, double> eigen_range() const;
    [[nodiscard]] bool symmetric_positive_definite(double sym_tol = 1e-12) const;

    std::size_t damped_updates = 0;
    std::size_t bad_curvature_events = 0;
    std::size_t reset_events = 0;

private:
    Eigen::MatrixXd D_;
    double theta_min_;
    double curvature_floor_;
};

class IbfgsDirection final : public DirectionPolicy {
public:
    explicit IbfgsDirection(std::size_t m, double damping_threshold = 0.2);
    [[nodiscard]] DirectionKind kind() const override { return DirectionKind::IBFGS; }
    Vector direction(const Vector& g_bar) override;
    /// (lambda_min(D), lambda_max(D)) at the time of the last direction.
    [[nodiscard]] ConditionConstants condition_constants() const override { return constants_; }
    void update(const Vector& z_k, const Vector& z_next, const Vector& g_k, const Vector& g_next,
                double residual_level = 0.0) override;

    [[nodiscard]] const BfgsState& state() const noexcept { return state_; }
    [[nodiscard]] BfgsOutcome last_outcome() const noexcept { return last_outcome_; }

    /// Pairs with ||y|| <= noise_ratio * residual_level are skipped: below
    /// the solver error level y carries no curvature information, and
    /// fitting it shrinks D geometrically. 0 disables the test.
    double noise_ratio = 0.0;
    std::size_t noise_skips = 0;

private:
    BfgsState state_;
    ConditionConstants constants_{1.0, 1.0};
    BfgsOutcome last_outcome_ = BfgsOutcome::Updated;
};

/// Solves H s = -g_bar. Throws std::invalid_argument if H is not symmetric
/// positive definite.
Vector newton_type_direction(const Vector& g_bar, const Eigen::MatrixXd& H);

/// Newton-type policy with a fixed matrix H whose spectrum is measured once;
/// the conditions are checked with c1p = 1/eta and c2p = 1/mu.
class NewtonTypeDirection final : public DirectionPolicy {
public:
    explicit NewtonTypeDirection(Eigen::MatrixXd H);
    [[nodiscard]] DirectionKind kind() const override { return DirectionKind::NewtonType; }
    Vector direction(const Vector& g_bar) override { return newton_type_direction(g_bar, H_); }
    [[nodiscard]] ConditionConstants condition_constants() const override { return {1.0 / eta_, 1.0 / mu_}; }
    [[nodiscard]] double mu() const noexcept { return mu_; }
    [[nodiscard]] double eta() const noexcept { return eta_; }

private:
    Eigen::MatrixXd H_;
    double mu_;
    double eta_;
};

// --- Steps ------------------------------------------------------------------

enum class StepKind { Constant, Diminishing };

struct StepPolicy {
    StepKind kind = StepKind::Constant;
    double t = 1.0;  // constant step, or t0 for the diminishing rule

    static StepPolicy constant(double t);
    static StepPolicy diminishing(double t0);
    [[nodiscard]] double at(std::size_t k) const;
};

double constant_step(double t);
double diminishing_step(double t0, std::size_t k);

// --- Driver -----------------------------------------------------------------

enum class RunStatus { Converged, MaxIter, SolverFailure };
std::string to_string(RunStatus status);

struct IterationRecord {
    std::size_t k = 0;
    Vector z;
    double objective = 0.0;
    double grad_norm = 0.0;
    /// Step used to leave z_k; 0 on the final record.
    double step = 0.0;
    double tau_R = 0.0;
    double tau_psi = 0.0;
    std::size_t state_solves = 0;
    std::size_t adjoint_solves = 0;
    bool at_floor = false;
    bool conditions_ok = true;
    /// Direction-policy spectrum bounds used for the condition check.
    double c1p = 1.0;
    double c2p = 1.0;
    bool d_spd = true;
    double elapsed_s = 0.0;
};

struct RunRecord {
    std::vector<IterationRecord> iterations;
    RunStatus status = RunStatus::MaxIter;
    std::string failure;
    double total_time_s = 0.0;
    std::size_t state_solves = 0;
    std::size_t adjoint_solves = 0;
    std::size_t condition_violations = 0;
    std::size_t damped_updates = 0;
    std::size_t bad_curvature_events = 0;
    std::size_t noise_skips = 0;
    std::size_t reset_events = 0;
    std::size_t spd_failures = 0;

    [[nodiscard]] std::size_t iteration_count() const noexcept { return iterations.size(); }
    [[nodiscard]] const Vector& final_z() const { return iterations.back().z; }
    [[nodiscard]] double final_grad_norm() const { return iterations.empty() ? 0.0 : iterations.back().grad_norm; }
};

struct RunOptions {
    double eps = 1e-6;
    std::size_t max_iter = kDefaultMaxIter;
    /// Keep every iterate in the record; when false only the last is kept
    /// (counters are always complete).
    bool keep_trace = true;
};

/// z_{k+1} = z_k + t_k s_k until ||g_bar_k|| < eps or max_iter gradient
/// evaluations. Iteration count = number of gradient evaluations.
RunRecord igdm_run(GradientOracle& oracle, const ControlVector& z0, DirectionPolicy& direction,
                   const StepPolicy& step, const RunOptions& options = {});

} // namespace deco::descent
