#pragma once

#include <optional>
#include <string>
#include <vector>

#include "deco/problems.hpp"

namespace deco::adjoint {

using problems::AffineStateSystem;
using problems::ControlVector;

struct ToleranceSchedule {
    double gamma1 = 60.0;
    double gamma2 = 3.0;
    double tau_R_init = 1e-2;
    double tau_psi_init = 1e-2;
    double tau_R_floor = 1e-9;
    double tau_psi_floor = 1e-9;
    /// Below this inexact-gradient norm the proportional bounds are
    /// treated as unreachable.
    double grad_floor = 1e-13;
    std::size_t max_rounds = 50;

    /// Throws std::invalid_argument unless all values are positive and
    /// floors do not exceed the initial tolerances.
    void validate() const;
};

struct SolveTrial {
    enum class Stage { State, Adjoint } stage;
    double tolerance;
    double achieved_residual;
    std::size_t iterations;
};

struct GradientEstimate {
    Vector gradient;
    double grad_norm = 0.0;
    double achieved_state_residual = 0.0;
    double achieved_adjoint_residual = 0.0;
    /// Final trial tolerances used for the accepted state / adjoint.
    double tau_R = 0.0;
    double tau_psi = 0.0;
    Vector state;
    Vector adjoint;
    std::size_t state_solves = 0;
    std::size_t adjoint_solves = 0;
    std::size_t outer_rounds = 0;
    std::size_t inner_rounds = 0;
    std::size_t state_iterations = 0;
    std::size_t adjoint_iterations = 0;
    /// The proportional bounds could not be met above the floors; the
    /// estimate is the best available at the floor tolerances.
    bool at_floor = false;
    std::vector<SolveTrial> trials;
};

/// Previous state and adjoint, reused as initial guesses.
struct WarmStart {
    Vector state;
    Vector adjoint;
};

/// g = grad_z F - (dR/dz)^T psi for a given state and adjoint.
Vector gradient_from(const AffineStateSystem& problem, const ControlVector& z, std::span<const double> state,
                     std::span<const double> adjoint);

/// Gradient from direct state and adjoint solves.
Vector exact_gradient(const AffineStateSystem& problem, const ControlVector& z);

/// Test-and-tighten evaluation. `prev_grad_norm` is empty at the first
/// iterate. Throws SolverError if an iterative solve fails or the round cap
/// is exceeded.
GradientEstimate adaptive_inexact_gradient(const AffineStateSystem& problem, const ControlVector& z,
                                           const ToleranceSchedule& sched, std::optional<double> prev_grad_norm,
                                           const WarmStart* warm = nullptr);

/// One state and one adjoint solve at fixed tolerances.
GradientEstimate fixed_tolerance_gradient(const AffineStateSystem& problem, const ControlVector& z, double tau_R,
                                          double tau_psi, const WarmStart* warm = nullptr);

struct ErrorCertificate {
    double error_norm = 0.0;
    /// error_norm / ||g_bar||; empty when ||g_bar|| = 0.
    std::optional<double> rel_to_inexact;
};

ErrorCertificate gradient_error_certificate(const AffineStateSystem& problem, const ControlVector& z,
                                            const GradientEstimate& est);

/// One structured line `key=value ...` summarising an evaluation.
std::string diagnostics_line(const GradientEstimate& est, std::size_t iteration);

} // namespace deco::adjoint
