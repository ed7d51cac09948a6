#pragma once

#include <Eigen/Core>

#include <cstdint>
#include <iosfwd>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "deco/linsolve.hpp"

namespace deco::problems {

using ControlVector = Vector;

enum class CaseKind { Ode, Laplace };

std::string to_string(CaseKind kind);
CaseKind case_from_string(const std::string& name);

/// Sampled observations that define the misfit objective.
///
/// Case 1 uses `sample_indices` (mesh indices in 0..M+1) and `x`.
/// Case 2 stores the flattened state index j*(M+2)+k in `sample_indices`,
/// with the node coordinates in `x` (= j h) and `y` (= k h).
struct ReferenceData {
    CaseKind kind = CaseKind::Ode;
    std::size_t grid_size = 0;
    std::vector<std::size_t> sample_indices;
    Vector x;
    Vector y;
    Vector reference_values;
    ControlVector z_ref;
    double alpha = 0.0;

    /// Throws std::invalid_argument on inconsistent lengths or non-finite values.
    void validate() const;

    /// Plain-text table: '#' header lines (kind, M, alpha, z_ref), then one
    /// row per sample. Values are written with 17 significant digits so a
    /// read-back reproduces them exactly.
    void write_table(std::ostream& out) const;
    static ReferenceData read_table(std::istream& in);
};

// --- Case 1: 1-D advection-diffusion-reaction BVP -------------------------

inline constexpr std::size_t kCase1Controls = 8;

struct Case1Stencil {
    double dx;
    double a;  // sub-diagonal
    double b;  // diagonal
    double c;  // super-diagonal
};

Case1Stencil case1_stencil(const ControlVector& z, std::size_t M);

struct Case1System {
    linsolve::TridiagonalSystem A;
    Vector b;
};

/// Rows 0 and M+1 are identity with b entries z6 and z7; interior row i
/// carries the stencil with b_i = z3 + z4 x_i + z5 x_i^2, x_i = i dx.
Case1System build_case1_system(const ControlVector& z, std::size_t M);

/// Empty when z0 >= |z1| / (2(M+1)) and z2 < 0 (diagonal dominance holds);
/// otherwise a human-readable description of the violation.
std::optional<std::string> case1_admissibility_warning(const ControlVector& z, std::size_t M);

/// (M+2) x 8 Jacobian of R(z, y) = A(z) y - b(z) with respect to z.
Eigen::MatrixXd case1_partial_R_wrt_z(const ControlVector& z, std::span<const double> y, std::size_t M);

double case1_objective(const ControlVector& z, std::span<const double> y, const ReferenceData& ref);

/// Closed-form solution of z0 u'' + z1 u' + z2 u = z3 + z4 x + z5 x^2,
/// u(0) = z6, u(1) = z7. Requires z2 != 0 and z1^2 - 4 z0 z2 > 0.
double case1_analytic_solution(double x, const ControlVector& z);

/// n_P targets at j/(n_P-1), j = 0..n_P-1, snapped to the nearest node.
ReferenceData generate_case1_reference(std::size_t M, std::size_t n_points, const ControlVector& z_ref, double alpha);

// --- Case 2: Laplace equation on the unit square ---------------------------

/// Number of Latin-hypercube samples, 4(M+1)+2.
std::size_t case2_sample_count(std::size_t M);

struct Case2System {
    linsolve::SparseMatrix A;
    Vector b;
};

/// Boundary value on the right edge (x = 1), f(t) = sum_i z_i t^i.
double case2_boundary_value(const ControlVector& z, double t);

/// b(z) alone; A is independent of z and equals linsolve::laplace_matrix(M).
Vector case2_rhs(const ControlVector& z, std::size_t M);
Case2System build_case2_system(const ControlVector& z, std::size_t M);

/// (M+2)^2 x m Jacobian of R with respect to z. Only right-edge rows are
/// nonzero, with entry -(k h)^i.
Eigen::MatrixXd case2_partial_R_wrt_z(const ControlVector& z, std::size_t M);

double case2_objective(std::span<const double> y, const ReferenceData& ref);

/// Coefficients c_n = 2 int_0^1 f(t) sin(n pi t) dt, n = 1..terms.
Vector case2_sine_coefficients(const ControlVector& z, std::size_t terms);

double case2_analytic_solution(double x, double y, const ControlVector& z, std::size_t terms = 200);

/// Latin-hypercube samples snapped to distinct interior nodes; collisions
/// are redrawn from the same stream.
ReferenceData generate_case2_reference(std::size_t M, std::uint64_t seed, const ControlVector& z_ref,
                                       std::size_t terms = 200);

// --- Common interface ------------------------------------------------------

/// R(z, y) = A(z) y - b(z), with iterative and direct solvers for the
/// state and adjoint systems.
class AffineStateSystem {
public:
    virtual ~AffineStateSystem() = default;

    [[nodiscard]] virtual CaseKind kind() const = 0;
    [[nodiscard]] virtual std::size_t grid_size() const = 0;
    [[nodiscard]] virtual std::size_t state_dim() const = 0;
    [[nodiscard]] virtual std::size_t control_dim() const = 0;
    [[nodiscard]] virtual const ReferenceData& reference() const = 0;

    [[nodiscard]] virtual linsolve::SparseMatrix system_matrix(const ControlVector& z) const = 0;
    [[nodiscard]] virtual Vector rhs(const ControlVector& z) const = 0;

    [[nodiscard]] virtual Eigen::MatrixXd partial_R_wrt_z(const ControlVector& z, std::span<const double> y) const = 0;
    /// (dR/dz)^T psi without forming the Jacobian.
    [[nodiscard]] virtual Vector partial_R_transpose_apply(const ControlVector& z, std::span<const double> y,
                                                           std::span<const double> psi) const = 0;

    [[nodiscard]] virtual double objective(const ControlVector& z, std::span<const double> y) const = 0;
    virtual void objective_partials(const ControlVector& z, std::span<const double> y, Vector& grad_z,
                                    Vector& grad_y) const = 0;

    /// Iterative solves; an empty warm start means zero.
    [[nodiscard]] virtual linsolve::SolveReport solve_state(const ControlVector& z, double tol,
                                                            std::span<const double> y0) const = 0;
    [[nodiscard]] virtual linsolve::SolveReport solve_adjoint(const ControlVector& z, std::span<const double> rhs,
                                                              double tol, std::span<const double> psi0) const = 0;

    [[nodiscard]] virtual Vector solve_state_direct(const ControlVector& z) const = 0;
    [[nodiscard]] virtual Vector solve_adjoint_direct(const ControlVector& z, std::span<const double> rhs) const = 0;

    [[nodiscard]] double state_residual_norm(const ControlVector& z, std::span<const double> y) const;
    [[nodiscard]] double adjoint_residual_norm(const ControlVector& z, std::span<const double> psi,
                                               std::span<const double> rhs) const;

    /// F~(z) with the state from a direct solve.
    [[nodiscard]] double reduced_objective(const ControlVector& z) const;
};

class Case1Problem final : public AffineStateSystem {
public:
    Case1Problem(std::size_t M, ReferenceData ref);

    [[nodiscard]] CaseKind kind() const override { return CaseKind::Ode; }
    [[nodiscard]] std::size_t grid_size() const override { return M_; }
    [[nodiscard]] std::size_t state_dim() const override { return M_ + 2; }
    [[nodiscard]] std::size_t control_dim() const override { return kCase1Controls; }
    [[nodiscard]] const ReferenceData& reference() const override { return ref_; }

    [[nodiscard]] linsolve::SparseMatrix system_matrix(const ControlVector& z) const override;
    [[nodiscard]] Vector rhs(const ControlVector& z) const override;
    [[nodiscard]] Eigen::MatrixXd partial_R_wrt_z(const ControlVector& z, std::span<const double> y) const override;
    [[nodiscard]] Vector partial_R_transpose_apply(const ControlVector& z, std::span<const double> y,
                                                   std::span<const double> psi) const override;
    [[nodiscard]] double objective(const ControlVector& z, std::span<const double> y) const override;
    void objective_partials(const ControlVector& z, std::span<const double> y, Vector& grad_z,
                            Vector& grad_y) const override;
    [[nodiscard]] linsolve::SolveReport solve_state(const ControlVector& z, double tol,
                                                    std::span<const double> y0) const override;
    [[nodiscard]] linsolve::SolveReport solve_adjoint(const ControlVector& z, std::span<const double> rhs,
                                                      double tol, std::span<const double> psi0) const override;
    [[nodiscard]] Vector solve_state_direct(const ControlVector& z) const override;
    [[nodiscard]] Vector solve_adjoint_direct(const ControlVector& z, std::span<const double> rhs) const override;

private:
    std::size_t M_;
    ReferenceData ref_;
};

struct Case2SolverOptions {
    /// Peaceman-Rachford parameters cycled per sweep pair; 1 means the
    /// single parameter linsolve::adi_parameter(M).
    std::size_t adi_parameter_count = 8;
    // Warm-started adjoint solves rarely need more than one cycle of 20.
    std::size_t gmres_restart = 20;
    /// SSOR relaxation; 0 selects linsolve::laplace_sor_omega(M).
    double ssor_omega = 0.0;
};

class Case2Problem final : public AffineStateSystem {
public:
    Case2Problem(std::size_t M, ReferenceData ref, Case2SolverOptions options = {});
    ~Case2Problem() override;
    Case2Problem(const Case2Problem&) = delete;
    Case2Problem& operator=(const Case2Problem&) = delete;

    [[nodiscard]] CaseKind kind() const override { return CaseKind::Laplace; }
    [[nodiscard]] std::size_t grid_size() const override { return M_; }
    [[nodiscard]] std::size_t state_dim() const override { return (M_ + 2) * (M_ + 2); }
    [[nodiscard]] std::size_t control_dim() const override { return ref_.z_ref.size(); }
    [[nodiscard]] const ReferenceData& reference() const override { return ref_; }

    [[nodiscard]] linsolve::SparseMatrix system_matrix(const ControlVector& z) const override;
    [[nodiscard]] Vector rhs(const ControlVector& z) const override;
    [[nodiscard]] Eigen::MatrixXd partial_R_wrt_z(const ControlVector& z, std::span<const double> y) const override;
    [[nodiscard]] Vector partial_R_transpose_apply(const ControlVector& z, std::span<const double> y,
                                                   std::span<const double> psi) const override;
    [[nodiscard]] double objective(const ControlVector& z, std::span<const double> y) const override;
    void objective_partials(const ControlVector& z, std::span<const double> y, Vector& grad_z,
                            Vector& grad_y) const override;
    [[nodiscard]] linsolve::SolveReport solve_state(const ControlVector& z, double tol,
                                                    std::span<const double> y0) const override;
    [[nodiscard]] linsolve::SolveReport solve_adjoint(const ControlVector& z, std::span<const double> rhs,
                                                      double tol, std::span<const double> psi0) const override;
    [[nodiscard]] Vector solve_state_direct(const ControlVector& z) const override;
    [[nodiscard]] Vector solve_adjoint_direct(const ControlVector& z, std::span<const double> rhs) const override;

    [[nodiscard]] const Case2SolverOptions& options() const noexcept { return options_; }

private:
    struct DirectFactor;

    std::size_t M_;
    ReferenceData ref_;
    Case2SolverOptions options_;
    linsolve::SparseMatrix A_;
    linsolve::SparseMatrix At_;
    Vector adi_params_;
    std::unique_ptr<linsolve::SsorPreconditioner> precond_;
    std::unique_ptr<DirectFactor> direct_;
};

/// Convenience constructors with the benchmark defaults.
std::unique_ptr<AffineStateSystem> make_case1_problem(std::size_t M, std::size_t n_points = 12,
                                                      double alpha = 1.0);
std::unique_ptr<AffineStateSystem> make_case2_problem(std::size_t M, std::uint64_t seed,
                                                      Case2SolverOptions options = {});

ControlVector case1_reference_control();
ControlVector case2_reference_control();

} // namespace deco::problems
