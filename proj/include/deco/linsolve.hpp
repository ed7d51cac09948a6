#pragma once

#include <cstddef>
#include <memory>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace deco {

using Vector = std::vector<double>;

class SolverError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class SingularSystemError : public SolverError {
public:
    using SolverError::SolverError;
};

double norm2(std::span<const double> v);
double dot(std::span<const double> a, std::span<const double> b);

} // namespace deco

namespace deco::linsolve {

inline constexpr std::size_t kDefaultSorMaxIter = 1'000'000;
inline constexpr std::size_t kDefaultAdiMaxSweeps = 10'000;
inline constexpr std::size_t kDefaultGmresMaxOuter = 1'000;
inline constexpr std::size_t kDefaultGmresRestart = 50;

/// Tridiagonal matrix. lower[i] = A(i+1, i), upper[i] = A(i, i+1).
struct TridiagonalSystem {
    Vector lower;
    Vector diag;
    Vector upper;

    TridiagonalSystem() = default;
    TridiagonalSystem(Vector lower_, Vector diag_, Vector upper_);

    [[nodiscard]] std::size_t size() const noexcept { return diag.size(); }

    /// Throws std::invalid_argument if the band lengths are inconsistent.
    void validate() const;

    [[nodiscard]] bool strictly_diagonally_dominant() const;
    [[nodiscard]] TridiagonalSystem transposed() const;

    void apply(std::span<const double> x, std::span<double> y) const;
    [[nodiscard]] Vector apply(std::span<const double> x) const;
    [[nodiscard]] double residual_norm(std::span<const double> x, std::span<const double> rhs) const;
};

struct Triplet {
    std::size_t row;
    std::size_t col;
    double value;
};

/// Square matrix in compressed sparse row layout.
class SparseMatrix {
public:
    SparseMatrix() = default;

    /// Entries must be grouped by row; duplicates and out-of-range indices throw.
    static SparseMatrix from_triplets(std::size_t n, std::span<const Triplet> entries);

    [[nodiscard]] std::size_t size() const noexcept { return n_; }
    [[nodiscard]] std::size_t nonzeros() const noexcept { return values_.size(); }

    void apply(std::span<const double> x, std::span<double> y) const;
    [[nodiscard]] Vector apply(std::span<const double> x) const;
    [[nodiscard]] double residual_norm(std::span<const double> x, std::span<const double> rhs) const;

    [[nodiscard]] SparseMatrix transposed() const;
    [[nodiscard]] std::vector<Triplet> triplets() const;

    [[nodiscard]] std::span<const std::size_t> row_ptr() const noexcept { return row_ptr_; }
    [[nodiscard]] std::span<const std::size_t> col_index() const noexcept { return col_; }
    [[nodiscard]] std::span<const double> values() const noexcept { return values_; }

private:
    std::size_t n_ = 0;
    std::vector<std::size_t> row_ptr_{0};
    std::vector<std::size_t> col_;
    Vector values_;
};

struct SolveReport {
    Vector solution;
    double residual_norm = 0.0;  // ||rhs - A x||_2
    std::size_t iterations = 0;
    bool converged = false;
};

/// Direct elimination. Throws SingularSystemError on a zero pivot.
Vector thomas_solve(const TridiagonalSystem& sys, std::span<const double> rhs);

/// Successive over-relaxation; stops at the first sweep whose true residual
/// norm is <= tol. An empty x0 means a zero initial guess.
SolveReport sor_solve(const TridiagonalSystem& sys,
                      std::span<const double> rhs,
                      double tol,
                      double omega,
                      std::span<const double> x0 = {},
                      std::size_t max_iter = kDefaultSorMaxIter);

/// Jacobi spectral radius of the interior Toeplitz block
/// 2 sqrt(|a c|) / |b| cos(pi / (n + 1)).
double jacobi_spectral_radius(const TridiagonalSystem& sys);

/// Relaxation factor 2 / (1 + sqrt(1 - rho^2)) from the interior Toeplitz
/// block; returns 1 when rho is 0 or >= 1.
double optimal_sor_omega(const TridiagonalSystem& sys);

/// Peaceman-Rachford parameter used by adi_laplace_solve.
double adi_parameter(std::size_t grid_size);

/// 2 / (1 + sin(pi h)), h = 1/(M+1): optimal point SOR factor for the
/// five-point Laplacian, whose Jacobi spectral radius is cos(pi h).
double laplace_sor_omega(std::size_t grid_size);

/// `count` Peaceman-Rachford parameters spaced geometrically over the
/// eigenvalue range [4 sin^2(pi h/2), 4 cos^2(pi h/2)] of the 1-D second
/// difference, h = 1/(M+1). Used cyclically, one per sweep pair.
Vector cyclic_adi_parameters(std::size_t grid_size, std::size_t count);

/// Solves the five-point Laplace system on the (M+2)^2 grid with identity
/// rows on the boundary. State index is j*(M+2)+k with j the x index.
/// `rhs` carries the Dirichlet values on boundary nodes and the unscaled
/// source (zero for Laplace) on interior nodes. An empty `params` means the
/// single parameter adi_parameter(M) on every sweep pair.
SolveReport adi_laplace_solve(std::size_t grid_size,
                              std::span<const double> rhs,
                              double tol,
                              std::span<const double> x0 = {},
                              std::size_t max_sweeps = kDefaultAdiMaxSweeps,
                              std::span<const double> params = {});

/// Assembles the matrix that adi_laplace_solve inverts.
SparseMatrix laplace_matrix(std::size_t grid_size);

class Preconditioner {
public:
    virtual ~Preconditioner() = default;
    /// out = M^{-1} in
    virtual void apply(std::span<const double> in, std::span<double> out) const = 0;
};

class IdentityPreconditioner final : public Preconditioner {
public:
    void apply(std::span<const double> in, std::span<double> out) const override;
};

/// One forward SOR sweep from a zero initial guess, i.e. (D/omega + L)^{-1}.
class SorPreconditioner final : public Preconditioner {
public:
    SorPreconditioner(const SparseMatrix& mat, double omega);
    void apply(std::span<const double> in, std::span<double> out) const override;
    [[nodiscard]] double omega() const noexcept { return omega_; }

private:
    const SparseMatrix* mat_;
    Vector diag_;
    double omega_;
};

/// One symmetric SOR sweep (forward then backward) from a zero initial
/// guess: M = omega/(2-omega) (D/omega + L) D^{-1} (D/omega + U).
class SsorPreconditioner final : public Preconditioner {
public:
    SsorPreconditioner(const SparseMatrix& mat, double omega);
    void apply(std::span<const double> in, std::span<double> out) const override;
    [[nodiscard]] double omega() const noexcept { return omega_; }

private:
    Vector diag_;
    std::vector<std::size_t> lower_ptr_, lower_col_, upper_ptr_, upper_col_;
    Vector lower_val_, upper_val_;
    Vector w_over_d_;
    double omega_;
};

/// Right-preconditioned restarted GMRES. The convergence test uses the
/// residual of the unpreconditioned system, recomputed explicitly at the
/// end of each cycle. Stagnation over a full cycle stops with converged=false.
SolveReport gmres_solve(const SparseMatrix& mat,
                        std::span<const double> rhs,
                        double tol,
                        std::size_t restart = kDefaultGmresRestart,
                        const Preconditioner* precond = nullptr,
                        std::span<const double> x0 = {},
                        std::size_t max_outer = kDefaultGmresMaxOuter);

} // namespace deco::linsolve
