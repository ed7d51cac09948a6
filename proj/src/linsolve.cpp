#include "deco/linsolve.hpp"

#include <Eigen/Core>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace deco {

namespace {
using ConstMap = Eigen::Map<const Eigen::VectorXd>;
ConstMap as_eigen(std::span<const double> v) {
    return ConstMap(v.data(), static_cast<Eigen::Index>(v.size()));
}
} // namespace

double norm2(std::span<const double> v) {
    return std::sqrt(as_eigen(v).squaredNorm());
}

double dot(std::span<const double> a, std::span<const double> b) {
    return as_eigen(a).dot(as_eigen(b));
}

} // namespace deco

namespace deco::linsolve {

// ---------------------------------------------------------------------------
// TridiagonalSystem
// ---------------------------------------------------------------------------

TridiagonalSystem::TridiagonalSystem(Vector lower_, Vector diag_, Vector upper_)
    : lower(std::move(lower_)), diag(std::move(diag_)), upper(std::move(upper_)) {
    validate();
}

void TridiagonalSystem::validate() const {
    const std::size_t n = diag.size();
    if (n == 0) throw std::invalid_argument("tridiagonal system must have n >= 1");
    if (lower.size() != n - 1 || upper.size() != n - 1)
        throw std::invalid_argument("tridiagonal band lengths must be n-1");
}

bool TridiagonalSystem::strictly_diagonally_dominant() const {
    const std::size_t n = size();
    for (std::size_t i = 0; i < n; ++i) {
        double off = 0.0;
        if (i > 0) off += std::abs(lower[i - 1]);
        if (i + 1 < n) off += std::abs(upper[i]);
        if (!(std::abs(diag[i]) > off)) return false;
    }
    return true;
}

TridiagonalSystem TridiagonalSystem::transposed() const {
    return TridiagonalSystem(upper, diag, lower);
}

void TridiagonalSystem::apply(std::span<const double> x, std::span<double> y) const {
    const std::size_t n = size();
    if (n == 1) {
        y[0] = diag[0] * x[0];
        return;
    }
    y[0] = diag[0] * x[0] + upper[0] * x[1];
    for (std::size_t i = 1; i + 1 < n; ++i)
        y[i] = lower[i - 1] * x[i - 1] + diag[i] * x[i] + upper[i] * x[i + 1];
    y[n - 1] = lower[n - 2] * x[n - 2] + diag[n - 1] * x[n - 1];
}

Vector TridiagonalSystem::apply(std::span<const double> x) const {
    Vector y(size());
    apply(x, y);
    return y;
}

double TridiagonalSystem::residual_norm(std::span<const double> x, std::span<const double> rhs) const {
    Vector ax = apply(x);
    double s = 0.0;
    for (std::size_t i = 0; i < ax.size(); ++i) {
        const double r = rhs[i] - ax[i];
        s += r * r;
    }
    return std::sqrt(s);
}

// ---------------------------------------------------------------------------
// SparseMatrix
// ---------------------------------------------------------------------------

SparseMatrix SparseMatrix::from_triplets(std::size_t n, std::span<const Triplet> entries) {
    SparseMatrix m;
    m.n_ = n;
    m.row_ptr_.assign(n + 1, 0);
    m.col_.reserve(entries.size());
    m.values_.reserve(entries.size());

    std::size_t current_row = 0;
    std::size_t row_start = 0;
    for (const auto& t : entries) {
        if (t.row >= n || t.col >= n)
            throw std::invalid_argument("sparse entry index out of range");
        if (t.row < current_row)
            throw std::invalid_argument("sparse entries must be grouped by row");
        while (current_row < t.row) {
            m.row_ptr_[++current_row] = m.col_.size();
            row_start = m.col_.size();
        }
        for (std::size_t p = row_start; p < m.col_.size(); ++p) {
            if (m.col_[p] == t.col) throw std::invalid_argument("duplicate sparse entry");
        }
        m.col_.push_back(t.col);
        m.values_.push_back(t.value);
    }
    while (current_row < n) m.row_ptr_[++current_row] = m.col_.size();
    return m;
}

void SparseMatrix::apply(std::span<const double> x, std::span<double> y) const {
    for (std::size_t i = 0; i < n_; ++i) {
        double s = 0.0;
        for (std::size_t p = row_ptr_[i]; p < row_ptr_[i + 1]; ++p) s += values_[p] * x[col_[p]];
        y[i] = s;
    }
}

Vector SparseMatrix::apply(std::span<const double> x) const {
    Vector y(n_);
    apply(x, y);
    return y;
}

double SparseMatrix::residual_norm(std::span<const double> x, std::span<const double> rhs) const {
    double s = 0.0;
    for (std::size_t i = 0; i < n_; ++i) {
        double r = rhs[i];
        for (std::size_t p = row_ptr_[i]; p < row_ptr_[i + 1]; ++p) r -= values_[p] * x[col_[p]];
        s += r * r;
    }
    return std::sqrt(s);
}

std::vector<Triplet> SparseMatrix::triplets() const {
    std::vector<Triplet> out;
    out.reserve(values_.size());
    for (std::size_t i = 0; i < n_; ++i)
        for (std::size_t p = row_ptr_[i]; p < row_ptr_[i + 1]; ++p) out.push_back({i, col_[p], values_[p]});
    return out;
}

SparseMatrix SparseMatrix::transposed() const {
    SparseMatrix t;
    t.n_ = n_;
    t.row_ptr_.assign(n_ + 1, 0);
    for (std::size_t c : col_) ++t.row_ptr_[c + 1];
    for (std::size_t i = 0; i < n_; ++i) t.row_ptr_[i + 1] += t.row_ptr_[i];
    t.col_.resize(col_.size());
    t.values_.resize(values_.size());
    std::vector<std::size_t> fill(t.row_ptr_.begin(), t.row_ptr_.end() - 1);
    for (std::size_t i = 0; i < n_; ++i) {
        for (std::size_t p = row_ptr_[i]; p < row_ptr_[i + 1]; ++p) {
            const std::size_t dst = fill[col_[p]]++;
            t.col_[dst] = i;
            t.values_[dst] = values_[p];
        }
    }
    return t;
}

// ---------------------------------------------------------------------------
// Tridiagonal solvers
// ---------------------------------------------------------------------------

Vector thomas_solve(const TridiagonalSystem& sys, std::span<const double> rhs) {
    sys.validate();
    const std::size_t n = sys.size();
    if (rhs.size() != n) throw std::invalid_argument("thomas_solve: rhs length mismatch");

    Vector cp(n);
    Vector x(n);
    double den = sys.diag[0];
    if (den == 0.0 || !std::isfinite(den)) throw SingularSystemError("thomas_solve: zero pivot at row 0");
    cp[0] = n > 1 ? sys.upper[0] / den : 0.0;
    x[0] = rhs[0] / den;
    for (std::size_t i = 1; i < n; ++i) {
        den = sys.diag[i] - sys.lower[i - 1] * cp[i - 1];
        if (den == 0.0 || !std::isfinite(den))
            throw SingularSystemError("thomas_solve: zero pivot at row " + std::to_string(i));
        cp[i] = i + 1 < n ? sys.upper[i] / den : 0.0;
        x[i] = (rhs[i] - sys.lower[i - 1] * x[i - 1]) / den;
    }
    for (std::size_t i = n - 1; i-- > 0;) x[i] -= cp[i] * x[i + 1];
    return x;
}

SolveReport sor_solve(const TridiagonalSystem& sys,
                      std::span<const double> rhs,
                      double tol,
                      double omega,
                      std::span<const double> x0,
                      std::size_t max_iter) {
    sys.validate();
    const std::size_t n = sys.size();
    if (rhs.size() != n) throw std::invalid_argument("sor_solve: rhs length mismatch");
    if (!(tol > 0.0)) throw std::invalid_argument("sor_solve: tol must be positive");
    if (!(omega > 0.0 && omega < 2.0)) throw std::invalid_argument("sor_solve: omega must lie in (0, 2)");
    if (!x0.empty() && x0.size() != n) throw std::invalid_argument("sor_solve: x0 length mismatch");
    for (double d : sys.diag)
        if (d == 0.0) throw SingularSystemError("sor_solve: zero diagonal entry");

    SolveReport rep;
    rep.solution.assign(n, 0.0);
    if (!x0.empty()) std::copy(x0.begin(), x0.end(), rep.solution.begin());
    double* x = rep.solution.data();
    const double* lo = sys.lower.data();
    const double* di = sys.diag.data();
    const double* up = sys.upper.data();

    rep.residual_norm = sys.residual_norm(rep.solution, rhs);
    if (rep.residual_norm <= tol) {
        rep.converged = true;
        return rep;
    }
    if (n == 1) {
        x[0] = rhs[0] / di[0];
        rep.iterations = 1;
        rep.residual_norm = std::abs(rhs[0] - di[0] * x[0]);
        rep.converged = rep.residual_norm <= tol;
        return rep;
    }

    // x_i <- (1 - omega) x_i + w_i (b_i - u_i x_{i+1}) - a_i x_{i-1}, with
    // w_i = omega / d_i and a_i = w_i l_{i-1}: only the last product sits on
    // the sweep's serial dependency chain.
    Vector w(n), a(n, 0.0);
    for (std::size_t i = 0; i < n; ++i) w[i] = omega / di[i];
    for (std::size_t i = 1; i < n; ++i) a[i] = w[i] * lo[i - 1];
    const double keep = 1.0 - omega;
    const double tol2 = tol * tol;
    for (std::size_t it = 1; it <= max_iter; ++it) {
        // Residual of row i-1 is final once x[i] has been updated, so the
        // true residual of the new iterate is accumulated in the same pass.
        double res2 = 0.0;
        x[0] = keep * x[0] + w[0] * (rhs[0] - up[0] * x[1]);
        x[1] = keep * x[1] + w[1] * (rhs[1] - (n > 2 ? up[1] * x[2] : 0.0)) - a[1] * x[0];
        {
            const double r = rhs[0] - di[0] * x[0] - up[0] * x[1];
            res2 += r * r;
        }
        for (std::size_t i = 2; i + 1 < n; ++i) {
            x[i] = keep * x[i] + w[i] * (rhs[i] - up[i] * x[i + 1]) - a[i] * x[i - 1];
            const double r = rhs[i - 1] - lo[i - 2] * x[i - 2] - di[i - 1] * x[i - 1] - up[i - 1] * x[i];
            res2 += r * r;
        }
        if (n > 2) {
            x[n - 1] = keep * x[n - 1] + w[n - 1] * rhs[n - 1] - a[n - 1] * x[n - 2];
            const std::size_t i = n - 2;
            const double r = rhs[i] - lo[i - 1] * x[i - 1] - di[i] * x[i] - up[i] * x[i + 1];
            res2 += r * r;
        }
        {
            const double rl = rhs[n - 1] - lo[n - 2] * x[n - 2] - di[n - 1] * x[n - 1];
            res2 += rl * rl;
        }
        if (!std::isfinite(res2)) {
            rep.iterations = it;
            rep.residual_norm = std::sqrt(res2);
            rep.converged = false;
            return rep;
        }
        if (res2 <= tol2) {
            rep.iterations = it;
            rep.residual_norm = std::sqrt(res2);
            rep.converged = true;
            return rep;
        }
        rep.residual_norm = std::sqrt(res2);
        rep.iterations = it;
    }
    rep.converged = false;
    return rep;
}

namespace {

bool close_rel(double a, double b) {
    return std::abs(a - b) <= 1e-12 * std::max({1.0, std::abs(a), std::abs(b)});
}

struct InteriorStencil {
    double a = 0.0, b = 0.0, c = 0.0;
    std::size_t rows = 0;
};

InteriorStencil interior_stencil(const TridiagonalSystem& sys) {
    sys.validate();
    const std::size_t n = sys.size();
    InteriorStencil st;
    if (n == 1) {
        st.b = sys.diag[0];
        st.rows = 1;
        return st;
    }
    const std::size_t mid = std::clamp<std::size_t>(n / 2, 1, n - 1);
    st.a = sys.lower[mid - 1];
    st.b = sys.diag[mid];
    st.c = mid + 1 < n ? sys.upper[mid] : sys.upper[mid - 1];
    for (std::size_t i = 0; i < n; ++i)
        if (close_rel(sys.diag[i], st.b)) ++st.rows;
    return st;
}

} // namespace

double jacobi_spectral_radius(const TridiagonalSystem& sys) {
    const InteriorStencil st = interior_stencil(sys);
    if (st.b == 0.0) return std::numeric_limits<double>::infinity();
    return 2.0 * std::sqrt(std::abs(st.a * st.c)) / std::abs(st.b) *
           std::cos(std::numbers::pi / static_cast<double>(st.rows + 1));
}

double optimal_sor_omega(const TridiagonalSystem& sys) {
    const InteriorStencil st = interior_stencil(sys);
    const double rho = jacobi_spectral_radius(sys);
    if (!(rho > 0.0) || !(rho < 1.0)) return 1.0;
    if (st.a * st.c < 0.0) {
        // Purely imaginary Jacobi spectrum.
        return 2.0 / (1.0 + std::sqrt(1.0 + rho * rho));
    }
    return 2.0 / (1.0 + std::sqrt(1.0 - rho * rho));
}

// ---------------------------------------------------------------------------
// ADI for the five-point Laplacian
// ---------------------------------------------------------------------------

double adi_parameter(std::size_t grid_size) {
    return 2.0 * std::sin(std::numbers::pi / static_cast<double>(grid_size + 1));
}

namespace {

double laplace_residual_norm(std::size_t M, std::span<const double> u, std::span<const double> rhs) {
    const std::size_t N = M + 2;
    double s = 0.0;
    for (std::size_t j = 0; j < N; ++j) {
        for (std::size_t k = 0; k < N; ++k) {
            const std::size_t p = j * N + k;
            double r;
            if (j == 0 || k == 0 || j == N - 1 || k == N - 1) {
                r = rhs[p] - u[p];
            } else {
                r = rhs[p] - (u[p - N] + u[p + N] + u[p - 1] + u[p + 1] - 4.0 * u[p]);
            }
            s += r * r;
        }
    }
    return std::sqrt(s);
}

} // namespace

SparseMatrix laplace_matrix(std::size_t M) {
    const std::size_t N = M + 2;
    std::vector<Triplet> t;
    t.reserve(5 * M * M + 4 * N);
    for (std::size_t j = 0; j < N; ++j) {
        for (std::size_t k = 0; k < N; ++k) {
            const std::size_t p = j * N + k;
            if (j == 0 || k == 0 || j == N - 1 || k == N - 1) {
                t.push_back({p, p, 1.0});
            } else {
                t.push_back({p, p - N, 1.0});
                t.push_back({p, p - 1, 1.0});
                t.push_back({p, p, -4.0});
                t.push_back({p, p + 1, 1.0});
                t.push_back({p, p + N, 1.0});
            }
        }
    }
    std::sort(t.begin(), t.end(), [](const Triplet& a, const Triplet& b) {
        return a.row != b.row ? a.row < b.row : a.col < b.col;
    });
    return SparseMatrix::from_triplets(N * N, t);
}

double laplace_sor_omega(std::size_t grid_size) {
    if (grid_size == 0) throw std::invalid_argument("laplace_sor_omega: grid_size must be positive");
    return 2.0 / (1.0 + std::sin(std::numbers::pi / static_cast<double>(grid_size + 1)));
}

Vector cyclic_adi_parameters(std::size_t grid_size, std::size_t count) {
    if (grid_size == 0 || count == 0) throw std::invalid_argument("cyclic_adi_parameters: sizes must be positive");
    const double h = std::numbers::pi / static_cast<double>(2 * (grid_size + 1));
    const double lo = 4.0 * std::sin(h) * std::sin(h);
    const double hi = 4.0 * std::cos(h) * std::cos(h);
    Vector out(count);
    for (std::size_t i = 0; i < count; ++i) {
        const double frac = (static_cast<double>(i) + 0.5) / static_cast<double>(count);
        out[i] = lo * std::pow(hi / lo, frac);
    }
    return out;
}

SolveReport adi_laplace_solve(std::size_t M,
                              std::span<const double> rhs,
                              double tol,
                              std::span<const double> x0,
                              std::size_t max_sweeps,
                              std::span<const double> params) {
    if (M == 0) throw std::invalid_argument("adi_laplace_solve: grid_size must be positive");
    if (!(tol > 0.0)) throw std::invalid_argument("adi_laplace_solve: tol must be positive");
    const std::size_t N = M + 2;
    if (rhs.size() != N * N) throw std::invalid_argument("adi_laplace_solve: rhs length mismatch");
    if (!x0.empty() && x0.size() != N * N) throw std::invalid_argument("adi_laplace_solve: x0 length mismatch");

    SolveReport rep;
    rep.solution.assign(N * N, 0.0);
    if (!x0.empty()) std::copy(x0.begin(), x0.end(), rep.solution.begin());
    Vector& u = rep.solution;
    for (std::size_t j = 0; j < N; ++j) {
        for (std::size_t k = 0; k < N; ++k) {
            if (j == 0 || k == 0 || j == N - 1 || k == N - 1) u[j * N + k] = rhs[j * N + k];
        }
    }

    rep.residual_norm = laplace_residual_norm(M, u, rhs);
    if (rep.residual_norm <= tol) {
        rep.converged = true;
        return rep;
    }

    // Both half steps of sweep s invert tridiag(-1, rho_s + 2, -1) of order
    // M; the elimination factors depend only on rho_s and are shared by
    // every line.
    Vector rhos(params.begin(), params.end());
    if (rhos.empty()) rhos.push_back(adi_parameter(M));
    std::vector<Vector> factors;
    factors.reserve(rhos.size());
    for (double rho : rhos) {
        if (!(rho > 0.0) || !std::isfinite(rho)) throw std::invalid_argument("adi_laplace_solve: parameters must be positive");
        Vector inv_den(M + 1, 0.0);  // index 1..M
        double cprev = 0.0;
        for (std::size_t j = 1; j <= M; ++j) {
            inv_den[j] = 1.0 / (rho + 2.0 + cprev);
            cprev = -inv_den[j];
        }
        factors.push_back(std::move(inv_den));
    }

    Vector half(u);  // boundary entries stay equal to the Dirichlet data
    Vector line(M + 2, 0.0);

    for (std::size_t sweep = 1; sweep <= max_sweeps; ++sweep) {
        const double rho = rhos[(sweep - 1) % rhos.size()];
        const Vector& inv_den = factors[(sweep - 1) % rhos.size()];
        // x-direction: (rho - dxx) half = (rho + dyy) u - f, all lines at once.
        for (std::size_t j = 1; j <= M; ++j) {
            const double* uj = &u[j * N];
            double* hj = &half[j * N];
            const double* hprev = &half[(j - 1) * N];
            const double* fj = &rhs[j * N];
            const double w = inv_den[j];
            for (std::size_t k = 1; k <= M; ++k) {
                double r = rho * uj[k] + (uj[k - 1] - 2.0 * uj[k] + uj[k + 1]) - fj[k];
                if (j == 1) r += u[k];
                if (j == M) r += u[(M + 1) * N + k];
                const double prev = j == 1 ? 0.0 : hprev[k];
                hj[k] = (r + prev) * w;
            }
        }
        for (std::size_t j = M - 1; j >= 1; --j) {
            double* hj = &half[j * N];
            const double* hnext = &half[(j + 1) * N];
            const double w = inv_den[j];
            for (std::size_t k = 1; k <= M; ++k) hj[k] += w * hnext[k];
        }

        // y-direction: (rho - dyy) u = (rho + dxx) half - f, line by line.
        for (std::size_t j = 1; j <= M; ++j) {
            const double* hj = &half[j * N];
            const double* hm = &half[(j - 1) * N];
            const double* hp = &half[(j + 1) * N];
            const double* fj = &rhs[j * N];
            double* uj = &u[j * N];
            double prev = 0.0;
            for (std::size_t k = 1; k <= M; ++k) {
                double r = rho * hj[k] + (hm[k] - 2.0 * hj[k] + hp[k]) - fj[k];
                if (k == 1) r += uj[0];
                if (k == M) r += uj[M + 1];
                prev = (r + prev) * inv_den[k];
                line[k] = prev;
            }
            uj[M] = line[M];
            for (std::size_t k = M - 1; k >= 1; --k) uj[k] = line[k] + inv_den[k] * uj[k + 1];
        }

        rep.iterations = sweep;
        rep.residual_norm = laplace_residual_norm(M, u, rhs);
        if (!std::isfinite(rep.residual_norm)) break;
        if (rep.residual_norm <= tol) {
            rep.converged = true;
            return rep;
        }
    }
    rep.converged = false;
    return rep;
}

// ---------------------------------------------------------------------------
// GMRES
// ---------------------------------------------------------------------------

void IdentityPreconditioner::apply(std::span<const double> in, std::span<double> out) const {
    std::copy(in.begin(), in.end(), out.begin());
}

SorPreconditioner::SorPreconditioner(const SparseMatrix& mat, double omega) : mat_(&mat), omega_(omega) {
    if (!(omega > 0.0 && omega < 2.0)) throw std::invalid_argument("SOR preconditioner: omega must lie in (0, 2)");
    const std::size_t n = mat.size();
    diag_.assign(n, 0.0);
    const auto rp = mat.row_ptr();
    const auto ci = mat.col_index();
    const auto vals = mat.values();
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t p = rp[i]; p < rp[i + 1]; ++p)
            if (ci[p] == i) diag_[i] = vals[p];
        if (diag_[i] == 0.0) throw SingularSystemError("SOR preconditioner: zero diagonal entry");
    }
}

void SorPreconditioner::apply(std::span<const double> in, std::span<double> out) const {
    const std::size_t n = mat_->size();
    const auto rp = mat_->row_ptr();
    const auto ci = mat_->col_index();
    const auto vals = mat_->values();
    for (std::size_t i = 0; i < n; ++i) {
        double s = in[i];
        for (std::size_t p = rp[i]; p < rp[i + 1]; ++p)
            if (ci[p] < i) s -= vals[p] * out[ci[p]];
        out[i] = omega_ * s / diag_[i];
    }
}

SsorPreconditioner::SsorPreconditioner(const SparseMatrix& mat, double omega) : omega_(omega) {
    if (!(omega > 0.0 && omega < 2.0)) throw std::invalid_argument("SSOR preconditioner: omega must lie in (0, 2)");
    const std::size_t n = mat.size();
    const auto rp = mat.row_ptr();
    const auto ci = mat.col_index();
    const auto v = mat.values();
    diag_.assign(n, 0.0);
    lower_ptr_.assign(n + 1, 0);
    upper_ptr_.assign(n + 1, 0);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t p = rp[i]; p < rp[i + 1]; ++p) {
            if (ci[p] < i) {
                lower_col_.push_back(ci[p]);
                lower_val_.push_back(v[p]);
            } else if (ci[p] > i) {
                upper_col_.push_back(ci[p]);
                upper_val_.push_back(v[p]);
            } else {
                diag_[i] = v[p];
            }
        }
        lower_ptr_[i + 1] = lower_col_.size();
        upper_ptr_[i + 1] = upper_col_.size();
    }
    for (double d : diag_)
        if (d == 0.0) throw SingularSystemError("SSOR preconditioner: zero diagonal entry");
    w_over_d_.resize(n);
    for (std::size_t i = 0; i < n; ++i) w_over_d_[i] = omega_ / diag_[i];
}

void SsorPreconditioner::apply(std::span<const double> in, std::span<double> out) const {
    const std::size_t n = diag_.size();
    for (std::size_t i = 0; i < n; ++i) {
        double s = in[i];
        for (std::size_t p = lower_ptr_[i]; p < lower_ptr_[i + 1]; ++p) s -= lower_val_[p] * out[lower_col_[p]];
        out[i] = s * w_over_d_[i];
    }
    // Middle factor D (2 - w) / w.
    const double scale = (2.0 - omega_) / omega_;
    for (std::size_t i = 0; i < n; ++i) out[i] *= scale * diag_[i];
    for (std::size_t i = n; i-- > 0;) {
        double s = out[i];
        for (std::size_t p = upper_ptr_[i]; p < upper_ptr_[i + 1]; ++p) s -= upper_val_[p] * out[upper_col_[p]];
        out[i] = s * w_over_d_[i];
    }
}

SolveReport gmres_solve(const SparseMatrix& mat,
                        std::span<const double> rhs,
                        double tol,
                        std::size_t restart,
                        const Preconditioner* precond,
                        std::span<const double> x0,
                        std::size_t max_outer) {
    const std::size_t n = mat.size();
    if (rhs.size() != n) throw std::invalid_argument("gmres_solve: rhs length mismatch");
    if (!(tol > 0.0)) throw std::invalid_argument("gmres_solve: tol must be positive");
    if (restart == 0) throw std::invalid_argument("gmres_solve: restart must be >= 1");
    if (!x0.empty() && x0.size() != n) throw std::invalid_argument("gmres_solve: x0 length mismatch");

    IdentityPreconditioner identity;
    const Preconditioner& pc = precond ? *precond : static_cast<const Preconditioner&>(identity);

    SolveReport rep;
    rep.solution.assign(n, 0.0);
    if (!x0.empty()) std::copy(x0.begin(), x0.end(), rep.solution.begin());
    Vector& x = rep.solution;

    const std::size_t m = restart;
    // Krylov bases grow on demand and are kept per thread: repeated solves
    // of the same size reuse them instead of reallocating.
    thread_local std::vector<Vector> V, Z;
    for (auto* basis : {&V, &Z})
        if (!basis->empty() && basis->front().size() != n) basis->clear();
    if (V.empty()) V.emplace_back(n);
    std::vector<double> H((m + 1) * m, 0.0);  // column-major, (m+1) x m
    std::vector<double> cs(m), sn(m), g(m + 1), y(m);
    Vector w(n), r(n);

    auto h = [&](std::size_t i, std::size_t j) -> double& { return H[j * (m + 1) + i]; };

    mat.apply(x, r);
    for (std::size_t i = 0; i < n; ++i) r[i] = rhs[i] - r[i];
    double beta = norm2(r);
    rep.residual_norm = beta;
    if (beta <= tol) {
        rep.converged = true;
        return rep;
    }

    for (std::size_t outer = 0; outer < max_outer; ++outer) {
        const double cycle_start = beta;
        for (std::size_t i = 0; i < n; ++i) V[0][i] = r[i] / beta;
        std::fill(g.begin(), g.end(), 0.0);
        g[0] = beta;

        std::size_t k = 0;
        for (; k < m; ++k) {
            if (Z.size() < k + 1) Z.emplace_back(n);
            if (V.size() < k + 2) V.emplace_back(n);
            pc.apply(V[k], Z[k]);
            mat.apply(Z[k], w);
            // Modified Gram-Schmidt.
            Eigen::Map<Eigen::VectorXd> we(w.data(), static_cast<Eigen::Index>(n));
            for (std::size_t i = 0; i <= k; ++i) {
                const auto vi = as_eigen(V[i]);
                const double hij = we.dot(vi);
                h(i, k) = hij;
                we -= hij * vi;
            }
            const double hnext = norm2(w);
            h(k + 1, k) = hnext;
            if (hnext > 0.0)
                for (std::size_t q = 0; q < n; ++q) V[k + 1][q] = w[q] / hnext;

            for (std::size_t i = 0; i < k; ++i) {
                const double t = cs[i] * h(i, k) + sn[i] * h(i + 1, k);
                h(i + 1, k) = -sn[i] * h(i, k) + cs[i] * h(i + 1, k);
                h(i, k) = t;
            }
            const double a = h(k, k), bb = h(k + 1, k);
            const double rr = std::hypot(a, bb);
            if (rr == 0.0) {
                cs[k] = 1.0;
                sn[k] = 0.0;
            } else {
                cs[k] = a / rr;
                sn[k] = bb / rr;
            }
            h(k, k) = rr;
            h(k + 1, k) = 0.0;
            g[k + 1] = -sn[k] * g[k];
            g[k] = cs[k] * g[k];
            ++rep.iterations;
            if (std::abs(g[k + 1]) <= tol || hnext == 0.0) {
                ++k;
                break;
            }
        }

        // Back substitution on the k x k triangle.
        for (std::size_t i = k; i-- > 0;) {
            double s = g[i];
            for (std::size_t j = i + 1; j < k; ++j) s -= h(i, j) * y[j];
            y[i] = h(i, i) != 0.0 ? s / h(i, i) : 0.0;
        }
        for (std::size_t j = 0; j < k; ++j) {
            const double yj = y[j];
            const double* zj = Z[j].data();
            for (std::size_t q = 0; q < n; ++q) x[q] += yj * zj[q];
        }

        mat.apply(x, r);
        for (std::size_t i = 0; i < n; ++i) r[i] = rhs[i] - r[i];
        beta = norm2(r);
        rep.residual_norm = beta;
        if (!std::isfinite(beta)) break;
        if (beta <= tol) {
            rep.converged = true;
            return rep;
        }
        if (!(beta < cycle_start)) break;  // stagnation
    }
    rep.converged = false;
    return rep;
}

} // namespace deco::linsolve
