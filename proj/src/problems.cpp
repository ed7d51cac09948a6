#include "deco/problems.hpp"

#include <Eigen/SparseCore>
#include <Eigen/SparseLU>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <istream>
#include <mutex>
#include <numbers>
#include <ostream>
#include <set>
#include <sstream>
#include <stdexcept>

#include "deco/rng.hpp"

namespace deco::problems {

using linsolve::SolveReport;
using linsolve::SparseMatrix;
using linsolve::TridiagonalSystem;
using linsolve::Triplet;

std::string to_string(CaseKind kind) {
    return kind == CaseKind::Ode ? "ode" : "laplace";
}

CaseKind case_from_string(const std::string& name) {
    if (name == "ode") return CaseKind::Ode;
    if (name == "laplace") return CaseKind::Laplace;
    throw std::invalid_argument("unknown case '" + name + "' (expected ode or laplace)");
}

// ---------------------------------------------------------------------------
// ReferenceData
// ---------------------------------------------------------------------------

void ReferenceData::validate() const {
    const std::size_t n = sample_indices.size();
    if (reference_values.size() != n || x.size() != n)
        throw std::invalid_argument("reference data: inconsistent sample lengths");
    if (kind == CaseKind::Laplace && y.size() != n)
        throw std::invalid_argument("reference data: missing y coordinates");
    const std::size_t N = grid_size + 2;
    const std::size_t limit = kind == CaseKind::Ode ? N : N * N;
    for (std::size_t idx : sample_indices)
        if (idx >= limit) throw std::invalid_argument("reference data: sample index out of range");
    for (double v : reference_values)
        if (!std::isfinite(v)) throw std::invalid_argument("reference data: non-finite reference value");
    if (!std::isfinite(alpha)) throw std::invalid_argument("reference data: non-finite alpha");
}

namespace {

std::string fmt17(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

} // namespace

void ReferenceData::write_table(std::ostream& out) const {
    validate();
    out << "# kind " << to_string(kind) << '\n';
    out << "# grid_size " << grid_size << '\n';
    out << "# alpha " << fmt17(alpha) << '\n';
    out << "# z_ref";
    for (double v : z_ref) out << ' ' << fmt17(v);
    out << '\n';
    if (kind == CaseKind::Ode) {
        out << "# index x value\n";
        for (std::size_t s = 0; s < sample_indices.size(); ++s)
            out << sample_indices[s] << ' ' << fmt17(x[s]) << ' ' << fmt17(reference_values[s]) << '\n';
    } else {
        const std::size_t N = grid_size + 2;
        out << "# j k x y value\n";
        for (std::size_t s = 0; s < sample_indices.size(); ++s)
            out << sample_indices[s] / N << ' ' << sample_indices[s] % N << ' ' << fmt17(x[s]) << ' '
                << fmt17(y[s]) << ' ' << fmt17(reference_values[s]) << '\n';
    }
}

ReferenceData ReferenceData::read_table(std::istream& in) {
    ReferenceData ref;
    bool have_kind = false, have_grid = false;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::istringstream ls(line);
        if (line[0] == '#') {
            std::string hash, key;
            ls >> hash >> key;
            if (key == "kind") {
                std::string k;
                ls >> k;
                ref.kind = case_from_string(k);
                have_kind = true;
            } else if (key == "grid_size") {
                ls >> ref.grid_size;
                have_grid = true;
            } else if (key == "alpha") {
                ls >> ref.alpha;
            } else if (key == "z_ref") {
                double v;
                while (ls >> v) ref.z_ref.push_back(v);
            }
            continue;
        }
        if (!have_kind || !have_grid) throw std::invalid_argument("reference table: header missing before data");
        if (ref.kind == CaseKind::Ode) {
            std::size_t idx;
            double x, v;
            if (!(ls >> idx >> x >> v)) throw std::invalid_argument("reference table: malformed row '" + line + "'");
            ref.sample_indices.push_back(idx);
            ref.x.push_back(x);
            ref.reference_values.push_back(v);
        } else {
            std::size_t j, k;
            double x, y, v;
            if (!(ls >> j >> k >> x >> y >> v))
                throw std::invalid_argument("reference table: malformed row '" + line + "'");
            ref.sample_indices.push_back(j * (ref.grid_size + 2) + k);
            ref.x.push_back(x);
            ref.y.push_back(y);
            ref.reference_values.push_back(v);
        }
    }
    if (!have_kind || !have_grid) throw std::invalid_argument("reference table: missing header");
    ref.validate();
    return ref;
}

// ---------------------------------------------------------------------------
// Case 1
// ---------------------------------------------------------------------------

namespace {

void require_case1_control(const ControlVector& z) {
    if (z.size() != kCase1Controls) throw std::invalid_argument("case 1 control vector must have 8 entries");
    if (z[0] == 0.0) throw std::invalid_argument("case 1 requires z0 != 0");
}

} // namespace

Case1Stencil case1_stencil(const ControlVector& z, std::size_t M) {
    require_case1_control(z);
    if (M == 0) throw std::invalid_argument("case 1 requires M > 0");
    const double dx = 1.0 / static_cast<double>(M + 1);
    const double d2 = z[0] / (dx * dx);
    const double d1 = z[1] / (2.0 * dx);
    return {dx, d2 - d1, -2.0 * d2 + z[2], d2 + d1};
}

Case1System build_case1_system(const ControlVector& z, std::size_t M) {
    const Case1Stencil st = case1_stencil(z, M);
    const std::size_t n = M + 2;
    Vector lower(n - 1, st.a), diag(n, st.b), upper(n - 1, st.c);
    diag[0] = 1.0;
    upper[0] = 0.0;
    diag[n - 1] = 1.0;
    lower[n - 2] = 0.0;
    Vector b(n);
    b[0] = z[6];
    b[n - 1] = z[7];
    for (std::size_t i = 1; i + 1 < n; ++i) {
        const double x = static_cast<double>(i) * st.dx;
        b[i] = z[3] + z[4] * x + z[5] * x * x;
    }
    return {TridiagonalSystem(std::move(lower), std::move(diag), std::move(upper)), std::move(b)};
}

std::optional<std::string> case1_admissibility_warning(const ControlVector& z, std::size_t M) {
    require_case1_control(z);
    std::string msg;
    const double bound = std::abs(z[1]) / (2.0 * static_cast<double>(M + 1));
    if (!(z[0] >= bound)) msg += "z0 = " + fmt17(z[0]) + " < |z1|/(2(M+1)) = " + fmt17(bound);
    if (!(z[2] < 0.0)) {
        if (!msg.empty()) msg += "; ";
        msg += "z2 = " + fmt17(z[2]) + " is not negative";
    }
    if (msg.empty()) return std::nullopt;
    return "case 1 diagonal dominance not guaranteed: " + msg;
}

Eigen::MatrixXd case1_partial_R_wrt_z(const ControlVector& z, std::span<const double> y, std::size_t M) {
    const Case1Stencil st = case1_stencil(z, M);
    const std::size_t n = M + 2;
    if (y.size() != n) throw std::invalid_argument("case 1 state length mismatch");
    Eigen::MatrixXd J = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(n), kCase1Controls);
    const double dx = st.dx;
    for (std::size_t i = 1; i + 1 < n; ++i) {
        const auto r = static_cast<Eigen::Index>(i);
        const double x = static_cast<double>(i) * dx;
        J(r, 0) = (y[i - 1] - 2.0 * y[i] + y[i + 1]) / (dx * dx);
        J(r, 1) = (y[i + 1] - y[i - 1]) / (2.0 * dx);
        J(r, 2) = y[i];
        J(r, 3) = -1.0;
        J(r, 4) = -x;
        J(r, 5) = -x * x;
    }
    J(0, 6) = -1.0;
    J(static_cast<Eigen::Index>(n - 1), 7) = -1.0;
    return J;
}

double case1_objective(const ControlVector& z, std::span<const double> y, const ReferenceData& ref) {
    double f = 0.0;
    for (std::size_t s = 0; s < ref.sample_indices.size(); ++s) {
        const double d = y[ref.sample_indices[s]] - ref.reference_values[s];
        f += d * d;
    }
    const double p = z[0] - 1.0;
    return f + ref.alpha * p * p;
}

double case1_analytic_solution(double x, const ControlVector& z) {
    require_case1_control(z);
    const double disc = z[1] * z[1] - 4.0 * z[0] * z[2];
    if (!(disc > 0.0)) throw std::domain_error("case 1 analytic solution needs distinct real characteristic roots");
    if (z[2] == 0.0) throw std::domain_error("case 1 analytic solution needs z2 != 0");
    // Quadratic particular solution P + Q x + R x^2.
    const double R = z[5] / z[2];
    const double Q = (z[4] - 2.0 * z[1] * R) / z[2];
    const double P = (z[3] - 2.0 * z[0] * R - z[1] * Q) / z[2];
    const double sq = std::sqrt(disc);
    const double r1 = (-z[1] + sq) / (2.0 * z[0]);
    const double r2 = (-z[1] - sq) / (2.0 * z[0]);
    // C1 + C2 = z6 - P;  C1 e^{r1} + C2 e^{r2} = z7 - (P + Q + R).
    const double lhs0 = z[6] - P;
    const double lhs1 = z[7] - (P + Q + R);
    const double e1 = std::exp(r1), e2 = std::exp(r2);
    const double det = e2 - e1;
    const double C1 = (lhs0 * e2 - lhs1) / det;
    const double C2 = (lhs1 - lhs0 * e1) / det;
    return C1 * std::exp(r1 * x) + C2 * std::exp(r2 * x) + P + Q * x + R * x * x;
}

ReferenceData generate_case1_reference(std::size_t M, std::size_t n_points, const ControlVector& z_ref, double alpha) {
    require_case1_control(z_ref);
    if (!(n_points > 1 && n_points < M + 2))
        throw std::invalid_argument("case 1 reference needs 1 < n_P < M+2");
    ReferenceData ref;
    ref.kind = CaseKind::Ode;
    ref.grid_size = M;
    ref.z_ref = z_ref;
    ref.alpha = alpha;
    const double inv_dx = static_cast<double>(M + 1);
    std::set<std::size_t> seen;
    for (std::size_t j = 0; j < n_points; ++j) {
        const double target = static_cast<double>(j) / static_cast<double>(n_points - 1);
        const auto idx = static_cast<std::size_t>(std::lround(target * inv_dx));
        if (!seen.insert(idx).second) continue;
        ref.sample_indices.push_back(idx);
    }
    if (ref.sample_indices.size() < n_points)
        throw std::invalid_argument("case 1 reference: grid too coarse for distinct sample nodes");
    for (std::size_t idx : ref.sample_indices) {
        const double x = static_cast<double>(idx) / inv_dx;
        ref.x.push_back(x);
        ref.reference_values.push_back(case1_analytic_solution(x, z_ref));
    }
    return ref;
}

// ---------------------------------------------------------------------------
// Case 2
// ---------------------------------------------------------------------------

std::size_t case2_sample_count(std::size_t M) {
    return 4 * (M + 1) + 2;
}

double case2_boundary_value(const ControlVector& z, double t) {
    double f = 0.0;
    for (std::size_t i = z.size(); i-- > 0;) f = f * t + z[i];
    return f;
}

Vector case2_rhs(const ControlVector& z, std::size_t M) {
    if (M == 0) throw std::invalid_argument("case 2 requires M > 0");
    const std::size_t N = M + 2;
    const double h = 1.0 / static_cast<double>(M + 1);
    Vector b(N * N, 0.0);
    for (std::size_t k = 0; k < N; ++k) b[(N - 1) * N + k] = case2_boundary_value(z, static_cast<double>(k) * h);
    return b;
}

Case2System build_case2_system(const ControlVector& z, std::size_t M) {
    if (z.size() < 3) throw std::invalid_argument("case 2 requires polynomial degree >= 2");
    return {linsolve::laplace_matrix(M), case2_rhs(z, M)};
}

Eigen::MatrixXd case2_partial_R_wrt_z(const ControlVector& z, std::size_t M) {
    const std::size_t N = M + 2;
    const double h = 1.0 / static_cast<double>(M + 1);
    Eigen::MatrixXd J = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(N * N), static_cast<Eigen::Index>(z.size()));
    for (std::size_t k = 0; k < N; ++k) {
        const auto r = static_cast<Eigen::Index>((N - 1) * N + k);
        const double t = static_cast<double>(k) * h;
        double p = 1.0;
        for (std::size_t i = 0; i < z.size(); ++i, p *= t) J(r, static_cast<Eigen::Index>(i)) = -p;
    }
    return J;
}

double case2_objective(std::span<const double> y, const ReferenceData& ref) {
    double f = 0.0;
    for (std::size_t s = 0; s < ref.sample_indices.size(); ++s) {
        const double d = y[ref.sample_indices[s]] - ref.reference_values[s];
        f += d * d;
    }
    return f;
}

Vector case2_sine_coefficients(const ControlVector& z, std::size_t terms) {
    Vector c(terms, 0.0);
    Vector S(z.size()), C(z.size());
    for (std::size_t n = 1; n <= terms; ++n) {
        const double k = static_cast<double>(n) * std::numbers::pi;
        const double cosk = (n % 2 == 0) ? 1.0 : -1.0;
        // S_i = int t^i sin(kt), C_i = int t^i cos(kt) over [0, 1]; sin(k) = 0.
        S[0] = (1.0 - cosk) / k;
        C[0] = 0.0;
        for (std::size_t i = 1; i < z.size(); ++i) {
            const double fi = static_cast<double>(i);
            S[i] = -cosk / k + fi / k * C[i - 1];
            C[i] = -fi / k * S[i - 1];
        }
        double s = 0.0;
        for (std::size_t i = 0; i < z.size(); ++i) s += z[i] * S[i];
        c[n - 1] = 2.0 * s;
    }
    return c;
}

namespace {

double case2_series(double x, double y, const Vector& c) {
    double u = 0.0;
    for (std::size_t n = 1; n <= c.size(); ++n) {
        const double k = static_cast<double>(n) * std::numbers::pi;
        // sinh(kx)/sinh(k) without overflow.
        const double ratio = std::exp(k * (x - 1.0)) * (-std::expm1(-2.0 * k * x)) / (-std::expm1(-2.0 * k));
        u += c[n - 1] * ratio * std::sin(k * y);
    }
    return u;
}

} // namespace

double case2_analytic_solution(double x, double y, const ControlVector& z, std::size_t terms) {
    if (terms == 0) throw std::invalid_argument("case 2 analytic solution needs terms >= 1");
    return case2_series(x, y, case2_sine_coefficients(z, terms));
}

ReferenceData generate_case2_reference(std::size_t M, std::uint64_t seed, const ControlVector& z_ref,
                                       std::size_t terms) {
    if (M < 2) throw std::invalid_argument("case 2 reference needs M >= 2");
    if (z_ref.size() < 3) throw std::invalid_argument("case 2 requires polynomial degree >= 2");
    const std::size_t ns = case2_sample_count(M);
    if (ns > M * M) throw std::invalid_argument("case 2 reference: not enough interior nodes for distinct samples");

    ReferenceData ref;
    ref.kind = CaseKind::Laplace;
    ref.grid_size = M;
    ref.z_ref = z_ref;
    ref.alpha = 0.0;

    const std::size_t N = M + 2;
    const double inv_h = static_cast<double>(M + 1);
    auto snap = [&](double t) {
        const auto i = static_cast<std::size_t>(std::lround(t * inv_h));
        return std::clamp<std::size_t>(i, 1, M);
    };

    Rng rng(seed);
    std::vector<std::size_t> px(ns), py(ns);
    for (std::size_t i = 0; i < ns; ++i) px[i] = py[i] = i;
    rng.shuffle(std::span<std::size_t>(px));
    rng.shuffle(std::span<std::size_t>(py));

    std::vector<bool> used(N * N, false);
    const double width = 1.0 / static_cast<double>(ns);
    constexpr std::size_t kMaxRedraws = 100000;
    std::size_t redraws = 0;
    for (std::size_t s = 0; s < ns; ++s) {
        double x = (static_cast<double>(px[s]) + rng.uniform01()) * width;
        double y = (static_cast<double>(py[s]) + rng.uniform01()) * width;
        std::size_t j = snap(x), k = snap(y);
        while (used[j * N + k]) {
            if (++redraws > kMaxRedraws) throw std::runtime_error("case 2 reference: collision resampling did not terminate");
            x = rng.uniform01();
            y = rng.uniform01();
            j = snap(x);
            k = snap(y);
        }
        used[j * N + k] = true;
        ref.sample_indices.push_back(j * N + k);
    }
    std::sort(ref.sample_indices.begin(), ref.sample_indices.end());

    const Vector c = case2_sine_coefficients(z_ref, terms);
    for (std::size_t idx : ref.sample_indices) {
        const double x = static_cast<double>(idx / N) / inv_h;
        const double y = static_cast<double>(idx % N) / inv_h;
        ref.x.push_back(x);
        ref.y.push_back(y);
        ref.reference_values.push_back(case2_series(x, y, c));
    }
    return ref;
}

// ---------------------------------------------------------------------------
// AffineStateSystem
// ---------------------------------------------------------------------------

double AffineStateSystem::state_residual_norm(const ControlVector& z, std::span<const double> y) const {
    return system_matrix(z).residual_norm(y, rhs(z));
}

double AffineStateSystem::adjoint_residual_norm(const ControlVector& z, std::span<const double> psi,
                                                std::span<const double> rhs_vec) const {
    return system_matrix(z).transposed().residual_norm(psi, rhs_vec);
}

double AffineStateSystem::reduced_objective(const ControlVector& z) const {
    const Vector y = solve_state_direct(z);
    return objective(z, y);
}

namespace {

SparseMatrix tridiagonal_to_sparse(const TridiagonalSystem& s) {
    const std::size_t n = s.size();
    std::vector<Triplet> t;
    t.reserve(3 * n);
    for (std::size_t i = 0; i < n; ++i) {
        if (i > 0 && s.lower[i - 1] != 0.0) t.push_back({i, i - 1, s.lower[i - 1]});
        t.push_back({i, i, s.diag[i]});
        if (i + 1 < n && s.upper[i] != 0.0) t.push_back({i, i + 1, s.upper[i]});
    }
    return SparseMatrix::from_triplets(n, t);
}

void require_length(std::span<const double> v, std::size_t n, const char* what) {
    if (v.size() != n) throw std::invalid_argument(std::string(what) + ": length mismatch");
}

} // namespace

// --- Case1Problem ----------------------------------------------------------

Case1Problem::Case1Problem(std::size_t M, ReferenceData ref) : M_(M), ref_(std::move(ref)) {
    if (ref_.kind != CaseKind::Ode || ref_.grid_size != M)
        throw std::invalid_argument("Case1Problem: reference data does not match the grid");
    ref_.validate();
}

SparseMatrix Case1Problem::system_matrix(const ControlVector& z) const {
    return tridiagonal_to_sparse(build_case1_system(z, M_).A);
}

Vector Case1Problem::rhs(const ControlVector& z) const {
    return build_case1_system(z, M_).b;
}

Eigen::MatrixXd Case1Problem::partial_R_wrt_z(const ControlVector& z, std::span<const double> y) const {
    return case1_partial_R_wrt_z(z, y, M_);
}

Vector Case1Problem::partial_R_transpose_apply(const ControlVector& z, std::span<const double> y,
                                               std::span<const double> psi) const {
    const Case1Stencil st = case1_stencil(z, M_);
    const std::size_t n = M_ + 2;
    require_length(y, n, "case 1 state");
    require_length(psi, n, "case 1 adjoint");
    const double dx = st.dx;
    double g0 = 0.0, g1 = 0.0, g2 = 0.0, g3 = 0.0, g4 = 0.0, g5 = 0.0;
    for (std::size_t i = 1; i + 1 < n; ++i) {
        const double x = static_cast<double>(i) * dx;
        const double p = psi[i];
        g0 += p * (y[i - 1] - 2.0 * y[i] + y[i + 1]);
        g1 += p * (y[i + 1] - y[i - 1]);
        g2 += p * y[i];
        g3 -= p;
        g4 -= p * x;
        g5 -= p * x * x;
    }
    return {g0 / (dx * dx), g1 / (2.0 * dx), g2, g3, g4, g5, -psi[0], -psi[n - 1]};
}

double Case1Problem::objective(const ControlVector& z, std::span<const double> y) const {
    require_length(y, M_ + 2, "case 1 state");
    return case1_objective(z, y, ref_);
}

void Case1Problem::objective_partials(const ControlVector& z, std::span<const double> y, Vector& grad_z,
                                      Vector& grad_y) const {
    require_length(y, M_ + 2, "case 1 state");
    grad_z.assign(kCase1Controls, 0.0);
    grad_z[0] = 2.0 * ref_.alpha * (z[0] - 1.0);
    grad_y.assign(M_ + 2, 0.0);
    for (std::size_t s = 0; s < ref_.sample_indices.size(); ++s) {
        const std::size_t i = ref_.sample_indices[s];
        grad_y[i] = 2.0 * (y[i] - ref_.reference_values[s]);
    }
}

SolveReport Case1Problem::solve_state(const ControlVector& z, double tol, std::span<const double> y0) const {
    const Case1System sys = build_case1_system(z, M_);
    return linsolve::sor_solve(sys.A, sys.b, tol, linsolve::optimal_sor_omega(sys.A), y0);
}

SolveReport Case1Problem::solve_adjoint(const ControlVector& z, std::span<const double> rhs_vec, double tol,
                                        std::span<const double> psi0) const {
    const TridiagonalSystem At = build_case1_system(z, M_).A.transposed();
    return linsolve::sor_solve(At, rhs_vec, tol, linsolve::optimal_sor_omega(At), psi0);
}

Vector Case1Problem::solve_state_direct(const ControlVector& z) const {
    const Case1System sys = build_case1_system(z, M_);
    return linsolve::thomas_solve(sys.A, sys.b);
}

Vector Case1Problem::solve_adjoint_direct(const ControlVector& z, std::span<const double> rhs_vec) const {
    return linsolve::thomas_solve(build_case1_system(z, M_).A.transposed(), rhs_vec);
}

// --- Case2Problem ----------------------------------------------------------

struct Case2Problem::DirectFactor {
    std::once_flag once;
    Eigen::SparseLU<Eigen::SparseMatrix<double>> lu;

    void ensure(const SparseMatrix& A) {
        std::call_once(once, [&] {
            std::vector<Eigen::Triplet<double>> t;
            t.reserve(A.nonzeros());
            for (const Triplet& e : A.triplets())
                t.emplace_back(static_cast<int>(e.row), static_cast<int>(e.col), e.value);
            Eigen::SparseMatrix<double> S(static_cast<int>(A.size()), static_cast<int>(A.size()));
            S.setFromTriplets(t.begin(), t.end());
            S.makeCompressed();
            lu.compute(S);
            if (lu.info() != Eigen::Success) throw SingularSystemError("case 2: sparse LU factorization failed");
        });
    }
};

Case2Problem::Case2Problem(std::size_t M, ReferenceData ref, Case2SolverOptions options)
    : M_(M), ref_(std::move(ref)), options_(options), A_(linsolve::laplace_matrix(M)), At_(A_.transposed()) {
    if (ref_.kind != CaseKind::Laplace || ref_.grid_size != M)
        throw std::invalid_argument("Case2Problem: reference data does not match the grid");
    ref_.validate();
    if (ref_.z_ref.size() < 3) throw std::invalid_argument("Case2Problem: polynomial degree must be >= 2");
    if (options_.adi_parameter_count == 0) throw std::invalid_argument("Case2Problem: ADI parameter count must be >= 1");
    if (options_.adi_parameter_count > 1) adi_params_ = linsolve::cyclic_adi_parameters(M, options_.adi_parameter_count);
    const double omega = options_.ssor_omega > 0.0 ? options_.ssor_omega : linsolve::laplace_sor_omega(M);
    precond_ = std::make_unique<linsolve::SsorPreconditioner>(At_, omega);
    direct_ = std::make_unique<DirectFactor>();
}

Case2Problem::~Case2Problem() = default;

SparseMatrix Case2Problem::system_matrix(const ControlVector&) const {
    return A_;
}

Vector Case2Problem::rhs(const ControlVector& z) const {
    return case2_rhs(z, M_);
}

Eigen::MatrixXd Case2Problem::partial_R_wrt_z(const ControlVector& z, std::span<const double>) const {
    return case2_partial_R_wrt_z(z, M_);
}

Vector Case2Problem::partial_R_transpose_apply(const ControlVector& z, std::span<const double>,
                                               std::span<const double> psi) const {
    const std::size_t N = M_ + 2;
    require_length(psi, N * N, "case 2 adjoint");
    const double h = 1.0 / static_cast<double>(M_ + 1);
    Vector g(z.size(), 0.0);
    for (std::size_t k = 0; k < N; ++k) {
        const double p = psi[(N - 1) * N + k];
        const double t = static_cast<double>(k) * h;
        double tp = 1.0;
        for (std::size_t i = 0; i < z.size(); ++i, tp *= t) g[i] -= p * tp;
    }
    return g;
}

double Case2Problem::objective(const ControlVector&, std::span<const double> y) const {
    require_length(y, state_dim(), "case 2 state");
    return case2_objective(y, ref_);
}

void Case2Problem::objective_partials(const ControlVector& z, std::span<const double> y, Vector& grad_z,
                                      Vector& grad_y) const {
    require_length(y, state_dim(), "case 2 state");
    grad_z.assign(z.size(), 0.0);
    grad_y.assign(state_dim(), 0.0);
    for (std::size_t s = 0; s < ref_.sample_indices.size(); ++s) {
        const std::size_t i = ref_.sample_indices[s];
        grad_y[i] = 2.0 * (y[i] - ref_.reference_values[s]);
    }
}

SolveReport Case2Problem::solve_state(const ControlVector& z, double tol, std::span<const double> y0) const {
    const Vector b = case2_rhs(z, M_);
    return linsolve::adi_laplace_solve(M_, b, tol, y0, linsolve::kDefaultAdiMaxSweeps, adi_params_);
}

SolveReport Case2Problem::solve_adjoint(const ControlVector&, std::span<const double> rhs_vec, double tol,
                                        std::span<const double> psi0) const {
    return linsolve::gmres_solve(At_, rhs_vec, tol, options_.gmres_restart, precond_.get(), psi0);
}

Vector Case2Problem::solve_state_direct(const ControlVector& z) const {
    direct_->ensure(A_);
    const Vector b = case2_rhs(z, M_);
    Eigen::VectorXd x = direct_->lu.solve(Eigen::Map<const Eigen::VectorXd>(b.data(), static_cast<Eigen::Index>(b.size())));
    return Vector(x.data(), x.data() + x.size());
}

Vector Case2Problem::solve_adjoint_direct(const ControlVector&, std::span<const double> rhs_vec) const {
    direct_->ensure(A_);
    require_length(rhs_vec, state_dim(), "case 2 adjoint rhs");
    Eigen::VectorXd x = direct_->lu.transpose().solve(
        Eigen::Map<const Eigen::VectorXd>(rhs_vec.data(), static_cast<Eigen::Index>(rhs_vec.size())));
    return Vector(x.data(), x.data() + x.size());
}

// ---------------------------------------------------------------------------

ControlVector case1_reference_control() {
    return {1.0, -3.0, -4.0, 1.0, 1.0, 5.0, 0.0, 0.0};
}

ControlVector case2_reference_control() {
    return {0.0, 1.0, -1.0};
}

std::unique_ptr<AffineStateSystem> make_case1_problem(std::size_t M, std::size_t n_points, double alpha) {
    return std::make_unique<Case1Problem>(M, generate_case1_reference(M, n_points, case1_reference_control(), alpha));
}

std::unique_ptr<AffineStateSystem> make_case2_problem(std::size_t M, std::uint64_t seed, Case2SolverOptions options) {
    return std::make_unique<Case2Problem>(M, generate_case2_reference(M, seed, case2_reference_control()), options);
}

} // namespace deco::problems
