#include <gtest/gtest.h>

#include <Eigen/Dense>
#include <Eigen/SparseLU>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include "deco/linsolve.hpp"

using namespace deco;
using namespace deco::linsolve;

namespace {

TridiagonalSystem random_dominant(std::size_t n, std::mt19937_64& rng) {
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    std::uniform_real_distribution<double> margin(0.1, 2.0);
    Vector lo(n - 1), di(n), up(n - 1);
    for (auto& v : lo) v = u(rng);
    for (auto& v : up) v = u(rng);
    for (std::size_t i = 0; i < n; ++i) {
        double off = 0.0;
        if (i > 0) off += std::abs(lo[i - 1]);
        if (i + 1 < n) off += std::abs(up[i]);
        di[i] = (off + margin(rng)) * (u(rng) < 0 ? -1.0 : 1.0);
    }
    return {lo, di, up};
}

Vector random_vector(std::size_t n, std::mt19937_64& rng, double scale = 1.0) {
    std::uniform_real_distribution<double> u(-scale, scale);
    Vector v(n);
    for (auto& x : v) x = u(rng);
    return v;
}

// Dense matvec, independent from the solver-side implementations.
Vector dense_tridiag_matvec(const TridiagonalSystem& s, const Vector& x) {
    const std::size_t n = s.size();
    Eigen::MatrixXd A = Eigen::MatrixXd::Zero(n, n);
    for (std::size_t i = 0; i < n; ++i) {
        A(i, i) = s.diag[i];
        if (i + 1 < n) {
            A(i, i + 1) = s.upper[i];
            A(i + 1, i) = s.lower[i];
        }
    }
    Eigen::VectorXd y = A * Eigen::Map<const Eigen::VectorXd>(x.data(), n);
    return Vector(y.data(), y.data() + n);
}

double max_abs_diff(const Vector& a, const Vector& b) {
    double m = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
    return m;
}

Eigen::SparseMatrix<double> to_eigen(const SparseMatrix& m) {
    std::vector<Eigen::Triplet<double>> t;
    for (const auto& e : m.triplets()) t.emplace_back(static_cast<int>(e.row), static_cast<int>(e.col), e.value);
    Eigen::SparseMatrix<double> s(static_cast<int>(m.size()), static_cast<int>(m.size()));
    s.setFromTriplets(t.begin(), t.end());
    return s;
}

Vector sparse_direct(const SparseMatrix& m, const Vector& rhs) {
    Eigen::SparseMatrix<double> s = to_eigen(m);
    s.makeCompressed();
    Eigen::SparseLU<Eigen::SparseMatrix<double>> lu;
    lu.compute(s);
    Eigen::VectorXd x = lu.solve(Eigen::Map<const Eigen::VectorXd>(rhs.data(), rhs.size()));
    return Vector(x.data(), x.data() + x.size());
}

double independent_residual(const SparseMatrix& m, const Vector& x, const Vector& rhs) {
    Eigen::VectorXd r = Eigen::Map<const Eigen::VectorXd>(rhs.data(), rhs.size()) -
                        to_eigen(m) * Eigen::Map<const Eigen::VectorXd>(x.data(), x.size());
    return r.norm();
}

} // namespace

TEST(Thomas, IdentityReturnsRhs) {
    TridiagonalSystem s({0.0}, {1.0, 1.0}, {0.0});
    auto x = thomas_solve(s, Vector{4.0, 7.0});
    EXPECT_DOUBLE_EQ(x[0], 4.0);
    EXPECT_DOUBLE_EQ(x[1], 7.0);
}

TEST(Thomas, TwoByTwo) {
    TridiagonalSystem s({1.0}, {2.0, 2.0}, {1.0});
    auto x = thomas_solve(s, Vector{3.0, 3.0});
    EXPECT_NEAR(x[0], 1.0, 1e-15);
    EXPECT_NEAR(x[1], 1.0, 1e-15);
}

TEST(Thomas, RandomDominantResidual) {
    std::mt19937_64 rng(7);
    auto s = random_dominant(50, rng);
    auto b = random_vector(50, rng);
    auto x = thomas_solve(s, b);
    auto ax = dense_tridiag_matvec(s, x);
    double r = 0.0;
    for (std::size_t i = 0; i < 50; ++i) r += (ax[i] - b[i]) * (ax[i] - b[i]);
    EXPECT_LE(std::sqrt(r), 1e-12 * norm2(b));
}

TEST(Thomas, ZeroPivotThrows) {
    TridiagonalSystem s({1.0}, {0.0, 1.0}, {1.0});
    EXPECT_THROW(thomas_solve(s, Vector{1.0, 1.0}), SingularSystemError);
}

TEST(Tridiagonal, InconsistentBandsThrow) {
    EXPECT_THROW(TridiagonalSystem({1.0, 2.0}, {1.0, 1.0}, {1.0}), std::invalid_argument);
}

TEST(Sor, ExactStartNeedsNoSweeps) {
    TridiagonalSystem s({1.0}, {2.0, 2.0}, {1.0});
    Vector x0{1.0, 1.0};
    auto rep = sor_solve(s, Vector{3.0, 3.0}, 1e-10, 1.2, x0);
    EXPECT_TRUE(rep.converged);
    EXPECT_EQ(rep.iterations, 0u);
}

TEST(Sor, TwoByTwoMatchesThomas) {
    TridiagonalSystem s({1.0}, {2.0, 2.0}, {1.0});
    Vector b{3.0, 3.0};
    auto rep = sor_solve(s, b, 1e-10, 1.1);
    auto direct = thomas_solve(s, b);
    ASSERT_TRUE(rep.converged);
    EXPECT_LE(rep.residual_norm, 1e-10);
    EXPECT_LE(max_abs_diff(rep.solution, direct), 1e-10);
}

TEST(Sor, MaxIterExhaustionIsReported) {
    TridiagonalSystem s({1.0, 1.0}, {2.5, 2.5, 2.5}, {1.0, 1.0});
    auto rep = sor_solve(s, Vector{1.0, 2.0, 3.0}, 1e-14, 1.0, {}, 2);
    EXPECT_FALSE(rep.converged);
    EXPECT_EQ(rep.iterations, 2u);
}

TEST(Sor, RejectsBadArguments) {
    TridiagonalSystem s({1.0}, {2.0, 2.0}, {1.0});
    EXPECT_THROW(sor_solve(s, Vector{1.0, 1.0}, 0.0, 1.0), std::invalid_argument);
    EXPECT_THROW(sor_solve(s, Vector{1.0, 1.0}, 1e-8, 2.0), std::invalid_argument);
}

TEST(Sor, AgreesWithThomasOnRandomSystems) {
    std::mt19937_64 rng(2024);
    std::uniform_int_distribution<std::size_t> size(2, 200);
    for (int trial = 0; trial < 100; ++trial) {
        const std::size_t n = size(rng);
        auto s = random_dominant(n, rng);
        auto b = random_vector(n, rng);
        auto direct = thomas_solve(s, b);
        auto rep = sor_solve(s, b, 1e-13 * norm2(b), 1.0);
        ASSERT_TRUE(rep.converged) << "trial " << trial;
        const double rel = max_abs_diff(rep.solution, direct) / std::max(1e-300, norm2(direct));
        EXPECT_LE(rel, 1e-8) << "trial " << trial;
        // Converged reports carry an honest residual.
        auto ax = dense_tridiag_matvec(s, rep.solution);
        double r = 0.0;
        for (std::size_t i = 0; i < n; ++i) r += (ax[i] - b[i]) * (ax[i] - b[i]);
        EXPECT_LE(std::sqrt(r), 1.01 * 1e-13 * norm2(b));
    }
}

TEST(SorOmega, ToeplitzSecondDifference) {
    TridiagonalSystem s({1.0, 1.0}, {-2.0, -2.0, -2.0}, {1.0, 1.0});
    EXPECT_NEAR(jacobi_spectral_radius(s), std::cos(std::numbers::pi / 4.0), 1e-14);
    EXPECT_NEAR(optimal_sor_omega(s), 2.0 / (1.0 + std::sin(std::numbers::pi / 4.0)), 1e-12);
    EXPECT_NEAR(optimal_sor_omega(s), 1.1716, 1e-4);
}

TEST(SorOmega, DiagonalSystemFallsBackToOne) {
    TridiagonalSystem s({0.0, 0.0}, {3.0, 3.0, 3.0}, {0.0, 0.0});
    EXPECT_DOUBLE_EQ(optimal_sor_omega(s), 1.0);
}

TEST(SorOmega, NonConvergentJacobiFallsBackToOne) {
    TridiagonalSystem s({2.0, 2.0}, {1.0, 1.0, 1.0}, {2.0, 2.0});
    EXPECT_DOUBLE_EQ(optimal_sor_omega(s), 1.0);
}

TEST(Adi, ZeroBoundaryIsImmediate) {
    const std::size_t M = 8;
    Vector rhs((M + 2) * (M + 2), 0.0);
    auto rep = adi_laplace_solve(M, rhs, 1e-9);
    EXPECT_TRUE(rep.converged);
    EXPECT_EQ(rep.iterations, 0u);
    for (double v : rep.solution) EXPECT_EQ(v, 0.0);
}

TEST(Adi, ParabolicRightEdgeMatchesDirect) {
    const std::size_t M = 16, N = M + 2;
    const double h = 1.0 / (M + 1);
    Vector rhs(N * N, 0.0);
    for (std::size_t k = 0; k < N; ++k) {
        const double y = k * h;
        rhs[(N - 1) * N + k] = y - y * y;
    }
    auto rep = adi_laplace_solve(M, rhs, 1e-9);
    ASSERT_TRUE(rep.converged);
    EXPECT_LE(rep.residual_norm, 1e-9);
    const auto A = laplace_matrix(M);
    EXPECT_LE(independent_residual(A, rep.solution, rhs), 1.01e-9);
    auto direct = sparse_direct(A, rhs);
    EXPECT_LE(max_abs_diff(rep.solution, direct), 1e-7);
}

TEST(Adi, LinearFieldIsReproduced) {
    const std::size_t M = 12, N = M + 2;
    const double h = 1.0 / (M + 1);
    Vector rhs(N * N, 0.0);
    for (std::size_t j = 0; j < N; ++j)
        for (std::size_t k = 0; k < N; ++k)
            if (j == 0 || k == 0 || j == N - 1 || k == N - 1) rhs[j * N + k] = j * h;
    auto rep = adi_laplace_solve(M, rhs, 1e-10);
    ASSERT_TRUE(rep.converged);
    for (std::size_t j = 0; j < N; ++j)
        for (std::size_t k = 0; k < N; ++k) EXPECT_NEAR(rep.solution[j * N + k], j * h, 1e-9);
}

TEST(Adi, AgreesWithBandedDirectOnRandomBoundaries) {
    std::mt19937_64 rng(99);
    for (std::size_t M : {8u, 16u}) {
        const std::size_t N = M + 2;
        const auto A = laplace_matrix(M);
        for (int trial = 0; trial < 5; ++trial) {
            Vector rhs(N * N, 0.0);
            std::uniform_real_distribution<double> u(-1.0, 1.0);
            for (std::size_t j = 0; j < N; ++j)
                for (std::size_t k = 0; k < N; ++k)
                    if (j == 0 || k == 0 || j == N - 1 || k == N - 1) rhs[j * N + k] = u(rng);
            auto rep = adi_laplace_solve(M, rhs, 1e-10);
            ASSERT_TRUE(rep.converged);
            EXPECT_LE(independent_residual(A, rep.solution, rhs), 1.01e-10);
            EXPECT_LE(max_abs_diff(rep.solution, sparse_direct(A, rhs)), 1e-6);
        }
    }
}

TEST(Adi, SweepCapIsReported) {
    const std::size_t M = 16, N = M + 2;
    Vector rhs(N * N, 0.0);
    rhs[(N - 1) * N + N / 2] = 1.0;
    auto rep = adi_laplace_solve(M, rhs, 1e-14, {}, 3);
    EXPECT_FALSE(rep.converged);
    EXPECT_EQ(rep.iterations, 3u);
}

TEST(Sparse, RejectsDuplicatesAndOutOfRange) {
    std::vector<Triplet> dup{{0, 0, 1.0}, {0, 0, 2.0}};
    EXPECT_THROW(SparseMatrix::from_triplets(2, dup), std::invalid_argument);
    std::vector<Triplet> oob{{0, 3, 1.0}};
    EXPECT_THROW(SparseMatrix::from_triplets(2, oob), std::invalid_argument);
}

TEST(Sparse, TransposeMatchesDense) {
    std::vector<Triplet> t{{0, 0, 1.0}, {0, 2, 2.0}, {1, 1, 3.0}, {2, 0, 4.0}, {2, 2, 5.0}};
    auto m = SparseMatrix::from_triplets(3, t);
    auto mt = m.transposed();
    Vector x{1.0, 2.0, 3.0};
    auto y = mt.apply(x);
    EXPECT_DOUBLE_EQ(y[0], 1.0 * 1 + 4.0 * 3);
    EXPECT_DOUBLE_EQ(y[1], 3.0 * 2);
    EXPECT_DOUBLE_EQ(y[2], 2.0 * 1 + 5.0 * 3);
}

TEST(Gmres, ZeroRhsIsImmediate) {
    std::vector<Triplet> t{{0, 0, 2.0}, {0, 1, 1.0}, {1, 0, 1.0}, {1, 1, 2.0}};
    auto m = SparseMatrix::from_triplets(2, t);
    auto rep = gmres_solve(m, Vector{0.0, 0.0}, 1e-12);
    EXPECT_TRUE(rep.converged);
    EXPECT_EQ(rep.iterations, 0u);
    EXPECT_EQ(rep.solution[0], 0.0);
}

TEST(Gmres, TwoByTwoSpd) {
    std::vector<Triplet> t{{0, 0, 2.0}, {0, 1, 1.0}, {1, 0, 1.0}, {1, 1, 2.0}};
    auto m = SparseMatrix::from_triplets(2, t);
    auto rep = gmres_solve(m, Vector{3.0, 3.0}, 1e-12);
    ASSERT_TRUE(rep.converged);
    EXPECT_NEAR(rep.solution[0], 1.0, 1e-11);
    EXPECT_NEAR(rep.solution[1], 1.0, 1e-11);
}

TEST(Gmres, MatchesDenseSolveOnRandomSystems) {
    std::mt19937_64 rng(5);
    std::uniform_int_distribution<std::size_t> size(2, 200);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    for (int trial = 0; trial < 20; ++trial) {
        const std::size_t n = size(rng);
        std::vector<Triplet> t;
        Eigen::MatrixXd dense = Eigen::MatrixXd::Zero(n, n);
        for (std::size_t i = 0; i < n; ++i) {
            for (std::size_t j = 0; j < n; ++j) {
                if (i == j) {
                    dense(i, j) = 4.0 + u(rng);
                } else if (u(rng) > 0.9) {
                    dense(i, j) = 1.5 * u(rng) / std::sqrt(double(n));
                }
                if (dense(i, j) != 0.0) t.push_back({i, j, dense(i, j)});
            }
        }
        auto m = SparseMatrix::from_triplets(n, t);
        auto b = random_vector(n, rng);
        SorPreconditioner pc(m, 1.0);
        auto rep = gmres_solve(m, b, 1e-12, 20, &pc);
        ASSERT_TRUE(rep.converged) << "trial " << trial;
        Eigen::VectorXd ref = dense.partialPivLu().solve(Eigen::Map<const Eigen::VectorXd>(b.data(), n));
        Vector refv(ref.data(), ref.data() + n);
        EXPECT_LE(max_abs_diff(rep.solution, refv) / ref.norm(), 1e-8);
        EXPECT_LE(independent_residual(m, rep.solution, b), 1.01e-12);
    }
}

TEST(Gmres, PreconditionedLaplaceTranspose) {
    const std::size_t M = 16, N = M + 2;
    auto At = laplace_matrix(M).transposed();
    Vector b(N * N, 0.0);
    std::mt19937_64 rng(1);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    for (std::size_t j = 1; j <= M; ++j)
        for (std::size_t k = 1; k <= M; ++k) b[j * N + k] = u(rng);
    SorPreconditioner pc(At, 1.05);
    auto rep = gmres_solve(At, b, 1e-9, 50, &pc);
    ASSERT_TRUE(rep.converged);
    EXPECT_LE(independent_residual(At, rep.solution, b), 1.01e-9);
}

// --- SSOR and ADI parameters ------------------------------------------------

namespace {

Eigen::MatrixXd dense(const SparseMatrix& m) { return Eigen::MatrixXd(to_eigen(m)); }

// Dominant nonsymmetric pattern with a few long-range couplings.
SparseMatrix random_sparse(std::size_t n, std::mt19937_64& rng) {
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    std::vector<Triplet> t;
    for (std::size_t i = 0; i < n; ++i) {
        double off = 0.0;
        std::vector<Triplet> row;
        for (std::size_t j : {i + n - 1, i + 1, i + n / 2})
            if (j % n != i) {
                const double v = u(rng);
                row.push_back({i, j % n, v});
                off += std::abs(v);
            }
        row.push_back({i, i, off + 0.5});
        std::sort(row.begin(), row.end(), [](const Triplet& a, const Triplet& b) { return a.col < b.col; });
        for (std::size_t k = 1; k < row.size(); ++k)
            if (row[k].col == row[k - 1].col) {
                row[k - 1].value += row[k].value;
                row.erase(row.begin() + static_cast<std::ptrdiff_t>(k--));
            }
        t.insert(t.end(), row.begin(), row.end());
    }
    return SparseMatrix::from_triplets(n, t);
}

} // namespace

TEST(Ssor, InvertsTheFactoredSplitting) {
    std::mt19937_64 rng(11);
    for (double omega : {0.7, 1.0, 1.6}) {
        const SparseMatrix A = random_sparse(12, rng);
        const Eigen::MatrixXd Ad = dense(A);
        const Eigen::MatrixXd D = Ad.diagonal().asDiagonal();
        const Eigen::MatrixXd L = Ad.triangularView<Eigen::StrictlyLower>();
        const Eigen::MatrixXd U = Ad.triangularView<Eigen::StrictlyUpper>();
        const Eigen::MatrixXd Mss = (D + omega * L) * D.inverse() * (D + omega * U) / (omega * (2.0 - omega));
        SsorPreconditioner pc(A, omega);
        const Vector in = random_vector(12, rng);
        Vector out(12);
        pc.apply(in, out);
        const Eigen::VectorXd back = Mss * Eigen::Map<const Eigen::VectorXd>(out.data(), 12);
        for (std::size_t i = 0; i < 12; ++i) EXPECT_NEAR(back(i), in[i], 1e-12) << omega;
        EXPECT_EQ(pc.omega(), omega);
    }
}

TEST(Ssor, SymmetricForSymmetricMatrices) {
    // For A = A^T the SSOR factor is symmetric, so one application per unit
    // vector must give a symmetric M^{-1}.
    const std::size_t m = 4, n = m * m;
    std::vector<Triplet> t;
    for (std::size_t r = 0; r < n; ++r) {
        if (r >= m) t.push_back({r, r - m, -1.0});
        if (r % m > 0) t.push_back({r, r - 1, -1.0});
        t.push_back({r, r, 4.0});
        if (r % m + 1 < m) t.push_back({r, r + 1, -1.0});
        if (r + m < n) t.push_back({r, r + m, -1.0});
    }
    const SparseMatrix A = SparseMatrix::from_triplets(n, t);
    SsorPreconditioner pc(A, 1.3);
    Eigen::MatrixXd Minv(n, n);
    for (std::size_t j = 0; j < n; ++j) {
        Vector e(n, 0.0), out(n);
        e[j] = 1.0;
        pc.apply(e, out);
        for (std::size_t i = 0; i < n; ++i) Minv(i, j) = out[i];
    }
    EXPECT_LE((Minv - Minv.transpose()).cwiseAbs().maxCoeff(), 1e-14);
    EXPECT_GT(Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(Minv).eigenvalues().minCoeff(), 0.0);
}

TEST(Ssor, AcceleratesGmresOnLaplaceTranspose) {
    const std::size_t M = 24, N = M + 2;
    const auto At = laplace_matrix(M).transposed();
    Vector b(N * N, 0.0);
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    for (std::size_t j = 1; j <= M; ++j)
        for (std::size_t k = 1; k <= M; ++k) b[j * N + k] = u(rng);
    SorPreconditioner sor(At, laplace_sor_omega(M));
    SsorPreconditioner ssor(At, laplace_sor_omega(M));
    const auto a = gmres_solve(At, b, 1e-9, 20, &sor);
    const auto c = gmres_solve(At, b, 1e-9, 20, &ssor);
    ASSERT_TRUE(a.converged);
    ASSERT_TRUE(c.converged);
    EXPECT_LE(independent_residual(At, c.solution, b), 1.01e-9);
    EXPECT_LT(c.iterations, a.iterations);
}

TEST(AdiParameters, GeometricOverTheSecondDifferenceSpectrum) {
    for (std::size_t M : {8, 31, 128}) {
        const double h = 1.0 / static_cast<double>(M + 1);
        const double lo = 4.0 * std::pow(std::sin(std::numbers::pi * h / 2.0), 2);
        const double hi = 4.0 * std::pow(std::cos(std::numbers::pi * h / 2.0), 2);
        const Vector p = cyclic_adi_parameters(M, 8);
        ASSERT_EQ(p.size(), 8u);
        for (double x : p) {
            EXPECT_GT(x, lo);
            EXPECT_LT(x, hi);
        }
        for (std::size_t i = 1; i + 1 < p.size(); ++i) EXPECT_NEAR(p[i + 1] / p[i], p[1] / p[0], 1e-12);
        // The end parameters sit half a ratio inside the spectrum.
        EXPECT_NEAR(p.front() / lo, std::pow(hi / lo, 1.0 / 16.0), 1e-12);
        EXPECT_NEAR(hi / p.back(), std::pow(hi / lo, 1.0 / 16.0), 1e-12);
        // A single parameter is the geometric mean, the classical choice.
        EXPECT_NEAR(cyclic_adi_parameters(M, 1)[0], adi_parameter(M), 1e-14);
    }
    EXPECT_THROW(cyclic_adi_parameters(0, 4), std::invalid_argument);
    EXPECT_THROW(cyclic_adi_parameters(8, 0), std::invalid_argument);
}

TEST(AdiParameters, CyclingBeatsTheSingleParameter) {
    const std::size_t M = 48, N = M + 2;
    Vector rhs(N * N, 0.0);
    for (std::size_t k = 0; k < N; ++k) rhs[(N - 1) * N + k] = std::sin(std::numbers::pi * k / (N - 1.0));
    const auto single = adi_laplace_solve(M, rhs, 1e-9);
    const Vector p = cyclic_adi_parameters(M, 8);
    const auto cyc = adi_laplace_solve(M, rhs, 1e-9, {}, kDefaultAdiMaxSweeps, p);
    ASSERT_TRUE(single.converged);
    ASSERT_TRUE(cyc.converged);
    EXPECT_LT(cyc.iterations * 3, single.iterations);
    EXPECT_LE(max_abs_diff(single.solution, cyc.solution), 1e-8);
}

TEST(LaplaceSorOmega, MatchesBruteForceJacobiSpectrum) {
    for (std::size_t M : {3, 6, 9}) {
        // Interior five-point operator, Jacobi matrix I - D^{-1} A.
        const std::size_t n = M * M;
        Eigen::MatrixXd J = Eigen::MatrixXd::Zero(n, n);
        for (std::size_t j = 0; j < M; ++j)
            for (std::size_t k = 0; k < M; ++k) {
                const std::size_t r = j * M + k;
                if (j > 0) J(r, r - M) = 0.25;
                if (j + 1 < M) J(r, r + M) = 0.25;
                if (k > 0) J(r, r - 1) = 0.25;
                if (k + 1 < M) J(r, r + 1) = 0.25;
            }
        const double rho = Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(J).eigenvalues().cwiseAbs().maxCoeff();
        EXPECT_NEAR(rho, std::cos(std::numbers::pi / static_cast<double>(M + 1)), 1e-12);
        EXPECT_NEAR(laplace_sor_omega(M), 2.0 / (1.0 + std::sqrt(1.0 - rho * rho)), 1e-12);
    }
}

TEST(LaplaceSorOmega, MinimizesTheSorSpectralRadius) {
    // Brute-force spectral radius of the SOR iteration matrix around omega*.
    const std::size_t M = 5, n = M * M;
    Eigen::MatrixXd A = Eigen::MatrixXd::Zero(n, n);
    for (std::size_t j = 0; j < M; ++j)
        for (std::size_t k = 0; k < M; ++k) {
            const std::size_t r = j * M + k;
            A(r, r) = 4.0;
            if (j > 0) A(r, r - M) = -1.0;
            if (j + 1 < M) A(r, r + M) = -1.0;
            if (k > 0) A(r, r - 1) = -1.0;
            if (k + 1 < M) A(r, r + 1) = -1.0;
        }
    const Eigen::MatrixXd D = A.diagonal().asDiagonal();
    const Eigen::MatrixXd L = A.triangularView<Eigen::StrictlyLower>();
    const Eigen::MatrixXd U = A.triangularView<Eigen::StrictlyUpper>();
    auto radius = [&](double w) {
        const Eigen::MatrixXd T = (D + w * L).inverse() * ((1.0 - w) * D - w * U);
        return Eigen::EigenSolver<Eigen::MatrixXd>(T).eigenvalues().cwiseAbs().maxCoeff();
    };
    const double w_star = laplace_sor_omega(M);
    const double r_star = radius(w_star);
    // rho(T_omega*) = omega* - 1.
    EXPECT_NEAR(r_star, w_star - 1.0, 1e-4);
    for (double dw : {-0.1, -0.03, 0.03, 0.1}) EXPECT_GT(radius(w_star + dw), r_star) << dw;
}
