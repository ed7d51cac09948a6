#include "deco/theory.hpp"

#include <Eigen/Dense>
#include <gtest/gtest.h>

#include <cmath>
#include <stdexcept>

using namespace deco;
using namespace deco::theory;

namespace {

Eigen::MatrixXd dense(const std::vector<Vector>& rows) {
    const auto n = static_cast<Eigen::Index>(rows.size());
    Eigen::MatrixXd A(n, n);
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = 0; j < n; ++j) A(i, j) = rows[i][j];
    return A;
}

double spectral_norm_sym(const Eigen::MatrixXd& A) {
    const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(A);
    return es.eigenvalues().cwiseAbs().maxCoeff();
}

Vector diff(const Vector& a, const Vector& b) {
    Vector out(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) out[i] = a[i] - b[i];
    return out;
}

const Vector kSpectrum = {1.0, 1.375, 1.75, 2.125, 2.5};

} // namespace

// ---------------------------------------------------------------------------
// Test functions
// ---------------------------------------------------------------------------

TEST(TestFunctions, QuadraticMatrixHasRequestedSpectrum) {
    const ConvexQuadratic q(kSpectrum, 3);
    const Eigen::MatrixXd Q = dense(q.matrix());
    EXPECT_LT((Q - Q.transpose()).norm(), 1e-15);
    const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(Q);
    for (Eigen::Index i = 0; i < 5; ++i) EXPECT_NEAR(es.eigenvalues()(i), kSpectrum[i], 1e-13);
    EXPECT_DOUBLE_EQ(q.lipschitz_L(), 2.5);
    EXPECT_DOUBLE_EQ(q.mu(), 1.0);
}

TEST(TestFunctions, RejectsBadParameters) {
    EXPECT_THROW(ConvexQuadratic({}, 1), std::invalid_argument);
    EXPECT_THROW(ConvexQuadratic({1.0, 0.0}, 1), std::invalid_argument);
    EXPECT_THROW(QuarticRegularized(kSpectrum, -1.0, 1.0, 1), std::invalid_argument);
    EXPECT_THROW(QuarticRegularized(kSpectrum, 0.1, 0.0, 1), std::invalid_argument);
    EXPECT_THROW(BoxRosenbrock(1, 0.5, 1.5), std::invalid_argument);
    EXPECT_THROW(BoxRosenbrock(5, 0.0, 1.5), std::invalid_argument);
}

TEST(TestFunctions, GradientsMatchFiniteDifferences) {
    for (const auto& fn : standard_test_functions()) {
        const TheoryReport r = verify_gradient(*fn, 500, 17);
        EXPECT_TRUE(r.passed) << r.to_line();
        EXPECT_EQ(r.samples, 500u);
    }
}

TEST(TestFunctions, GradientsAreLipschitzWithStatedConstant) {
    for (const auto& fn : standard_test_functions()) {
        const TheoryReport r = verify_lipschitz(*fn, 5000, 19);
        EXPECT_TRUE(r.passed) << r.to_line();
    }
}

TEST(TestFunctions, RosenbrockBoundDominatesSampledHessianNorms) {
    const BoxRosenbrock f(5, 0.5, 1.5);
    Rng rng(23);
    double worst = 0.0;
    for (int t = 0; t < 5000; ++t) worst = std::max(worst, spectral_norm_sym(dense(f.hessian(f.sample(rng)))));
    // Corners of the box are where the Gershgorin terms peak.
    for (double s : {-1.5, 1.5}) {
        const Vector corner(5, s);
        worst = std::max(worst, spectral_norm_sym(dense(f.hessian(corner))));
    }
    EXPECT_LE(worst, f.lipschitz_L());
    EXPECT_GT(worst, 0.5 * f.lipschitz_L());
}

TEST(TestFunctions, RosenbrockHessianMatchesGradientDifferences) {
    const BoxRosenbrock f(5, 0.5, 1.5);
    const Vector z = {0.3, -0.7, 1.1, 0.2, -1.2};
    const Eigen::MatrixXd H = dense(f.hessian(z));
    const double h = 1e-6;
    for (std::size_t j = 0; j < 5; ++j) {
        Vector zp(z), zm(z);
        zp[j] += h;
        zm[j] -= h;
        const Vector gp = f.gradient(zp), gm = f.gradient(zm);
        for (std::size_t i = 0; i < 5; ++i)
            EXPECT_NEAR((gp[i] - gm[i]) / (2 * h), H(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)), 1e-6);
    }
}

TEST(TestFunctions, QuarticBoundDominatesHessianOnBall) {
    const QuarticRegularized f(kSpectrum, 0.1, 3.0, 5);
    const ConvexQuadratic q(kSpectrum, 5);
    const Eigen::MatrixXd Q = dense(q.matrix());
    Rng rng(29);
    double worst = 0.0;
    for (int t = 0; t < 2000; ++t) {
        Vector z = f.sample(rng);
        if (t % 10 == 0) {
            // Boundary points carry the largest quartic curvature.
            const double n = norm2(z);
            for (double& x : z) x *= 3.0 / n;
        }
        const Eigen::Map<const Eigen::VectorXd> v(z.data(), 5);
        const Eigen::MatrixXd H = Q + 0.1 * (v.squaredNorm() * Eigen::MatrixXd::Identity(5, 5) + 2.0 * v * v.transpose());
        worst = std::max(worst, spectral_norm_sym(H));
    }
    EXPECT_LE(worst, f.lipschitz_L() * (1 + 1e-12));
    EXPECT_DOUBLE_EQ(f.lipschitz_L(), 2.5 + 3 * 0.1 * 9.0);
}

TEST(TestFunctions, ProjectionsLandInDomain) {
    const QuarticRegularized f(kSpectrum, 0.1, 3.0, 5);
    const Vector far = {10.0, 0.0, 0.0, 0.0, 0.0};
    EXPECT_NEAR(norm2(f.project(far)), 3.0, 1e-15);
    const Vector inside = {0.1, 0.2, 0.3, 0.4, 0.5};
    EXPECT_EQ(f.project(inside), inside);

    const BoxRosenbrock r(3, 0.5, 1.5);
    EXPECT_EQ(r.project({2.0, -3.0, 0.5}), (Vector{1.5, -1.5, 0.5}));
}

TEST(TestFunctions, LowerBoundsHoldAndRosenbrockMinimum) {
    Rng rng(31);
    for (const auto& fn : standard_test_functions())
        for (int t = 0; t < 1000; ++t) EXPECT_GE(fn->evaluate(fn->sample(rng)), fn->lower_bound());
    const BoxRosenbrock r(5, 0.5, 1.5);
    EXPECT_EQ(r.evaluate(Vector(5, 1.0)), 0.0);
    EXPECT_EQ(norm2(r.gradient(Vector(5, 1.0))), 0.0);
}

// ---------------------------------------------------------------------------
// Noisy oracles
// ---------------------------------------------------------------------------

TEST(NoisyGradient, ZeroBetaIsExact) {
    Rng rng(1);
    const Vector g = {1.0, -2.0, 0.5};
    EXPECT_EQ(relative_noisy_gradient(g, 0.0, rng), g);
}

TEST(NoisyGradient, RelativeBoundHoldsOnEveryDraw) {
    Rng rng(2);
    std::size_t violations = 0;
    double worst = 0.0;
    for (int t = 0; t < 10000; ++t) {
        Vector g(5);
        for (double& x : g) x = rng.normal() * std::pow(10.0, rng.uniform(-3, 3));
        const Vector gb = relative_noisy_gradient(g, 0.3, rng);
        const double ratio = norm2(diff(gb, g)) / norm2(gb);
        worst = std::max(worst, ratio);
        if (ratio > 0.3) ++violations;
    }
    EXPECT_EQ(violations, 0u);
    // The construction caps the error at beta/(1+beta) of ||g||, so the
    // worst ratio approaches but stays below beta.
    EXPECT_GT(worst, 0.2);
}

TEST(NoisyGradient, StationaryPointStaysExact) {
    Rng rng(3);
    const Vector g(4, 0.0);
    EXPECT_EQ(relative_noisy_gradient(g, 0.3, rng), g);
}

TEST(NoisyGradient, RejectsBetaOutsideUnitInterval) {
    Rng rng(4);
    EXPECT_THROW(relative_noisy_gradient({1.0}, 1.0, rng), std::invalid_argument);
    EXPECT_THROW(relative_noisy_gradient({1.0}, -0.1, rng), std::invalid_argument);
    EXPECT_THROW(absolute_noisy_gradient({1.0}, -0.1, rng), std::invalid_argument);
}

TEST(NoisyOracleTest, AbsoluteModeRespectsSequence) {
    const ConvexQuadratic q(kSpectrum, 3);
    NoisyOracle o = NoisyOracle::summable(q, 0.5, 9);
    Rng rng(5);
    for (std::size_t k = 0; k < 200; ++k) {
        const NoisySample s = o.evaluate(q.sample(rng), k);
        const double bound = 0.5 / static_cast<double>((k + 1) * (k + 1));
        EXPECT_DOUBLE_EQ(s.bound, bound);
        EXPECT_LE(s.error, bound * (1 + 1e-12));
    }
    EXPECT_EQ(o.mode(), NoisyOracle::Mode::Absolute);
    EXPECT_THROW(NoisyOracle::summable(q, -1.0, 1), std::invalid_argument);
    EXPECT_THROW(NoisyOracle::absolute(q, {}, 1), std::invalid_argument);
}

TEST(NoisyOracleTest, RelativeModeReportsBound) {
    const ConvexQuadratic q(kSpectrum, 3);
    NoisyOracle o = NoisyOracle::relative(q, 0.3, 9);
    Rng rng(6);
    for (std::size_t k = 0; k < 200; ++k) {
        const NoisySample s = o.evaluate(q.sample(rng), k);
        EXPECT_NEAR(s.bound, 0.3 * norm2(s.g_bar), 1e-15 * s.bound);
        EXPECT_LE(s.error, s.bound);
    }
    EXPECT_EQ(o.describe(), "relative(beta=0.3)");
}

TEST(NoisyOracleTest, SameSeedSameDraws) {
    const ConvexQuadratic q(kSpectrum, 3);
    NoisyOracle a = NoisyOracle::relative(q, 0.3, 42), b = NoisyOracle::relative(q, 0.3, 42);
    const Vector z = {1, 2, 3, 4, 5};
    for (std::size_t k = 0; k < 10; ++k) EXPECT_EQ(a.evaluate(z, k).g_bar, b.evaluate(z, k).g_bar);
}

// ---------------------------------------------------------------------------
// Descent interval
// ---------------------------------------------------------------------------

TEST(DescentIntervalTest, ExactGradientInterval) {
    const DescentInterval iv = descent_interval(0.8, 1.3, 4.0, 0.0);
    EXPECT_EQ(iv.t1_bar, 0.0);
    EXPECT_DOUBLE_EQ(iv.t2_bar, 2 * 0.8 / (1.3 * 1.3 * 5.0));
    EXPECT_DOUBLE_EQ(iv.Delta, 0.64);
    EXPECT_DOUBLE_EQ(iv.L_prime, 5.0);
}

TEST(DescentIntervalTest, WorkedExample) {
    const DescentInterval iv = descent_interval(1.0, 1.0, 1.0, 0.5);
    EXPECT_DOUBLE_EQ(iv.Delta, 0.5);
    // (1 -+ sqrt(0.5)) / 2
    EXPECT_NEAR(iv.t1_bar, (1 - std::sqrt(0.5)) / 2, 1e-15);
    EXPECT_NEAR(iv.t2_bar, (1 + std::sqrt(0.5)) / 2, 1e-15);
    EXPECT_NEAR(iv.t1_bar, 0.146447, 1e-6);
    EXPECT_NEAR(iv.t2_bar, 0.853553, 1e-6);
}

TEST(DescentIntervalTest, CollapsesAtErrorLimit) {
    const double c1 = 0.7, c2 = 1.1, L = 3.0;
    const double bmax = max_relative_error(c1, c2, L);
    EXPECT_DOUBLE_EQ(bmax, c1 / (2.0 * c2));
    const double centre = c1 / (c2 * c2 * 4.0);
    const DescentInterval iv = descent_interval(c1, c2, L, bmax * (1 - 1e-10));
    EXPECT_NEAR(iv.t1_bar, centre, 1e-4 * centre);
    EXPECT_NEAR(iv.t2_bar, centre, 1e-4 * centre);
    EXPECT_LT(iv.t1_bar, iv.t2_bar);
    EXPECT_THROW(descent_interval(c1, c2, L, bmax), std::domain_error);
    EXPECT_THROW(descent_interval(c1, c2, L, 2 * bmax), std::domain_error);
}

TEST(DescentIntervalTest, RejectsBadConstants) {
    EXPECT_THROW(descent_interval(0.0, 1.0, 1.0, 0.1), std::invalid_argument);
    EXPECT_THROW(descent_interval(1.0, -1.0, 1.0, 0.1), std::invalid_argument);
    EXPECT_THROW(descent_interval(1.0, 1.0, 0.0, 0.1), std::invalid_argument);
    EXPECT_THROW(descent_interval(1.0, 1.0, 1.0, -0.1), std::invalid_argument);
}

TEST(DescentIntervalTest, DecreaseCoefficientPeaksAtMidpoint) {
    const DescentInterval iv = descent_interval(1.0, 1.2, 2.0, 0.2);
    const double half = iv.width() / 2;
    EXPECT_NEAR(iv.decrease_coefficient(iv.midpoint()), 1.44 * 3.0 / 2 * half * half, 1e-15);
    EXPECT_NEAR(iv.decrease_coefficient(iv.t1_bar), 0.0, 1e-17);
    EXPECT_NEAR(iv.decrease_coefficient(iv.t2_bar), 0.0, 1e-17);
    for (double f : {0.1, 0.3, 0.45, 0.55, 0.9})
        EXPECT_LT(iv.decrease_coefficient(iv.t1_bar + f * iv.width()), iv.decrease_coefficient(iv.midpoint()));
}

TEST(DescentIntervalTest, MonotoneRangeDefaultsToQuarterWidth) {
    const DescentInterval iv = descent_interval(1.0, 1.0, 1.0, 0.5);
    const auto [lo, hi] = iv.monotone_range();
    EXPECT_DOUBLE_EQ(lo, iv.t1_bar + iv.width() / 4);
    EXPECT_DOUBLE_EQ(hi, iv.t2_bar - iv.width() / 4);
    const auto [a, b] = iv.monotone_range(iv.width() / 2);
    EXPECT_DOUBLE_EQ(a, b);
    EXPECT_THROW((void)iv.monotone_range(0.0), std::invalid_argument);
    EXPECT_THROW((void)iv.monotone_range(iv.width()), std::invalid_argument);
}

TEST(DescentIntervalTest, RandomTuplesSatisfyOrderingAndClosedForm) {
    const TheoryReport r = verify_interval_properties(1000, 77);
    EXPECT_TRUE(r.passed) << r.to_line();
    EXPECT_GE(r.samples, 990u);
}

TEST(DescentIntervalTest, WidthShrinksWithBeta) {
    double prev = descent_interval(1.0, 2.0, 5.0, 0.0).width();
    const double bmax = max_relative_error(1.0, 2.0, 5.0);
    for (int j = 1; j < 100; ++j) {
        const DescentInterval iv = descent_interval(1.0, 2.0, 5.0, bmax * j / 100.0);
        EXPECT_LT(iv.width(), prev);
        EXPECT_NEAR(iv.width(), 2 * std::sqrt(iv.Delta) / (4.0 * 6.0), 1e-15);
        prev = iv.width();
    }
}

// ---------------------------------------------------------------------------
// Inexact upper bound
// ---------------------------------------------------------------------------

TEST(InexactUpperBound, ExactQuadraticHasSlack) {
    ConvexQuadratic q({1.0, 1.0, 1.0}, 1);
    NoisyOracle o = NoisyOracle::relative(q, 0.0, 3);
    const TheoryReport r = verify_inexact_upper_bound(q, o, 2000, 5);
    EXPECT_TRUE(r.passed) << r.to_line();
    // With L' = L + 1 the bound exceeds F(x) by 0.5 ||x - z||^2 exactly.
    Rng rng(7);
    for (int t = 0; t < 100; ++t) {
        const Vector z = q.sample(rng), x = q.sample(rng);
        const Vector d = diff(x, z);
        const double rhs = q.evaluate(z) + dot(q.gradient(z), d) + 1.0 * dot(d, d);
        EXPECT_NEAR(rhs - q.evaluate(x), 0.5 * dot(d, d), 1e-12 * (1 + dot(d, d)));
    }
}

TEST(InexactUpperBound, SuiteHasNoViolations) {
    SuiteOptions opts;
    const auto reports = run_upper_bound_suite(opts);
    ASSERT_EQ(reports.size(), 9u);
    for (const auto& r : reports) {
        EXPECT_TRUE(r.passed) << r.to_line();
        EXPECT_EQ(r.samples, 10000u);
        EXPECT_EQ(r.violations, 0u);
    }
}

TEST(InexactUpperBound, DegeneratePairReducesToNoiseTerm) {
    // x = z leaves 0 <= e^2/2, so the margin equals e^2/2 >= 0.
    ConvexQuadratic q(kSpectrum, 1);
    NoisyOracle o = NoisyOracle::relative(q, 0.3, 3);
    const TheoryReport r = verify_inexact_upper_bound(q, o, 1, 5);
    EXPECT_TRUE(r.passed);
    EXPECT_GE(r.worst_margin, 0.0);
}

TEST(InexactUpperBound, RejectsForeignOracle) {
    ConvexQuadratic q(kSpectrum, 1), other(kSpectrum, 2);
    NoisyOracle o = NoisyOracle::relative(other, 0.1, 3);
    EXPECT_THROW(verify_inexact_upper_bound(q, o, 10, 1), std::invalid_argument);
    NoisyOracle own = NoisyOracle::relative(q, 0.1, 3);
    EXPECT_THROW(verify_inexact_upper_bound(q, own, 0, 1), std::invalid_argument);
}

// ---------------------------------------------------------------------------
// Descent inequality and monotonicity
// ---------------------------------------------------------------------------

TEST(DescentInequality, QuadraticConvergesMonotonically) {
    ConvexQuadratic q(kSpectrum, 2024);
    NoisyOracle o = NoisyOracle::relative(q, 0.3, 5);
    const DescentInterval iv = descent_interval(1.0, 1.0, q.lipschitz_L(), 0.3);
    const auto [lo, hi] = iv.monotone_range();
    const TheoryReport r = verify_descent_inequality(q, o, 1.0, 1.0, {lo, iv.midpoint(), hi}, {1, -1.5, 0.5, 2, -0.5}, 500);
    EXPECT_TRUE(r.passed) << r.to_line();
    EXPECT_EQ(r.monotone_violations, 0u);
    EXPECT_LT(r.final_grad_norm, 1e-6);
}

TEST(DescentInequality, BoundaryStepsStillSatisfyBound) {
    QuarticRegularized f(kSpectrum, 0.1, 3.0, 4);
    NoisyOracle o = NoisyOracle::relative(f, 0.3, 6);
    const DescentInterval iv = descent_interval(1.0, 1.0, f.lipschitz_L(), 0.3);
    const TheoryReport r =
        verify_descent_inequality(f, o, 1.0, 1.0, {iv.t1_bar, iv.t2_bar}, {1, -1.5, 0.5, 2, -0.5}, 500);
    EXPECT_TRUE(r.passed) << r.to_line();
}

TEST(DescentInequality, SuitePassesOnAllFunctions) {
    const auto reports = run_descent_suite();
    ASSERT_EQ(reports.size(), 6u);
    for (const auto& r : reports) {
        EXPECT_TRUE(r.passed) << r.to_line();
        EXPECT_EQ(r.samples, 2500u);
        EXPECT_EQ(r.clipped, 0u);
    }
}

TEST(DescentInequality, RejectsInvalidSetups) {
    ConvexQuadratic q(kSpectrum, 1);
    NoisyOracle rel = NoisyOracle::relative(q, 0.3, 3);
    const DescentInterval iv = descent_interval(1.0, 1.0, q.lipschitz_L(), 0.3);
    const Vector z0(5, 1.0);
    EXPECT_THROW(verify_descent_inequality(q, rel, 1, 1, {iv.t2_bar * 1.01}, z0), std::invalid_argument);
    EXPECT_THROW(verify_descent_inequality(q, rel, 1, 1, {iv.t1_bar * 0.99}, z0), std::invalid_argument);
    EXPECT_THROW(verify_descent_inequality(q, rel, 1, 1, {}, z0), std::invalid_argument);
    EXPECT_THROW(verify_descent_inequality(q, rel, 1, 0.5, {iv.midpoint()}, z0), std::invalid_argument);
    NoisyOracle absolute = NoisyOracle::summable(q, 0.1, 3);
    EXPECT_THROW(verify_descent_inequality(q, absolute, 1, 1, {iv.midpoint()}, z0), std::invalid_argument);
    NoisyOracle too_noisy = NoisyOracle::relative(q, 0.9, 3);
    EXPECT_THROW(verify_descent_inequality(q, too_noisy, 1, 1, {0.1}, z0), std::domain_error);
}

TEST(DescentInequality, LargeStepOutsideIntervalCanBreakMonotonicity) {
    // Past 2/L the exact quadratic iteration diverges, so the interval is
    // not vacuous.
    ConvexQuadratic q(kSpectrum, 1);
    Vector z = {1, -1.5, 0.5, 2, -0.5};
    double f = q.evaluate(z);
    bool increased = false;
    for (int k = 0; k < 50; ++k) {
        const Vector g = q.gradient(z);
        for (std::size_t i = 0; i < 5; ++i) z[i] -= 0.9 * g[i];
        const double fn = q.evaluate(z);
        increased = increased || fn > f;
        f = fn;
    }
    EXPECT_TRUE(increased);
}

// ---------------------------------------------------------------------------
// Diminishing steps
// ---------------------------------------------------------------------------

TEST(Diminishing, ExactQuadraticReachesTightTolerance) {
    ConvexQuadratic q(kSpectrum, 2024);
    NoisyOracle o = NoisyOracle::summable(q, 0.0, 1);
    const TheoryReport r = verify_diminishing_convergence(q, o, 2.0, {1, -1.5, 0.5, 2, -0.5});
    EXPECT_TRUE(r.passed) << r.to_line();
    EXPECT_LT(r.final_grad_norm, 1e-6);
}

TEST(Diminishing, SummableNoiseMeetsTailCriterion) {
    ConvexQuadratic q(kSpectrum, 2024);
    NoisyOracle o = NoisyOracle::summable(q, 0.1, 1);
    const TheoryReport r = verify_diminishing_convergence(q, o, 2.0, {1, -1.5, 0.5, 2, -0.5});
    EXPECT_TRUE(r.passed) << r.to_line();
    EXPECT_LT(r.tail_average, kDiminishingTailThreshold);
    EXPECT_LT(r.min_grad_norm, kDiminishingMinThreshold);
}

TEST(Diminishing, SuitePassesOnAllFunctions) {
    const auto reports = run_diminishing_suite();
    ASSERT_EQ(reports.size(), 6u);
    for (const auto& r : reports) EXPECT_TRUE(r.passed) << r.to_line();
}

TEST(Diminishing, RejectsNonpositiveInitialStep) {
    ConvexQuadratic q(kSpectrum, 1);
    NoisyOracle o = NoisyOracle::summable(q, 0.1, 1);
    EXPECT_THROW(verify_diminishing_convergence(q, o, 0.0, Vector(5, 1.0)), std::invalid_argument);
    EXPECT_THROW(verify_diminishing_convergence(q, o, -1.0, Vector(5, 1.0)), std::invalid_argument);
}

// ---------------------------------------------------------------------------
// Reports
// ---------------------------------------------------------------------------

TEST(Reports, AllSuitesPassAndAreDeterministic) {
    const auto a = run_all_suites();
    const auto b = run_all_suites();
    ASSERT_EQ(a.size(), b.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
        EXPECT_TRUE(a[i].passed) << a[i].to_line();
        EXPECT_EQ(a[i].to_line(), b[i].to_line());
    }
}

TEST(Reports, LineCarriesKeysAndStatus) {
    TheoryReport r;
    r.check = "demo";
    r.function = "f";
    r.oracle = "o";
    r.samples = 3;
    r.passed = true;
    const std::string line = r.to_line();
    EXPECT_NE(line.find("check=demo"), std::string::npos);
    EXPECT_NE(line.find("samples=3"), std::string::npos);
    EXPECT_EQ(line.find("tail_average"), std::string::npos);
    EXPECT_EQ(line.substr(line.size() - 11), "status=PASS");
}
