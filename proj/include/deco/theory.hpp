#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "deco/linsolve.hpp"
#include "deco/rng.hpp"

namespace deco::theory {

/// L-smooth objective on a closed convex domain. L is an analytic upper
/// bound valid on the whole domain; project() maps a point back into it.
class SmoothTestFunction {
public:
    virtual ~SmoothTestFunction() = default;

    [[nodiscard]] virtual std::string name() const = 0;
    [[nodiscard]] virtual std::size_t dimension() const = 0;
    [[nodiscard]] virtual double evaluate(const Vector& z) const = 0;
    [[nodiscard]] virtual Vector gradient(const Vector& z) const = 0;
    [[nodiscard]] virtual double lipschitz_L() const = 0;
    [[nodiscard]] virtual double lower_bound() const = 0;
    /// Nearest point of the domain; the identity on interior points.
    [[nodiscard]] virtual Vector project(const Vector& z) const = 0;
    /// Random point of the domain.
    [[nodiscard]] virtual Vector sample(Rng& rng) const = 0;
};

/// 0.5 z^T Q z with Q = U diag(spectrum) U^T and U a seeded random
/// orthogonal matrix. Domain is all of R^m; L = max(spectrum).
/// sample() draws from the box [-2, 2]^m.
class ConvexQuadratic final : public SmoothTestFunction {
public:
    ConvexQuadratic(Vector spectrum, std::uint64_t seed);

    [[nodiscard]] std::string name() const override { return "quadratic"; }
    [[nodiscard]] std::size_t dimension() const override { return spectrum_.size(); }
    [[nodiscard]] double evaluate(const Vector& z) const override;
    [[nodiscard]] Vector gradient(const Vector& z) const override;
    [[nodiscard]] double lipschitz_L() const override;
    [[nodiscard]] double lower_bound() const override { return 0.0; }
    [[nodiscard]] Vector project(const Vector& z) const override { return z; }
    [[nodiscard]] Vector sample(Rng& rng) const override;

    [[nodiscard]] double mu() const;
    [[nodiscard]] const std::vector<Vector>& matrix() const noexcept { return Q_; }

private:
    Vector spectrum_;
    std::vector<Vector> Q_;
};

/// 0.5 z^T Q z + (sigma/4)||z||^4 on the ball ||z|| <= radius. The Hessian
/// Q + sigma(||z||^2 I + 2 z z^T) gives L = max(spectrum) + 3 sigma R^2.
class QuarticRegularized final : public SmoothTestFunction {
public:
    QuarticRegularized(Vector spectrum, double sigma, double radius, std::uint64_t seed);

    [[nodiscard]] std::string name() const override { return "quartic"; }
    [[nodiscard]] std::size_t dimension() const override { return quad_.dimension(); }
    [[nodiscard]] double evaluate(const Vector& z) const override;
    [[nodiscard]] Vector gradient(const Vector& z) const override;
    [[nodiscard]] double lipschitz_L() const override;
    [[nodiscard]] double lower_bound() const override { return 0.0; }
    [[nodiscard]] Vector project(const Vector& z) const override;
    [[nodiscard]] Vector sample(Rng& rng) const override;

    [[nodiscard]] double radius() const noexcept { return radius_; }

private:
    ConvexQuadratic quad_;
    double sigma_;
    double radius_;
};

/// sum_i (1 - x_i)^2 + b sum_i (x_{i+1} - x_i^2)^2 on the box [-B, B]^m.
/// L is the Gershgorin bound 2 + 2b + 12 b B^2 + 12 b B on the Hessian.
class BoxRosenbrock final : public SmoothTestFunction {
public:
    BoxRosenbrock(std::size_t dimension, double b, double half_width);

    [[nodiscard]] std::string name() const override { return "rosenbrock"; }
    [[nodiscard]] std::size_t dimension() const override { return m_; }
    [[nodiscard]] double evaluate(const Vector& z) const override;
    [[nodiscard]] Vector gradient(const Vector& z) const override;
    [[nodiscard]] double lipschitz_L() const override;
    [[nodiscard]] double lower_bound() const override { return 0.0; }
    [[nodiscard]] Vector project(const Vector& z) const override;
    [[nodiscard]] Vector sample(Rng& rng) const override;

    /// Dense Hessian, for certifying L by sampling.
    [[nodiscard]] std::vector<Vector> hessian(const Vector& z) const;

private:
    std::size_t m_;
    double b_;
    double half_width_;
};

/// The three functions used by the verification suites, all with m = 5.
std::vector<std::unique_ptr<SmoothTestFunction>> standard_test_functions(std::uint64_t seed = 7);

/// g + rho v with v a uniform unit vector and rho uniform in
/// [0, beta ||g|| / (1 + beta)], so that ||g_bar - g|| <= beta ||g_bar||.
/// Requires 0 <= beta < 1.
Vector relative_noisy_gradient(const Vector& g, double beta, Rng& rng);

/// g + rho v with rho uniform in [0, delta].
Vector absolute_noisy_gradient(const Vector& g, double delta, Rng& rng);

struct NoisySample {
    Vector g_bar;
    Vector g;
    /// Error bound the oracle guarantees for this draw.
    double bound = 0.0;
    /// Realized ||g_bar - g||.
    double error = 0.0;
};

/// Inexact gradients with exactly controlled error.
class NoisyOracle {
public:
    enum class Mode { Relative, Absolute };

    static NoisyOracle relative(const SmoothTestFunction& fn, double beta, std::uint64_t seed);
    /// delta(k) is the bound at iteration k.
    static NoisyOracle absolute(const SmoothTestFunction& fn, std::function<double(std::size_t)> delta,
                                std::uint64_t seed);
    /// delta_k = delta0 / (k+1)^2, which is summable.
    static NoisyOracle summable(const SmoothTestFunction& fn, double delta0, std::uint64_t seed);

    NoisySample evaluate(const Vector& z, std::size_t k);

    [[nodiscard]] Mode mode() const noexcept { return mode_; }
    [[nodiscard]] double beta() const noexcept { return beta_; }
    [[nodiscard]] const SmoothTestFunction& function() const noexcept { return *fn_; }
    [[nodiscard]] std::string describe() const;

private:
    NoisyOracle(const SmoothTestFunction& fn, Mode mode, double beta, std::function<double(std::size_t)> delta,
                std::uint64_t seed, std::string label);

    const SmoothTestFunction* fn_;
    Mode mode_;
    double beta_;
    std::function<double(std::size_t)> delta_;
    Rng rng_;
    std::string label_;
};

/// Step-size interval for monotone descent with relative gradient error.
/// With L' = L + 1 and Delta = c1'^2 - L' c2'^2 beta^2, the endpoints are
/// the roots of (c2'^2 L'/2) t^2 - c1' t + beta^2/2.
struct DescentInterval {
    double t1_bar = 0.0;
    double t2_bar = 0.0;
    double Delta = 0.0;
    double c1p = 0.0;
    double c2p = 0.0;
    double L_prime = 0.0;
    double beta = 0.0;

    [[nodiscard]] double width() const noexcept { return t2_bar - t1_bar; }
    [[nodiscard]] double midpoint() const noexcept { return 0.5 * (t1_bar + t2_bar); }
    /// 2 c1' / (c2'^2 L'), the exact-gradient upper end.
    [[nodiscard]] double upper_limit() const noexcept;
    /// Coefficient of ||g_bar||^2 in the guaranteed decrease at step t.
    [[nodiscard]] double decrease_coefficient(double t) const noexcept;
    /// [t1 + gamma, t2 - gamma]; gamma defaults to width/4 and must lie in
    /// (0, width/2].
    [[nodiscard]] std::pair<double, double> monotone_range(std::optional<double> gamma = std::nullopt) const;
};

/// Largest admissible beta, c1' / (sqrt(L') c2'), exclusive.
double max_relative_error(double c1p, double c2p, double L);

/// Throws std::domain_error when beta is at or beyond max_relative_error
/// and std::invalid_argument on nonpositive constants or negative beta.
DescentInterval descent_interval(double c1p, double c2p, double L, double beta);

struct TheoryReport {
    std::string check;
    std::string function;
    std::string oracle;
    std::size_t samples = 0;
    std::size_t violations = 0;
    /// Smallest rhs - lhs over all checked inequalities.
    double worst_margin = 0.0;
    std::size_t monotone_violations = 0;
    /// Iterates moved by the domain projection.
    std::size_t clipped = 0;
    /// Run-based checks only; NaN otherwise.
    double final_grad_norm;
    double min_grad_norm;
    double tail_average;
    bool passed = false;
    std::string detail;

    TheoryReport();
    /// Single key=value line.
    [[nodiscard]] std::string to_line() const;
};

/// Central differences against gradient() on random domain points;
/// violations count relative errors above tol.
TheoryReport verify_gradient(const SmoothTestFunction& fn, std::size_t trials, std::uint64_t seed, double tol = 1e-6);

/// ||grad(x) - grad(z)|| <= L ||x - z|| on random pairs.
TheoryReport verify_lipschitz(const SmoothTestFunction& fn, std::size_t trials, std::uint64_t seed);

/// F(x) <= F(z) + g_bar(z)^T (x - z) + (L'/2)||x - z||^2 + e^2/2 on random
/// pairs, with e the realized gradient error at z. Half of the pairs are
/// local perturbations, where the quadratic term is nearly tight.
TheoryReport verify_inexact_upper_bound(const SmoothTestFunction& fn, NoisyOracle& oracle, std::size_t trials,
                                        std::uint64_t seed);

/// For each step t in the grid (inside [t1_bar, t2_bar]), runs iterations
/// of z <- z - t P g_bar with P diagonal, entries spread over [c1', c2'],
/// so that both direction conditions hold. Checks the guaranteed decrease
/// and monotonicity of the exact objective at every step. Requires a
/// relative-mode oracle.
TheoryReport verify_descent_inequality(const SmoothTestFunction& fn, NoisyOracle& oracle, double c1p, double c2p,
                                       const std::vector<double>& step_grid, const Vector& z0,
                                       std::size_t iterations = 500);

/// 0 <= t1 < t2 <= 2 c1'/(c2'^2 L') on random admissible tuples, agreement
/// with the textbook root formula, root residuals, and strict shrinkage of
/// the width in beta on fixed constants.
TheoryReport verify_interval_properties(std::size_t trials, std::uint64_t seed);

/// z <- project(z - t_k g_bar) with t_k = t0/(k+1). Passes when the minimum
/// of ||g_bar|| falls below 1e-3 and its average over the last 10% of the
/// horizon is below 1e-2.
TheoryReport verify_diminishing_convergence(const SmoothTestFunction& fn, NoisyOracle& oracle, double t0,
                                            const Vector& z0, std::size_t iterations = 10'000);

/// Threshold constants of the finite-horizon proxy.
inline constexpr double kDiminishingMinThreshold = 1e-3;
inline constexpr double kDiminishingTailThreshold = 1e-2;

struct SuiteOptions {
    std::uint64_t seed = 2024;
    std::size_t upper_bound_trials = 10'000;
    std::size_t interval_trials = 1'000;
    std::size_t descent_iterations = 500;
    std::size_t diminishing_iterations = 10'000;
};

/// Theory suites over the standard functions with beta in {0, 0.1, 0.3}.
std::vector<TheoryReport> run_upper_bound_suite(const SuiteOptions& opts = {});
/// Constant-step descent with the relative oracle on every function.
std::vector<TheoryReport> run_descent_suite(const SuiteOptions& opts = {});
/// Diminishing steps with summable absolute errors, delta0 in {0, 0.1}.
std::vector<TheoryReport> run_diminishing_suite(const SuiteOptions& opts = {});
/// Everything above plus the interval and smoothness checks.
std::vector<TheoryReport> run_all_suites(const SuiteOptions& opts = {});

} // namespace deco::theory
