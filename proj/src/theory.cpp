#include "deco/theory.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace deco::theory {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

// Rounding allowance for inequalities whose two sides are evaluated in
// floating point, relative to the magnitude of the terms involved.
constexpr double kRoundoff = 1e-13;

Vector sub(const Vector& a, const Vector& b) {
    Vector out(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) out[i] = a[i] - b[i];
    return out;
}

Vector unit_vector(std::size_t m, Rng& rng) {
    Vector v(m);
    double n = 0.0;
    do {
        for (double& x : v) x = rng.normal();
        n = norm2(v);
    } while (n == 0.0);
    for (double& x : v) x /= n;
    return v;
}

// Modified Gram-Schmidt on Gaussian columns; rows of the result are
// orthonormal.
std::vector<Vector> random_orthogonal(std::size_t m, Rng& rng) {
    std::vector<Vector> u;
    while (u.size() < m) {
        Vector v(m);
        for (double& x : v) x = rng.normal();
        for (const Vector& q : u) {
            const double p = dot(v, q);
            for (std::size_t i = 0; i < m; ++i) v[i] -= p * q[i];
        }
        const double n = norm2(v);
        if (n < 1e-8) continue;
        for (double& x : v) x /= n;
        u.push_back(std::move(v));
    }
    return u;
}

double max_of(const Vector& v) { return *std::max_element(v.begin(), v.end()); }

std::string fmt(double x) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.6g", x);
    return buf;
}

void require_dimension(const Vector& z, std::size_t m, const char* who) {
    if (z.size() != m) throw std::invalid_argument(std::string(who) + ": dimension mismatch");
}

} // namespace

// ---------------------------------------------------------------------------
// Test functions
// ---------------------------------------------------------------------------

ConvexQuadratic::ConvexQuadratic(Vector spectrum, std::uint64_t seed) : spectrum_(std::move(spectrum)) {
    if (spectrum_.empty()) throw std::invalid_argument("ConvexQuadratic: empty spectrum");
    for (double l : spectrum_)
        if (!(l > 0.0)) throw std::invalid_argument("ConvexQuadratic: spectrum must be positive");
    const std::size_t m = spectrum_.size();
    Rng rng(seed);
    const std::vector<Vector> u = random_orthogonal(m, rng);
    Q_.assign(m, Vector(m, 0.0));
    for (std::size_t k = 0; k < m; ++k)
        for (std::size_t i = 0; i < m; ++i)
            for (std::size_t j = 0; j < m; ++j) Q_[i][j] += spectrum_[k] * u[k][i] * u[k][j];
    for (std::size_t i = 0; i < m; ++i)
        for (std::size_t j = 0; j < i; ++j) Q_[i][j] = Q_[j][i] = 0.5 * (Q_[i][j] + Q_[j][i]);
}

double ConvexQuadratic::evaluate(const Vector& z) const {
    require_dimension(z, dimension(), "quadratic");
    return 0.5 * dot(z, gradient(z));
}

Vector ConvexQuadratic::gradient(const Vector& z) const {
    require_dimension(z, dimension(), "quadratic");
    Vector g(z.size());
    for (std::size_t i = 0; i < z.size(); ++i) g[i] = dot(Q_[i], z);
    return g;
}

double ConvexQuadratic::lipschitz_L() const { return max_of(spectrum_); }

double ConvexQuadratic::mu() const { return *std::min_element(spectrum_.begin(), spectrum_.end()); }

Vector ConvexQuadratic::sample(Rng& rng) const {
    Vector z(dimension());
    for (double& x : z) x = rng.uniform(-2.0, 2.0);
    return z;
}

QuarticRegularized::QuarticRegularized(Vector spectrum, double sigma, double radius, std::uint64_t seed)
    : quad_(std::move(spectrum), seed), sigma_(sigma), radius_(radius) {
    if (!(sigma >= 0.0)) throw std::invalid_argument("QuarticRegularized: sigma must be nonnegative");
    if (!(radius > 0.0)) throw std::invalid_argument("QuarticRegularized: radius must be positive");
}

double QuarticRegularized::evaluate(const Vector& z) const {
    const double r2 = dot(z, z);
    return quad_.evaluate(z) + 0.25 * sigma_ * r2 * r2;
}

Vector QuarticRegularized::gradient(const Vector& z) const {
    Vector g = quad_.gradient(z);
    const double s = sigma_ * dot(z, z);
    for (std::size_t i = 0; i < g.size(); ++i) g[i] += s * z[i];
    return g;
}

double QuarticRegularized::lipschitz_L() const { return quad_.lipschitz_L() + 3.0 * sigma_ * radius_ * radius_; }

Vector QuarticRegularized::project(const Vector& z) const {
    const double n = norm2(z);
    if (n <= radius_) return z;
    Vector out(z);
    for (double& x : out) x *= radius_ / n;
    return out;
}

Vector QuarticRegularized::sample(Rng& rng) const {
    Vector v = unit_vector(dimension(), rng);
    const double r = radius_ * std::pow(rng.uniform01(), 1.0 / static_cast<double>(dimension()));
    for (double& x : v) x *= r;
    return v;
}

BoxRosenbrock::BoxRosenbrock(std::size_t dimension, double b, double half_width)
    : m_(dimension), b_(b), half_width_(half_width) {
    if (m_ < 2) throw std::invalid_argument("BoxRosenbrock: dimension must be at least 2");
    if (!(b > 0.0)) throw std::invalid_argument("BoxRosenbrock: b must be positive");
    if (!(half_width > 0.0)) throw std::invalid_argument("BoxRosenbrock: half width must be positive");
}

double BoxRosenbrock::evaluate(const Vector& z) const {
    require_dimension(z, m_, "rosenbrock");
    double f = 0.0;
    for (std::size_t i = 0; i < m_; ++i) f += (1.0 - z[i]) * (1.0 - z[i]);
    for (std::size_t i = 0; i + 1 < m_; ++i) {
        const double r = z[i + 1] - z[i] * z[i];
        f += b_ * r * r;
    }
    return f;
}

Vector BoxRosenbrock::gradient(const Vector& z) const {
    require_dimension(z, m_, "rosenbrock");
    Vector g(m_);
    for (std::size_t i = 0; i < m_; ++i) g[i] = -2.0 * (1.0 - z[i]);
    for (std::size_t i = 0; i + 1 < m_; ++i) {
        const double r = z[i + 1] - z[i] * z[i];
        g[i] -= 4.0 * b_ * z[i] * r;
        g[i + 1] += 2.0 * b_ * r;
    }
    return g;
}

std::vector<Vector> BoxRosenbrock::hessian(const Vector& z) const {
    require_dimension(z, m_, "rosenbrock");
    std::vector<Vector> H(m_, Vector(m_, 0.0));
    for (std::size_t i = 0; i < m_; ++i) H[i][i] = 2.0;
    for (std::size_t i = 0; i + 1 < m_; ++i) {
        H[i][i] += b_ * (12.0 * z[i] * z[i] - 4.0 * z[i + 1]);
        H[i + 1][i + 1] += 2.0 * b_;
        H[i][i + 1] -= 4.0 * b_ * z[i];
        H[i + 1][i] -= 4.0 * b_ * z[i];
    }
    return H;
}

double BoxRosenbrock::lipschitz_L() const {
    const double B = half_width_;
    return 2.0 + 2.0 * b_ + 12.0 * b_ * B * B + 12.0 * b_ * B;
}

Vector BoxRosenbrock::project(const Vector& z) const {
    Vector out(z);
    for (double& x : out) x = std::clamp(x, -half_width_, half_width_);
    return out;
}

Vector BoxRosenbrock::sample(Rng& rng) const {
    Vector z(m_);
    for (double& x : z) x = rng.uniform(-half_width_, half_width_);
    return z;
}

std::vector<std::unique_ptr<SmoothTestFunction>> standard_test_functions(std::uint64_t seed) {
    const Vector spectrum = {1.0, 1.375, 1.75, 2.125, 2.5};
    std::vector<std::unique_ptr<SmoothTestFunction>> fns;
    fns.push_back(std::make_unique<ConvexQuadratic>(spectrum, seed));
    fns.push_back(std::make_unique<QuarticRegularized>(spectrum, 0.1, 3.0, seed + 1));
    fns.push_back(std::make_unique<BoxRosenbrock>(5, 0.5, 1.5));
    return fns;
}

// ---------------------------------------------------------------------------
// Noisy oracles
// ---------------------------------------------------------------------------

Vector relative_noisy_gradient(const Vector& g, double beta, Rng& rng) {
    if (!(beta >= 0.0 && beta < 1.0)) throw std::invalid_argument("relative_noisy_gradient: beta must lie in [0, 1)");
    const double rho = rng.uniform01() * beta * norm2(g) / (1.0 + beta);
    const Vector v = unit_vector(g.size(), rng);
    Vector out(g);
    for (std::size_t i = 0; i < g.size(); ++i) out[i] += rho * v[i];
    return out;
}

Vector absolute_noisy_gradient(const Vector& g, double delta, Rng& rng) {
    if (!(delta >= 0.0)) throw std::invalid_argument("absolute_noisy_gradient: delta must be nonnegative");
    const double rho = rng.uniform01() * delta;
    const Vector v = unit_vector(g.size(), rng);
    Vector out(g);
    for (std::size_t i = 0; i < g.size(); ++i) out[i] += rho * v[i];
    return out;
}

NoisyOracle::NoisyOracle(const SmoothTestFunction& fn, Mode mode, double beta,
                         std::function<double(std::size_t)> delta, std::uint64_t seed, std::string label)
    : fn_(&fn), mode_(mode), beta_(beta), delta_(std::move(delta)), rng_(seed), label_(std::move(label)) {}

NoisyOracle NoisyOracle::relative(const SmoothTestFunction& fn, double beta, std::uint64_t seed) {
    if (!(beta >= 0.0 && beta < 1.0)) throw std::invalid_argument("NoisyOracle: beta must lie in [0, 1)");
    return NoisyOracle(fn, Mode::Relative, beta, {}, seed, "relative(beta=" + fmt(beta) + ")");
}

NoisyOracle NoisyOracle::absolute(const SmoothTestFunction& fn, std::function<double(std::size_t)> delta,
                                  std::uint64_t seed) {
    if (!delta) throw std::invalid_argument("NoisyOracle: empty delta sequence");
    return NoisyOracle(fn, Mode::Absolute, 0.0, std::move(delta), seed, "absolute");
}

NoisyOracle NoisyOracle::summable(const SmoothTestFunction& fn, double delta0, std::uint64_t seed) {
    if (!(delta0 >= 0.0)) throw std::invalid_argument("NoisyOracle: delta0 must be nonnegative");
    auto seq = [delta0](std::size_t k) {
        const double d = static_cast<double>(k + 1);
        return delta0 / (d * d);
    };
    NoisyOracle o(fn, Mode::Absolute, 0.0, seq, seed, "summable(delta0=" + fmt(delta0) + ")");
    return o;
}

NoisySample NoisyOracle::evaluate(const Vector& z, std::size_t k) {
    NoisySample s;
    s.g = fn_->gradient(z);
    if (mode_ == Mode::Relative) {
        s.g_bar = relative_noisy_gradient(s.g, beta_, rng_);
        s.bound = beta_ * norm2(s.g_bar);
    } else {
        s.bound = delta_(k);
        s.g_bar = absolute_noisy_gradient(s.g, s.bound, rng_);
    }
    s.error = norm2(sub(s.g_bar, s.g));
    return s;
}

std::string NoisyOracle::describe() const { return label_; }

// ---------------------------------------------------------------------------
// Descent interval
// ---------------------------------------------------------------------------

double DescentInterval::upper_limit() const noexcept { return (2.0 * c1p) / (c2p * c2p * L_prime); }

double DescentInterval::decrease_coefficient(double t) const noexcept {
    return c2p * c2p * L_prime / 2.0 * (t - t1_bar) * (t2_bar - t);
}

std::pair<double, double> DescentInterval::monotone_range(std::optional<double> gamma) const {
    const double g = gamma.value_or(width() / 4.0);
    if (!(g > 0.0 && g <= width() / 2.0)) throw std::invalid_argument("monotone_range: gamma must lie in (0, width/2]");
    return {t1_bar + g, t2_bar - g};
}

double max_relative_error(double c1p, double c2p, double L) { return c1p / (std::sqrt(L + 1.0) * c2p); }

DescentInterval descent_interval(double c1p, double c2p, double L, double beta) {
    if (!(c1p > 0.0 && c2p > 0.0 && L > 0.0)) throw std::invalid_argument("descent_interval: constants must be positive");
    if (!(beta >= 0.0)) throw std::invalid_argument("descent_interval: beta must be nonnegative");
    DescentInterval iv;
    iv.c1p = c1p;
    iv.c2p = c2p;
    iv.L_prime = L + 1.0;
    iv.beta = beta;
    iv.Delta = c1p * c1p - iv.L_prime * c2p * c2p * beta * beta;
    if (!(iv.Delta > 0.0) || !(beta < max_relative_error(c1p, c2p, L)))
        throw std::domain_error("descent_interval: beta leaves no admissible step sizes");
    // sqrt(Delta) <= c1' holds exactly in floating point, so t2 never
    // exceeds the exact-gradient limit; t1 uses the product of the roots
    // to avoid cancellation.
    const double root = std::sqrt(iv.Delta);
    const double denom = c2p * c2p * iv.L_prime;
    iv.t2_bar = (c1p + root) / denom;
    iv.t1_bar = beta * beta / (c1p + root);
    return iv;
}

// ---------------------------------------------------------------------------
// Reports
// ---------------------------------------------------------------------------

TheoryReport::TheoryReport() : final_grad_norm(kNaN), min_grad_norm(kNaN), tail_average(kNaN) {}

std::string TheoryReport::to_line() const {
    std::ostringstream os;
    os << "check=" << check << " function=" << function << " oracle=" << oracle << " samples=" << samples
       << " violations=" << violations << " worst_margin=" << fmt(worst_margin)
       << " monotone_violations=" << monotone_violations << " clipped=" << clipped;
    if (!std::isnan(final_grad_norm)) os << " final_grad_norm=" << fmt(final_grad_norm);
    if (!std::isnan(min_grad_norm)) os << " min_grad_norm=" << fmt(min_grad_norm);
    if (!std::isnan(tail_average)) os << " tail_average=" << fmt(tail_average);
    if (!detail.empty()) os << " detail=" << detail;
    os << " status=" << (passed ? "PASS" : "FAIL");
    return os.str();
}

TheoryReport verify_gradient(const SmoothTestFunction& fn, std::size_t trials, std::uint64_t seed, double tol) {
    TheoryReport rep;
    rep.check = "gradient_fd";
    rep.function = fn.name();
    rep.oracle = "exact";
    rep.worst_margin = std::numeric_limits<double>::infinity();
    Rng rng(seed);
    const std::size_t m = fn.dimension();
    for (std::size_t t = 0; t < trials; ++t) {
        const Vector z = fn.sample(rng);
        const Vector g = fn.gradient(z);
        Vector fd(m);
        for (std::size_t i = 0; i < m; ++i) {
            const double h = 1e-5 * std::max(1.0, std::abs(z[i]));
            Vector zp(z), zm(z);
            zp[i] += h;
            zm[i] -= h;
            fd[i] = (fn.evaluate(zp) - fn.evaluate(zm)) / (2.0 * h);
        }
        const double err = norm2(sub(fd, g)) / std::max(1.0, norm2(g));
        rep.worst_margin = std::min(rep.worst_margin, tol - err);
        if (err > tol) ++rep.violations;
        ++rep.samples;
    }
    rep.passed = rep.samples > 0 && rep.violations == 0;
    return rep;
}

TheoryReport verify_lipschitz(const SmoothTestFunction& fn, std::size_t trials, std::uint64_t seed) {
    TheoryReport rep;
    rep.check = "lipschitz";
    rep.function = fn.name();
    rep.oracle = "exact";
    rep.worst_margin = std::numeric_limits<double>::infinity();
    Rng rng(seed);
    const double L = fn.lipschitz_L();
    double worst_ratio = 0.0;
    for (std::size_t t = 0; t < trials; ++t) {
        const Vector z = fn.sample(rng);
        Vector x = fn.sample(rng);
        if (t % 2 == 1) {
            // Close pairs probe the local Hessian norm.
            const Vector v = unit_vector(z.size(), rng);
            const double r = 1e-3 * rng.uniform01();
            for (std::size_t i = 0; i < x.size(); ++i) x[i] = z[i] + r * v[i];
            x = fn.project(x);
        }
        const double d = norm2(sub(x, z));
        if (d == 0.0) continue;
        const double lhs = norm2(sub(fn.gradient(x), fn.gradient(z)));
        const double rhs = L * d;
        worst_ratio = std::max(worst_ratio, lhs / d);
        rep.worst_margin = std::min(rep.worst_margin, rhs - lhs);
        if (lhs > rhs * (1.0 + kRoundoff)) ++rep.violations;
        ++rep.samples;
    }
    rep.detail = "max_ratio=" + fmt(worst_ratio) + ",L=" + fmt(L);
    rep.passed = rep.samples > 0 && rep.violations == 0;
    return rep;
}

TheoryReport verify_inexact_upper_bound(const SmoothTestFunction& fn, NoisyOracle& oracle, std::size_t trials,
                                        std::uint64_t seed) {
    if (trials == 0) throw std::invalid_argument("verify_inexact_upper_bound: trials must be positive");
    if (&oracle.function() != &fn) throw std::invalid_argument("verify_inexact_upper_bound: oracle wraps another function");
    TheoryReport rep;
    rep.check = "inexact_upper_bound";
    rep.function = fn.name();
    rep.oracle = oracle.describe();
    rep.worst_margin = std::numeric_limits<double>::infinity();
    Rng rng(seed);
    const double Lp = fn.lipschitz_L() + 1.0;
    std::size_t bound_violations = 0;
    for (std::size_t t = 0; t < trials; ++t) {
        const Vector z = fn.sample(rng);
        Vector x;
        if (t % 100 == 0) {
            x = z;
        } else if (t % 2 == 0) {
            x = fn.sample(rng);
        } else {
            const Vector v = unit_vector(z.size(), rng);
            const double r = std::pow(10.0, rng.uniform(-4.0, 0.0));
            x = z;
            for (std::size_t i = 0; i < x.size(); ++i) x[i] += r * v[i];
            x = fn.project(x);
        }
        const NoisySample s = oracle.evaluate(z, t);
        if (s.error > s.bound * (1.0 + kRoundoff)) ++bound_violations;
        const Vector d = sub(x, z);
        const double fz = fn.evaluate(z);
        const double fx = fn.evaluate(x);
        const double lin = dot(s.g_bar, d);
        const double quad = 0.5 * Lp * dot(d, d);
        const double noise = 0.5 * s.error * s.error;
        const double rhs = fz + lin + quad + noise;
        const double scale = std::abs(fz) + std::abs(fx) + std::abs(lin) + quad + noise;
        const double margin = rhs - fx;
        rep.worst_margin = std::min(rep.worst_margin, margin);
        if (margin < -kRoundoff * scale) ++rep.violations;
        ++rep.samples;
    }
    rep.violations += bound_violations;
    if (bound_violations > 0) rep.detail = "oracle_bound_violations=" + std::to_string(bound_violations);
    rep.passed = rep.violations == 0;
    return rep;
}

TheoryReport verify_descent_inequality(const SmoothTestFunction& fn, NoisyOracle& oracle, double c1p, double c2p,
                                       const std::vector<double>& step_grid, const Vector& z0,
                                       std::size_t iterations) {
    if (oracle.mode() != NoisyOracle::Mode::Relative)
        throw std::invalid_argument("verify_descent_inequality: needs a relative-error oracle");
    if (&oracle.function() != &fn) throw std::invalid_argument("verify_descent_inequality: oracle wraps another function");
    if (step_grid.empty()) throw std::invalid_argument("verify_descent_inequality: empty step grid");
    if (c2p < c1p) throw std::invalid_argument("verify_descent_inequality: c2' must not be below c1'");
    require_dimension(z0, fn.dimension(), "verify_descent_inequality");
    const DescentInterval iv = descent_interval(c1p, c2p, fn.lipschitz_L(), oracle.beta());
    for (double t : step_grid)
        if (!(t >= iv.t1_bar && t <= iv.t2_bar))
            throw std::invalid_argument("verify_descent_inequality: step " + fmt(t) + " outside [t1_bar, t2_bar]");

    const std::size_t m = fn.dimension();
    Vector P(m);
    for (std::size_t i = 0; i < m; ++i)
        P[i] = m == 1 ? c1p : c1p + (c2p - c1p) * static_cast<double>(i) / static_cast<double>(m - 1);

    TheoryReport rep;
    rep.check = "descent_inequality";
    rep.function = fn.name();
    rep.oracle = oracle.describe();
    rep.worst_margin = std::numeric_limits<double>::infinity();
    rep.final_grad_norm = 0.0;
    std::size_t condition_violations = 0;
    for (double t : step_grid) {
        Vector z = z0;
        double fz = fn.evaluate(z);
        for (std::size_t k = 0; k < iterations; ++k) {
            const NoisySample s = oracle.evaluate(z, k);
            Vector dir(m);
            for (std::size_t i = 0; i < m; ++i) dir[i] = -P[i] * s.g_bar[i];
            const double gn = norm2(s.g_bar);
            if (!(c1p * gn * gn * (1.0 - kRoundoff) <= -dot(s.g_bar, dir) && norm2(dir) <= c2p * gn * (1.0 + kRoundoff)))
                ++condition_violations;
            Vector zn(m);
            for (std::size_t i = 0; i < m; ++i) zn[i] = z[i] + t * dir[i];
            const Vector zp = fn.project(zn);
            if (zp != zn) ++rep.clipped;
            const double fn_next = fn.evaluate(zp);
            const double bound = fz - iv.decrease_coefficient(t) * gn * gn;
            // Rounding the new iterate alone moves F by about eps ||g|| ||z||.
            const double scale = std::abs(fz) + std::abs(fn_next) + gn * norm2(zp);
            rep.worst_margin = std::min(rep.worst_margin, bound - fn_next);
            if (fn_next > bound + kRoundoff * scale) ++rep.violations;
            if (fn_next > fz + kRoundoff * scale) ++rep.monotone_violations;
            ++rep.samples;
            z = zp;
            fz = fn_next;
        }
        rep.final_grad_norm = std::max(rep.final_grad_norm, norm2(fn.gradient(z)));
    }
    std::ostringstream os;
    os << "t1_bar=" << fmt(iv.t1_bar) << ",t2_bar=" << fmt(iv.t2_bar) << ",steps=" << step_grid.size();
    if (condition_violations > 0) os << ",direction_condition_violations=" << condition_violations;
    rep.detail = os.str();
    rep.violations += condition_violations;
    rep.passed = rep.violations == 0 && rep.monotone_violations == 0 && rep.clipped == 0;
    return rep;
}

TheoryReport verify_interval_properties(std::size_t trials, std::uint64_t seed) {
    TheoryReport rep;
    rep.check = "interval_properties";
    rep.function = "closed_form";
    rep.oracle = "none";
    rep.worst_margin = std::numeric_limits<double>::infinity();
    Rng rng(seed);
    std::size_t ordering = 0, formula = 0, residual = 0, shrink = 0;
    for (std::size_t t = 0; t < trials; ++t) {
        const double c1 = std::pow(10.0, rng.uniform(-1.5, 0.5));
        const double c2 = c1 * std::pow(10.0, rng.uniform(0.0, 1.0));
        const double L = std::pow(10.0, rng.uniform(-2.0, 2.0));
        const double beta = rng.uniform01() * max_relative_error(c1, c2, L);
        DescentInterval iv;
        try {
            iv = descent_interval(c1, c2, L, beta);
        } catch (const std::domain_error&) {
            // Only possible when beta rounds onto the limit.
            continue;
        }
        ++rep.samples;
        if (!(0.0 <= iv.t1_bar && iv.t1_bar < iv.t2_bar && iv.t2_bar <= iv.upper_limit())) ++ordering;
        rep.worst_margin = std::min(rep.worst_margin, iv.upper_limit() - iv.t2_bar);

        const double Lp = L + 1.0;
        const double delta = c1 * c1 - Lp * c2 * c2 * beta * beta;
        const double t1_text = (c1 - std::sqrt(delta)) / (c2 * c2 * Lp);
        const double t2_text = (c1 + std::sqrt(delta)) / (c2 * c2 * Lp);
        if (std::abs(iv.Delta - delta) > 1e-15 * c1 * c1) ++formula;
        if (std::abs(iv.t1_bar - t1_text) > 1e-12 * iv.t2_bar || std::abs(iv.t2_bar - t2_text) > 1e-14 * iv.t2_bar)
            ++formula;
        for (double r : {iv.t1_bar, iv.t2_bar}) {
            const double q = 0.5 * c2 * c2 * Lp * r * r - c1 * r + 0.5 * beta * beta;
            const double scale = 0.5 * c2 * c2 * Lp * r * r + c1 * r + 0.5 * beta * beta;
            if (std::abs(q) > 1e-12 * scale) ++residual;
        }
        // Width 2 sqrt(Delta)/(c2'^2 L') strictly decreases in beta.
        const double bmax = max_relative_error(c1, c2, L);
        double prev = descent_interval(c1, c2, L, 0.0).width();
        for (int j = 1; j < 20; ++j) {
            const double w = descent_interval(c1, c2, L, bmax * j / 20.0).width();
            if (!(w < prev)) ++shrink;
            prev = w;
        }
    }
    rep.violations = ordering + formula + residual + shrink;
    std::ostringstream os;
    os << "ordering=" << ordering << ",formula=" << formula << ",root_residual=" << residual << ",shrinkage=" << shrink;
    rep.detail = os.str();
    rep.passed = rep.samples > 0 && rep.violations == 0;
    return rep;
}

TheoryReport verify_diminishing_convergence(const SmoothTestFunction& fn, NoisyOracle& oracle, double t0,
                                            const Vector& z0, std::size_t iterations) {
    if (!(t0 > 0.0)) throw std::invalid_argument("verify_diminishing_convergence: t0 must be positive");
    if (iterations < 10) throw std::invalid_argument("verify_diminishing_convergence: horizon too short");
    if (&oracle.function() != &fn)
        throw std::invalid_argument("verify_diminishing_convergence: oracle wraps another function");
    require_dimension(z0, fn.dimension(), "verify_diminishing_convergence");
    TheoryReport rep;
    rep.check = "diminishing_convergence";
    rep.function = fn.name();
    rep.oracle = oracle.describe();
    rep.min_grad_norm = std::numeric_limits<double>::infinity();
    const std::size_t tail_start = iterations - iterations / 10;
    double tail_sum = 0.0;
    std::size_t bound_violations = 0;
    Vector z = fn.project(z0);
    for (std::size_t k = 0; k < iterations; ++k) {
        const NoisySample s = oracle.evaluate(z, k);
        if (s.error > s.bound * (1.0 + kRoundoff)) ++bound_violations;
        const double gn = norm2(s.g_bar);
        rep.min_grad_norm = std::min(rep.min_grad_norm, gn);
        if (k >= tail_start) tail_sum += gn;
        const double t = t0 / static_cast<double>(k + 1);
        Vector zn(z);
        for (std::size_t i = 0; i < z.size(); ++i) zn[i] -= t * s.g_bar[i];
        Vector zp = fn.project(zn);
        if (zp != zn) ++rep.clipped;
        z = std::move(zp);
        ++rep.samples;
    }
    rep.tail_average = tail_sum / static_cast<double>(iterations - tail_start);
    rep.final_grad_norm = norm2(fn.gradient(z));
    rep.violations = bound_violations;
    rep.worst_margin = kDiminishingTailThreshold - rep.tail_average;
    rep.detail = "t0=" + fmt(t0);
    rep.passed = bound_violations == 0 && rep.min_grad_norm < kDiminishingMinThreshold &&
                 rep.tail_average < kDiminishingTailThreshold;
    return rep;
}

// ---------------------------------------------------------------------------
// Suites
// ---------------------------------------------------------------------------

namespace {

Vector start_point(const SmoothTestFunction& fn) {
    if (fn.name() == "rosenbrock") return {-0.4, 0.3, 0.6, 0.2, -0.3};
    return {1.0, -1.5, 0.5, 2.0, -0.5};
}

// t0 mu >= 2 makes the exact diminishing-step error decay like k^-2.
// mu = 1 for the convex functions (their quadratic part); the Rosenbrock
// Hessian is at least 2 I near its minimizer.
double diminishing_t0(const SmoothTestFunction& fn) { return fn.name() == "rosenbrock" ? 1.0 : 2.0; }

} // namespace

std::vector<TheoryReport> run_upper_bound_suite(const SuiteOptions& opts) {
    std::vector<TheoryReport> out;
    const auto fns = standard_test_functions(opts.seed);
    std::uint64_t s = opts.seed;
    for (const auto& fn : fns) {
        for (double beta : {0.0, 0.1, 0.3}) {
            NoisyOracle o = NoisyOracle::relative(*fn, beta, ++s);
            out.push_back(verify_inexact_upper_bound(*fn, o, opts.upper_bound_trials, ++s));
        }
    }
    return out;
}

std::vector<TheoryReport> run_descent_suite(const SuiteOptions& opts) {
    std::vector<TheoryReport> out;
    const auto fns = standard_test_functions(opts.seed);
    std::uint64_t s = opts.seed + 1000;
    for (const auto& fn : fns) {
        for (const auto& [c1, c2] : {std::pair{1.0, 1.0}, std::pair{0.5, 1.0}}) {
            const double beta = std::min(0.3, 0.75 * max_relative_error(c1, c2, fn->lipschitz_L()));
            const DescentInterval iv = descent_interval(c1, c2, fn->lipschitz_L(), beta);
            const auto [lo, hi] = iv.monotone_range();
            const std::vector<double> grid = {iv.t1_bar, lo, iv.midpoint(), hi, iv.t2_bar};
            NoisyOracle o = NoisyOracle::relative(*fn, beta, ++s);
            TheoryReport r = verify_descent_inequality(*fn, o, c1, c2, grid, start_point(*fn), opts.descent_iterations);
            r.detail += ",c1p=" + fmt(c1) + ",c2p=" + fmt(c2);
            out.push_back(std::move(r));
        }
    }
    return out;
}

std::vector<TheoryReport> run_diminishing_suite(const SuiteOptions& opts) {
    std::vector<TheoryReport> out;
    const auto fns = standard_test_functions(opts.seed);
    std::uint64_t s = opts.seed + 2000;
    for (const auto& fn : fns) {
        for (double delta0 : {0.0, 0.1}) {
            NoisyOracle o = NoisyOracle::summable(*fn, delta0, ++s);
            out.push_back(
                verify_diminishing_convergence(*fn, o, diminishing_t0(*fn), start_point(*fn), opts.diminishing_iterations));
        }
    }
    return out;
}

std::vector<TheoryReport> run_all_suites(const SuiteOptions& opts) {
    std::vector<TheoryReport> out;
    const auto fns = standard_test_functions(opts.seed);
    for (const auto& fn : fns) {
        out.push_back(verify_gradient(*fn, 200, opts.seed + 11));
        out.push_back(verify_lipschitz(*fn, 2000, opts.seed + 12));
    }
    for (auto* suite : {&run_upper_bound_suite, &run_descent_suite, &run_diminishing_suite}) {
        auto part = (*suite)(opts);
        out.insert(out.end(), std::make_move_iterator(part.begin()), std::make_move_iterator(part.end()));
    }
    out.push_back(verify_interval_properties(opts.interval_trials, opts.seed + 13));
    return out;
}

} // namespace deco::theory
