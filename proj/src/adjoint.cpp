#include "deco/adjoint.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>
#include <stdexcept>

namespace deco::adjoint {

using linsolve::SolveReport;

void ToleranceSchedule::validate() const {
    auto pos = [](double v) { return v > 0.0 && std::isfinite(v); };
    if (!pos(gamma1) || !pos(gamma2)) throw std::invalid_argument("tolerance schedule: gamma1, gamma2 must be positive");
    if (!pos(tau_R_init) || !pos(tau_psi_init) || !pos(tau_R_floor) || !pos(tau_psi_floor))
        throw std::invalid_argument("tolerance schedule: tolerances and floors must be positive");
    if (tau_R_floor > tau_R_init || tau_psi_floor > tau_psi_init)
        throw std::invalid_argument("tolerance schedule: floors must not exceed initial tolerances");
    if (!pos(grad_floor)) throw std::invalid_argument("tolerance schedule: grad_floor must be positive");
    if (max_rounds == 0) throw std::invalid_argument("tolerance schedule: max_rounds must be >= 1");
}

Vector gradient_from(const AffineStateSystem& problem, const ControlVector& z, std::span<const double> state,
                     std::span<const double> adjoint) {
    Vector gz, gy;
    problem.objective_partials(z, state, gz, gy);
    const Vector jt = problem.partial_R_transpose_apply(z, state, adjoint);
    for (std::size_t i = 0; i < gz.size(); ++i) gz[i] -= jt[i];
    return gz;
}

Vector exact_gradient(const AffineStateSystem& problem, const ControlVector& z) {
    const Vector y = problem.solve_state_direct(z);
    Vector gz, gy;
    problem.objective_partials(z, y, gz, gy);
    const Vector psi = problem.solve_adjoint_direct(z, gy);
    return gradient_from(problem, z, y, psi);
}

namespace {

SolveReport checked(SolveReport rep, const char* what, double tol) {
    if (!rep.converged) {
        std::ostringstream os;
        os << what << " solve did not reach tolerance " << tol << " (residual " << rep.residual_norm << " after "
           << rep.iterations << " iterations)";
        throw SolverError(os.str());
    }
    return rep;
}

std::span<const double> warm_state(const WarmStart* warm, std::size_t n) {
    if (warm && warm->state.size() == n) return warm->state;
    return {};
}

std::span<const double> warm_adjoint(const WarmStart* warm, std::size_t n) {
    if (warm && warm->adjoint.size() == n) return warm->adjoint;
    return {};
}

} // namespace

GradientEstimate adaptive_inexact_gradient(const AffineStateSystem& problem, const ControlVector& z,
                                           const ToleranceSchedule& sched, std::optional<double> prev_grad_norm,
                                           const WarmStart* warm) {
    sched.validate();
    const std::size_t n = problem.state_dim();

    auto initial = [&](double gamma, double init, double floor) {
        const double t = prev_grad_norm ? std::min(0.5 * gamma * *prev_grad_norm, init) : init;
        return std::max(t, floor);
    };

    GradientEstimate est;
    est.state.assign(n, 0.0);
    est.adjoint.assign(n, 0.0);
    bool have_state_guess = !warm_state(warm, n).empty();
    bool have_adjoint_guess = !warm_adjoint(warm, n).empty();
    if (have_state_guess) est.state = warm->state;
    if (have_adjoint_guess) est.adjoint = warm->adjoint;

    double tau_R = initial(sched.gamma1, sched.tau_R_init, sched.tau_R_floor);
    Vector gz, gy;

    for (std::size_t outer = 0;; ++outer) {
        if (outer >= sched.max_rounds) throw SolverError("adaptive gradient: outer round cap exceeded");
        SolveReport srep = checked(problem.solve_state(z, tau_R, have_state_guess ? std::span<const double>(est.state)
                                                                                  : std::span<const double>{}),
                                   "state", tau_R);
        have_state_guess = true;
        est.state = std::move(srep.solution);
        est.achieved_state_residual = srep.residual_norm;
        est.tau_R = tau_R;
        ++est.state_solves;
        ++est.outer_rounds;
        est.state_iterations += srep.iterations;
        est.trials.push_back({SolveTrial::Stage::State, tau_R, srep.residual_norm, srep.iterations});

        problem.objective_partials(z, est.state, gz, gy);

        double tau_psi = initial(sched.gamma2, sched.tau_psi_init, sched.tau_psi_floor);
        for (std::size_t inner = 0;; ++inner) {
            if (inner >= sched.max_rounds) throw SolverError("adaptive gradient: inner round cap exceeded");
            SolveReport arep = checked(problem.solve_adjoint(z, gy, tau_psi,
                                                             have_adjoint_guess ? std::span<const double>(est.adjoint)
                                                                                : std::span<const double>{}),
                                       "adjoint", tau_psi);
            have_adjoint_guess = true;
            est.adjoint = std::move(arep.solution);
            est.achieved_adjoint_residual = arep.residual_norm;
            est.tau_psi = tau_psi;
            ++est.adjoint_solves;
            ++est.inner_rounds;
            est.adjoint_iterations += arep.iterations;
            est.trials.push_back({SolveTrial::Stage::Adjoint, tau_psi, arep.residual_norm, arep.iterations});

            est.gradient = gz;
            const Vector jt = problem.partial_R_transpose_apply(z, est.state, est.adjoint);
            for (std::size_t i = 0; i < est.gradient.size(); ++i) est.gradient[i] -= jt[i];
            est.grad_norm = norm2(est.gradient);

            const double bound = sched.gamma2 * est.grad_norm;
            if (est.achieved_adjoint_residual <= bound) break;
            const double next = std::max(0.1 * bound, sched.tau_psi_floor);
            if (est.grad_norm < sched.grad_floor || next >= tau_psi) {
                est.at_floor = true;
                return est;
            }
            tau_psi = next;
        }

        const double bound = sched.gamma1 * est.grad_norm;
        if (est.achieved_state_residual <= bound) return est;
        const double next = std::max(0.5 * bound, sched.tau_R_floor);
        if (est.grad_norm < sched.grad_floor || next >= tau_R) {
            est.at_floor = true;
            return est;
        }
        tau_R = next;
    }
}

GradientEstimate fixed_tolerance_gradient(const AffineStateSystem& problem, const ControlVector& z, double tau_R,
                                          double tau_psi, const WarmStart* warm) {
    if (!(tau_R > 0.0 && tau_psi > 0.0)) throw std::invalid_argument("fixed tolerances must be positive");
    const std::size_t n = problem.state_dim();
    GradientEstimate est;
    SolveReport srep = checked(problem.solve_state(z, tau_R, warm_state(warm, n)), "state", tau_R);
    est.state = std::move(srep.solution);
    est.achieved_state_residual = srep.residual_norm;
    est.tau_R = tau_R;
    est.state_solves = 1;
    est.outer_rounds = 1;
    est.state_iterations = srep.iterations;
    est.trials.push_back({SolveTrial::Stage::State, tau_R, srep.residual_norm, srep.iterations});

    Vector gz, gy;
    problem.objective_partials(z, est.state, gz, gy);
    SolveReport arep = checked(problem.solve_adjoint(z, gy, tau_psi, warm_adjoint(warm, n)), "adjoint", tau_psi);
    est.adjoint = std::move(arep.solution);
    est.achieved_adjoint_residual = arep.residual_norm;
    est.tau_psi = tau_psi;
    est.adjoint_solves = 1;
    est.inner_rounds = 1;
    est.adjoint_iterations = arep.iterations;
    est.trials.push_back({SolveTrial::Stage::Adjoint, tau_psi, arep.residual_norm, arep.iterations});

    est.gradient = gz;
    const Vector jt = problem.partial_R_transpose_apply(z, est.state, est.adjoint);
    for (std::size_t i = 0; i < est.gradient.size(); ++i) est.gradient[i] -= jt[i];
    est.grad_norm = norm2(est.gradient);
    return est;
}

ErrorCertificate gradient_error_certificate(const AffineStateSystem& problem, const ControlVector& z,
                                            const GradientEstimate& est) {
    const Vector g = exact_gradient(problem, z);
    double s = 0.0;
    for (std::size_t i = 0; i < g.size(); ++i) s += (est.gradient[i] - g[i]) * (est.gradient[i] - g[i]);
    ErrorCertificate cert;
    cert.error_norm = std::sqrt(s);
    if (est.grad_norm > 0.0) cert.rel_to_inexact = cert.error_norm / est.grad_norm;
    return cert;
}

std::string diagnostics_line(const GradientEstimate& est, std::size_t iteration) {
    char buf[512];
    std::snprintf(buf, sizeof buf,
                  "gradient iter=%zu grad_norm=%.6e tau_R=%.3e tau_psi=%.3e state_res=%.3e adjoint_res=%.3e "
                  "outer=%zu inner=%zu state_solves=%zu adjoint_solves=%zu state_its=%zu adjoint_its=%zu at_floor=%d",
                  iteration, est.grad_norm, est.tau_R, est.tau_psi, est.achieved_state_residual,
                  est.achieved_adjoint_residual, est.outer_rounds, est.inner_rounds, est.state_solves,
                  est.adjoint_solves, est.state_iterations, est.adjoint_iterations, est.at_floor ? 1 : 0);
    return buf;
}

} // namespace deco::adjoint
