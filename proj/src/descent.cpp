#include "deco/descent.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>

#include <chrono>
#include <cmath>
#include <stdexcept>

namespace deco::descent {

namespace {

OracleResult to_result(const AffineStateSystem& problem, const ControlVector& z, const adjoint::GradientEstimate& est) {
    OracleResult r;
    r.gradient = est.gradient;
    r.grad_norm = est.grad_norm;
    r.objective = problem.objective(z, est.state);
    r.tau_R = est.tau_R;
    r.tau_psi = est.tau_psi;
    r.state_residual = est.achieved_state_residual;
    r.adjoint_residual = est.achieved_adjoint_residual;
    r.state_solves = est.state_solves;
    r.adjoint_solves = est.adjoint_solves;
    r.at_floor = est.at_floor;
    return r;
}

Eigen::Map<const Eigen::VectorXd> view(const Vector& v) {
    return {v.data(), static_cast<Eigen::Index>(v.size())};
}

Vector to_vector(const Eigen::VectorXd& v) {
    return Vector(v.data(), v.data() + v.size());
}

// Polynomial extrapolation through the newest history entries, which
// are stored newest first. Coefficients of orders 0, 1, 2.
Vector extrapolate(const std::deque<Vector>& history, std::size_t order) {
    static constexpr double coeffs[3][3] = {{1.0, 0.0, 0.0}, {2.0, -1.0, 0.0}, {3.0, -3.0, 1.0}};
    order = std::min(order, history.size() - 1);
    const double* c = coeffs[order];
    Vector out(history.front().size(), 0.0);
    for (std::size_t j = 0; j <= order; ++j)
        for (std::size_t i = 0; i < out.size(); ++i) out[i] += c[j] * history[j][i];
    return out;
}

void push_bounded(std::deque<Vector>& history, const Vector& v, std::size_t depth) {
    if (!history.empty() && history.front().size() != v.size()) history.clear();
    history.push_front(v);
    while (history.size() > depth) history.pop_back();
}

} // namespace

void WarmStartHistory::record(const adjoint::GradientEstimate& est, std::size_t order) {
    if (order > kMaxExtrapolationOrder) throw std::invalid_argument("WarmStartHistory: extrapolation order above 2");
    push_bounded(states_, est.state, order + 1);
    push_bounded(adjoints_, est.adjoint, order + 1);
    guess_.state = extrapolate(states_, order);
    guess_.adjoint = extrapolate(adjoints_, order);
}

AdaptiveAdjointOracle::AdaptiveAdjointOracle(const AffineStateSystem& problem, adjoint::ToleranceSchedule sched)
    : problem_(&problem), sched_(sched) {
    sched_.validate();
}

OracleResult AdaptiveAdjointOracle::evaluate(const ControlVector& z, std::size_t k, std::optional<double> prev) {
    last_ = adjoint::adaptive_inexact_gradient(*problem_, z, sched_, k == 0 ? std::nullopt : prev, &warm_.guess());
    warm_.record(last_, extrapolation_order);
    if (on_estimate) on_estimate(z, last_, k);
    return to_result(*problem_, z, last_);
}

FixedToleranceOracle::FixedToleranceOracle(const AffineStateSystem& problem, double tau_R, double tau_psi)
    : problem_(&problem), tau_R_(tau_R), tau_psi_(tau_psi) {
    if (!(tau_R > 0.0 && tau_psi > 0.0)) throw std::invalid_argument("fixed tolerances must be positive");
}

OracleResult FixedToleranceOracle::evaluate(const ControlVector& z, std::size_t k, std::optional<double>) {
    last_ = adjoint::fixed_tolerance_gradient(*problem_, z, tau_R_, tau_psi_, &warm_.guess());
    warm_.record(last_, extrapolation_order);
    if (on_estimate) on_estimate(z, last_, k);
    return to_result(*problem_, z, last_);
}

// ---------------------------------------------------------------------------

std::string to_string(DirectionKind kind) {
    switch (kind) {
        case DirectionKind::IGD: return "igd";
        case DirectionKind::IBFGS: return "ibfgs";
        case DirectionKind::NewtonType: return "newton";
    }
    return "?";
}

Vector igd_direction(const Vector& g_bar) {
    Vector s(g_bar.size());
    for (std::size_t i = 0; i < s.size(); ++i) s[i] = -g_bar[i];
    return s;
}

bool check_direction_conditions(const Vector& g_bar, const Vector& s, double c1p, double c2p) {
    if (!(c1p > 0.0 && c2p > 0.0)) throw std::invalid_argument("direction constants must be positive");
    // Equality cases (s = -g with c1p = c2p = 1, or s along an extreme
    // eigenvector of D) sit on the boundary; allow a few ulps of slack.
    constexpr double slack = 1e-12;
    const double gn = norm2(g_bar);
    return c1p * gn * gn * (1.0 - slack) <= -dot(g_bar, s) && norm2(s) <= c2p * gn * (1.0 + slack);
}

BfgsState::BfgsState(std::size_t m, double damping_threshold, double curvature_floor)
    : D_(Eigen::MatrixXd::Identity(static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(m))),
      theta_min_(damping_threshold),
      curvature_floor_(curvature_floor) {
    if (m == 0) throw std::invalid_argument("BFGS dimension must be positive");
    if (!(damping_threshold > 0.0 && damping_threshold < 1.0))
        throw std::invalid_argument("damping threshold must lie in (0, 1)");
}

void BfgsState::set_D(const Eigen::MatrixXd& D) {
    if (D.rows() != D_.rows() || D.cols() != D_.cols()) throw std::invalid_argument("BFGS matrix size mismatch");
    D_ = D;
}

Vector BfgsState::direction(const Vector& g_bar) const {
    return to_vector(-(D_ * view(g_bar)));
}

BfgsOutcome BfgsState::update(const Vector& p_in, const Vector& y_in) {
    const Eigen::VectorXd p = view(p_in);
    Eigen::VectorXd y = view(y_in);
    const auto m = D_.rows();

    Eigen::LLT<Eigen::MatrixXd> llt(D_);
    if (llt.info() != Eigen::Success) {
        D_.setIdentity(m, m);
        ++reset_events;
        return BfgsOutcome::Reset;
    }
    const Eigen::VectorXd q = llt.solve(p);
    const double pq = p.dot(q);
    const double py = p.dot(y);

    BfgsOutcome outcome = BfgsOutcome::Updated;
    if (py < theta_min_ * pq) {
        const double theta = (1.0 - theta_min_) * pq / (pq - py);
        y = theta * y + (1.0 - theta) * q;
        ++damped_updates;
        outcome = BfgsOutcome::Damped;
    }
    const double curv = p.dot(y);
    if (!(curv > curvature_floor_ * p.norm() * y.norm())) {
        ++bad_curvature_events;
        return BfgsOutcome::Skipped;
    }
    const double rho = 1.0 / curv;
    const Eigen::MatrixXd I = Eigen::MatrixXd::Identity(m, m);
    const Eigen::MatrixXd left = I - rho * p * y.transpose();
    Eigen::MatrixXd next = left * D_ * left.transpose() + rho * p * p.transpose();
    // eval() breaks the aliasing between next and its transpose.
    next = (0.5 * (next + next.transpose())).eval();

    Eigen::LLT<Eigen::MatrixXd> check(next);
    if (check.info() != Eigen::Success || !next.allFinite()) {
        D_.setIdentity(m, m);
        ++reset_events;
        return BfgsOutcome::Reset;
    }
    D_ = std::move(next);
    return outcome;
}

std::pair<double, double> BfgsState::eigen_range() const {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(D_, Eigen::EigenvaluesOnly);
    return {es.eigenvalues().minCoeff(), es.eigenvalues().maxCoeff()};
}

bool BfgsState::symmetric_positive_definite(double sym_tol) const {
    const double scale = std::max(1.0, D_.cwiseAbs().maxCoeff());
    if ((D_ - D_.transpose()).cwiseAbs().maxCoeff() > sym_tol * scale) return false;
    Eigen::LLT<Eigen::MatrixXd> llt(D_);
    return llt.info() == Eigen::Success;
}

IbfgsDirection::IbfgsDirection(std::size_t m, double damping_threshold) : state_(m, damping_threshold) {}

Vector IbfgsDirection::direction(const Vector& g_bar) {
    const auto [lo, hi] = state_.eigen_range();
    constants_ = {lo, hi};
    return state_.direction(g_bar);
}

void IbfgsDirection::update(const Vector& z_k, const Vector& z_next, const Vector& g_k, const Vector& g_next,
                            double residual_level) {
    Vector p(z_k.size()), y(z_k.size());
    for (std::size_t i = 0; i < p.size(); ++i) {
        p[i] = z_next[i] - z_k[i];
        y[i] = g_next[i] - g_k[i];
    }
    if (norm2(y) <= noise_ratio * residual_level) {
        ++noise_skips;
        last_outcome_ = BfgsOutcome::Skipped;
        return;
    }
    last_outcome_ = state_.update(p, y);
}

Vector newton_type_direction(const Vector& g_bar, const Eigen::MatrixXd& H) {
    if (H.rows() != H.cols() || H.rows() != static_cast<Eigen::Index>(g_bar.size()))
        throw std::invalid_argument("Newton-type direction: dimension mismatch");
    const double scale = std::max(1.0, H.cwiseAbs().maxCoeff());
    if ((H - H.transpose()).cwiseAbs().maxCoeff() > 1e-12 * scale)
        throw std::invalid_argument("Newton-type direction: H is not symmetric");
    Eigen::LLT<Eigen::MatrixXd> llt(H);
    if (llt.info() != Eigen::Success) throw std::invalid_argument("Newton-type direction: H is not positive definite");
    return to_vector(-llt.solve(view(g_bar)));
}

NewtonTypeDirection::NewtonTypeDirection(Eigen::MatrixXd H) : H_(std::move(H)) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(H_, Eigen::EigenvaluesOnly);
    mu_ = es.eigenvalues().minCoeff();
    eta_ = es.eigenvalues().maxCoeff();
    if (!(mu_ > 0.0)) throw std::invalid_argument("Newton-type direction: H is not positive definite");
}

// ---------------------------------------------------------------------------

StepPolicy StepPolicy::constant(double t) {
    if (!(t > 0.0)) throw std::invalid_argument("constant step must be positive");
    return {StepKind::Constant, t};
}

StepPolicy StepPolicy::diminishing(double t0) {
    if (!(t0 > 0.0)) throw std::invalid_argument("diminishing step t0 must be positive");
    return {StepKind::Diminishing, t0};
}

double StepPolicy::at(std::size_t k) const {
    return kind == StepKind::Constant ? constant_step(t) : diminishing_step(t, k);
}

double constant_step(double t) {
    if (!(t > 0.0)) throw std::invalid_argument("constant step must be positive");
    return t;
}

double diminishing_step(double t0, std::size_t k) {
    if (!(t0 > 0.0)) throw std::invalid_argument("diminishing step t0 must be positive");
    return t0 / static_cast<double>(k + 1);
}

std::string to_string(RunStatus status) {
    switch (status) {
        case RunStatus::Converged: return "Converged";
        case RunStatus::MaxIter: return "MaxIter";
        case RunStatus::SolverFailure: return "SolverFailure";
    }
    return "?";
}

RunRecord igdm_run(GradientOracle& oracle, const ControlVector& z0, DirectionPolicy& direction,
                   const StepPolicy& step, const RunOptions& options) {
    if (!(options.eps > 0.0)) throw std::invalid_argument("igdm_run: eps must be positive");
    if (options.max_iter == 0) throw std::invalid_argument("igdm_run: max_iter must be >= 1");

    using clock = std::chrono::steady_clock;
    const auto start = clock::now();
    auto elapsed = [&] { return std::chrono::duration<double>(clock::now() - start).count(); };

    RunRecord run;
    auto push = [&](IterationRecord rec) {
        if (!options.keep_trace && !run.iterations.empty()) run.iterations.back() = std::move(rec);
        else run.iterations.push_back(std::move(rec));
    };
    auto finish = [&](RunStatus status) {
        run.status = status;
        run.total_time_s = elapsed();
        if (auto* ib = dynamic_cast<IbfgsDirection*>(&direction)) {
            run.damped_updates = ib->state().damped_updates;
            run.bad_curvature_events = ib->state().bad_curvature_events;
            run.noise_skips = ib->noise_skips;
            run.reset_events = ib->state().reset_events;
        }
        return run;
    };

    ControlVector z = z0;
    OracleResult cur;
    try {
        cur = oracle.evaluate(z, 0, std::nullopt);
    } catch (const SolverError& e) {
        run.failure = e.what();
        return finish(RunStatus::SolverFailure);
    }

    for (std::size_t k = 0;; ++k) {
        IterationRecord rec;
        rec.k = k;
        rec.z = z;
        rec.objective = cur.objective;
        rec.grad_norm = cur.grad_norm;
        rec.tau_R = cur.tau_R;
        rec.tau_psi = cur.tau_psi;
        rec.state_solves = cur.state_solves;
        rec.adjoint_solves = cur.adjoint_solves;
        rec.at_floor = cur.at_floor;
        run.state_solves += cur.state_solves;
        run.adjoint_solves += cur.adjoint_solves;

        if (!std::isfinite(cur.grad_norm)) {
            rec.elapsed_s = elapsed();
            push(std::move(rec));
            run.failure = "non-finite gradient";
            return finish(RunStatus::SolverFailure);
        }
        if (cur.grad_norm < options.eps) {
            rec.elapsed_s = elapsed();
            push(std::move(rec));
            return finish(RunStatus::Converged);
        }
        if (k + 1 >= options.max_iter) {
            rec.elapsed_s = elapsed();
            push(std::move(rec));
            return finish(RunStatus::MaxIter);
        }

        const Vector s = direction.direction(cur.gradient);
        const ConditionConstants cc = direction.condition_constants();
        rec.c1p = cc.c1p;
        rec.c2p = cc.c2p;
        rec.conditions_ok = cc.c1p > 0.0 && check_direction_conditions(cur.gradient, s, cc.c1p, cc.c2p);
        if (!rec.conditions_ok) ++run.condition_violations;
        if (auto* ib = dynamic_cast<IbfgsDirection*>(&direction)) {
            rec.d_spd = ib->state().symmetric_positive_definite();
            if (!rec.d_spd) ++run.spd_failures;
        }

        const double t = step.at(k);
        rec.step = t;
        ControlVector next(z.size());
        double nn = 0.0;
        bool finite = true;
        for (std::size_t i = 0; i < z.size(); ++i) {
            next[i] = z[i] + t * s[i];
            finite = finite && std::isfinite(next[i]);
            nn += next[i] * next[i];
        }
        rec.elapsed_s = elapsed();
        push(std::move(rec));
        if (!finite || std::sqrt(nn) > kDivergenceNorm) {
            run.failure = "iterate diverged";
            return finish(RunStatus::SolverFailure);
        }

        OracleResult nxt;
        try {
            nxt = oracle.evaluate(next, k + 1, cur.grad_norm);
        } catch (const SolverError& e) {
            run.failure = e.what();
            return finish(RunStatus::SolverFailure);
        }
        const double level = cur.state_residual + cur.adjoint_residual + nxt.state_residual + nxt.adjoint_residual;
        direction.update(z, next, cur.gradient, nxt.gradient, level);
        z = std::move(next);
        cur = std::move(nxt);
    }
}

} // namespace deco::descent
