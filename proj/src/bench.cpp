#include "deco/bench.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <map>
#include <mutex>
#include <numeric>
#include <sstream>
#include <stdexcept>
#include <thread>
#include <tuple>

namespace deco::bench {

using problems::CaseKind;

namespace {

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return {};
    const auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> out;
    std::string item;
    std::istringstream is(s);
    while (std::getline(is, item, sep)) out.push_back(trim(item));
    if (!s.empty() && s.back() == sep) out.emplace_back();
    return out;
}

double to_double(const std::string& key, const std::string& v) {
    std::size_t pos = 0;
    double x = 0.0;
    try {
        x = std::stod(v, &pos);
    } catch (const std::exception&) {
        pos = 0;
    }
    if (pos == 0 || pos != v.size()) throw std::invalid_argument("setting " + key + ": not a number: '" + v + "'");
    return x;
}

std::size_t to_size(const std::string& key, const std::string& v) {
    std::size_t pos = 0;
    unsigned long long x = 0;
    try {
        x = std::stoull(v, &pos);
    } catch (const std::exception&) {
        pos = 0;
    }
    if (pos == 0 || pos != v.size() || v.front() == '-')
        throw std::invalid_argument("setting " + key + ": not a nonnegative integer: '" + v + "'");
    return static_cast<std::size_t>(x);
}

bool to_bool(const std::string& key, const std::string& v) {
    if (v == "1" || v == "true" || v == "yes" || v == "on") return true;
    if (v == "0" || v == "false" || v == "no" || v == "off") return false;
    throw std::invalid_argument("setting " + key + ": not a boolean: '" + v + "'");
}

std::string fmt17(double x) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

std::string fmt6(double x) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.6g", x);
    return buf;
}

std::ofstream open_out(const std::filesystem::path& path) {
    std::ofstream os(path);
    if (!os) throw std::runtime_error("cannot open " + path.string() + " for writing");
    return os;
}

void close_out(std::ofstream& os, const std::filesystem::path& path) {
    os.close();
    if (!os) throw std::runtime_error("write failed: " + path.string());
}

} // namespace

std::string to_string(Method m) {
    switch (m) {
    case Method::GD: return "gd";
    case Method::IGD: return "igd";
    case Method::IBFGS: return "ibfgs";
    }
    return "?";
}

Method method_from_string(const std::string& name) {
    if (name == "gd") return Method::GD;
    if (name == "igd") return Method::IGD;
    if (name == "ibfgs") return Method::IBFGS;
    throw std::invalid_argument("unknown method '" + name + "' (expected gd, igd or ibfgs)");
}

// ---------------------------------------------------------------------------
// Configuration
// ---------------------------------------------------------------------------

BenchConfig BenchConfig::resolved() const {
    BenchConfig c = *this;
    const bool ode = case_kind == CaseKind::Ode;
    if (!c.ibfgs) c.ibfgs = ode ? MethodGammas{1e-3, 1e-3} : MethodGammas{0.1, 0.1};
    if (!c.warm_start_order) c.warm_start_order = ode ? 0 : 1;
    return c;
}

void BenchConfig::validate() const {
    if (methods.empty()) throw std::invalid_argument("config: no methods");
    if (grids.empty()) throw std::invalid_argument("config: empty grid list");
    for (std::size_t M : grids)
        if (M < 2) throw std::invalid_argument("config: grid values must be >= 2");
    if (repetitions < 1) throw std::invalid_argument("config: repetitions must be >= 1");
    if (max_iter < 1) throw std::invalid_argument("config: max_iter must be >= 1");
    if (!(eps > 0.0)) throw std::invalid_argument("config: eps must be positive");
    if (!(gd_tolerance > 0.0)) throw std::invalid_argument("config: gd_tolerance must be positive");
    if (!(tau_floor > 0.0 && tau0 >= tau_floor)) throw std::invalid_argument("config: need 0 < tau_floor <= tau0");
    auto check_gammas = [](const MethodGammas& g, const char* who) {
        if (!(g.gamma1 > 0.0 && g.gamma2 > 0.0))
            throw std::invalid_argument(std::string("config: ") + who + " gammas must be positive");
    };
    check_gammas(igd, "igd");
    if (ibfgs) check_gammas(*ibfgs, "ibfgs");
    if (!(ibfgs_noise_ratio >= 0.0)) throw std::invalid_argument("config: ibfgs.noise_ratio must be >= 0");
    if (step && !(*step > 0.0)) throw std::invalid_argument("config: step must be positive");
    if (warm_start_order && *warm_start_order > descent::kMaxExtrapolationOrder)
        throw std::invalid_argument("config: warm_start_order must be 0, 1 or 2");
    if (threads < 1) throw std::invalid_argument("config: threads must be >= 1");
}

std::vector<std::size_t> parse_grids(const std::string& spec) {
    const std::string s = trim(spec);
    std::vector<std::size_t> out;
    const auto dots = s.find("..");
    if (dots != std::string::npos) {
        const std::size_t lo = to_size("grids", trim(s.substr(0, dots)));
        std::string rest = s.substr(dots + 2);
        std::size_t step = 16;
        const auto colon = rest.find(':');
        if (colon != std::string::npos) {
            step = to_size("grids", trim(rest.substr(colon + 1)));
            rest = rest.substr(0, colon);
        }
        const std::size_t hi = to_size("grids", trim(rest));
        if (step == 0 || hi < lo) throw std::invalid_argument("grids: bad range '" + spec + "'");
        for (std::size_t M = lo; M <= hi; M += step) out.push_back(M);
    } else {
        for (const std::string& item : split(s, ','))
            if (!item.empty()) out.push_back(to_size("grids", item));
    }
    if (out.empty()) throw std::invalid_argument("grids: empty list '" + spec + "'");
    return out;
}

std::vector<Method> parse_methods(const std::string& spec) {
    std::vector<Method> out;
    for (const std::string& item : split(spec, ','))
        if (!item.empty()) out.push_back(method_from_string(item));
    if (out.empty()) throw std::invalid_argument("methods: empty list");
    return out;
}

void apply_setting(BenchConfig& c, const std::string& key_in, const std::string& value_in) {
    const std::string key = trim(key_in), v = trim(value_in);
    if (key == "case") {
        c.case_kind = problems::case_from_string(v);
    } else if (key == "methods") {
        c.methods = parse_methods(v);
    } else if (key == "grids") {
        c.grids = parse_grids(v);
    } else if (key == "seed") {
        c.seed = to_size(key, v);
    } else if (key == "eps") {
        c.eps = to_double(key, v);
    } else if (key == "repetitions") {
        c.repetitions = to_size(key, v);
    } else if (key == "max_iter") {
        c.max_iter = to_size(key, v);
    } else if (key == "gd_tolerance") {
        c.gd_tolerance = to_double(key, v);
    } else if (key == "igd.gamma1") {
        c.igd.gamma1 = to_double(key, v);
    } else if (key == "igd.gamma2") {
        c.igd.gamma2 = to_double(key, v);
    } else if (key == "ibfgs.gamma1" || key == "ibfgs.gamma2") {
        MethodGammas g = c.ibfgs.value_or(c.resolved().ibfgs.value());
        (key == "ibfgs.gamma1" ? g.gamma1 : g.gamma2) = to_double(key, v);
        c.ibfgs = g;
    } else if (key == "ibfgs.noise_ratio") {
        c.ibfgs_noise_ratio = to_double(key, v);
    } else if (key == "tau0") {
        c.tau0 = to_double(key, v);
    } else if (key == "tau_floor") {
        c.tau_floor = to_double(key, v);
    } else if (key == "step") {
        if (v == "auto") c.step.reset();
        else c.step = to_double(key, v);
    } else if (key == "warm_start_order") {
        if (v == "auto") c.warm_start_order.reset();
        else c.warm_start_order = to_size(key, v);
    } else if (key == "out") {
        c.out_dir = v;
    } else if (key == "write_traces") {
        c.write_traces = to_bool(key, v);
    } else if (key == "trace_stride") {
        c.trace_stride = to_size(key, v);
    } else if (key == "threads") {
        c.threads = to_size(key, v);
    } else {
        throw std::invalid_argument("unknown setting '" + key + "'");
    }
}

void load_config_file(BenchConfig& config, const std::filesystem::path& path) {
    std::ifstream is(path);
    if (!is) throw std::runtime_error("cannot open config file " + path.string());
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(is, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw std::invalid_argument(path.string() + ":" + std::to_string(lineno) + ": expected key=value");
        try {
            apply_setting(config, line.substr(0, eq), line.substr(eq + 1));
        } catch (const std::invalid_argument& e) {
            throw std::invalid_argument(path.string() + ":" + std::to_string(lineno) + ": " + e.what());
        }
    }
}

problems::ControlVector default_start(CaseKind kind) {
    if (kind == CaseKind::Ode) return {1.5, 2.0, -7.0, 0.2, -0.4, 0.1, 1.0, -0.2};
    return {0.5, 1.0, 0.25};
}

double default_step(CaseKind kind, std::size_t M) {
    if (kind == CaseKind::Ode) return 1.15 / 12.0;
    return 3.5 / static_cast<double>(problems::case2_sample_count(M) - 2);
}

// ---------------------------------------------------------------------------
// Runs
// ---------------------------------------------------------------------------

std::unique_ptr<problems::AffineStateSystem> make_problem(const BenchConfig& config, std::size_t M) {
    if (config.case_kind == CaseKind::Ode) return problems::make_case1_problem(M);
    return problems::make_case2_problem(M, config.seed);
}

BenchResult run_cell(const BenchConfig& config_in, const problems::AffineStateSystem& problem, Method method,
                     std::size_t rep, std::size_t trace_stride) {
    const BenchConfig config = config_in.resolved();
    if (problem.kind() != config.case_kind) throw std::invalid_argument("run_cell: problem does not match the case");
    const std::size_t M = problem.grid_size();

    adjoint::ToleranceSchedule sched;
    sched.tau_R_init = sched.tau_psi_init = config.tau0;
    sched.tau_R_floor = sched.tau_psi_floor = config.tau_floor;
    const MethodGammas g = method == Method::IBFGS ? *config.ibfgs : config.igd;
    sched.gamma1 = g.gamma1;
    sched.gamma2 = g.gamma2;

    std::unique_ptr<descent::GradientOracle> oracle;
    if (method == Method::GD) {
        auto o = std::make_unique<descent::FixedToleranceOracle>(problem, config.gd_tolerance, config.gd_tolerance);
        o->extrapolation_order = *config.warm_start_order;
        oracle = std::move(o);
    } else {
        auto o = std::make_unique<descent::AdaptiveAdjointOracle>(problem, sched);
        o->extrapolation_order = *config.warm_start_order;
        oracle = std::move(o);
    }
    const problems::ControlVector z0 = default_start(config.case_kind);
    std::unique_ptr<descent::DirectionPolicy> dir;
    if (method == Method::IBFGS) {
        auto d = std::make_unique<descent::IbfgsDirection>(z0.size());
        d->noise_ratio = config.ibfgs_noise_ratio;
        dir = std::move(d);
    } else {
        dir = std::make_unique<descent::IgdDirection>();
    }

    descent::RunOptions ro;
    ro.eps = config.eps;
    ro.max_iter = config.max_iter;
    ro.keep_trace = trace_stride > 0;
    const double t = config.step.value_or(default_step(config.case_kind, M));
    descent::RunRecord run = descent::igdm_run(*oracle, z0, *dir, descent::StepPolicy::constant(t), ro);

    BenchResult r;
    r.case_kind = config.case_kind;
    r.method = method;
    r.M = M;
    r.rep = rep;
    r.time_s = run.total_time_s;
    r.iterations = run.iterations.empty() ? 0 : run.iterations.back().k + 1;
    r.state_solves = run.state_solves;
    r.adjoint_solves = run.adjoint_solves;
    r.final_grad_norm = run.final_grad_norm();
    r.converged = run.status == descent::RunStatus::Converged;
    r.status = descent::to_string(run.status);
    if (!run.failure.empty()) r.status += ":" + run.failure;
    r.condition_violations = run.condition_violations;
    r.damped_updates = run.damped_updates;
    r.bad_curvature_events = run.bad_curvature_events;
    r.noise_skips = run.noise_skips;
    r.reset_events = run.reset_events;
    r.spd_failures = run.spd_failures;
    if (!run.iterations.empty()) r.final_z = run.final_z();
    if (trace_stride > 0) {
        const std::size_t n = run.iterations.size();
        for (std::size_t i = 0; i < n; ++i)
            if (i % trace_stride == 0 || i + 1 == n) r.trace.push_back(std::move(run.iterations[i]));
    }
    return r;
}

std::vector<BenchResult> run_matrix(const BenchConfig& config_in,
                                    const std::function<void(const BenchResult&)>& progress) {
    const BenchConfig config = config_in.resolved();
    config.validate();

    struct Cell {
        std::size_t M;
        Method method;
        std::size_t rep;
    };
    // Grid-major order keeps the cells of one problem together.
    std::vector<Cell> cells;
    for (std::size_t M : config.grids)
        for (std::size_t rep = 0; rep < config.repetitions; ++rep)
            for (Method m : config.methods) cells.push_back({M, m, rep});

    std::vector<BenchResult> results(cells.size());
    std::mutex progress_mutex;
    auto run_one = [&](std::size_t i) {
        const Cell& c = cells[i];
        const auto problem = make_problem(config, c.M);
        const std::size_t stride = config.write_traces && c.rep == 0 ? std::max<std::size_t>(config.trace_stride, 1) : 0;
        try {
            results[i] = run_cell(config, *problem, c.method, c.rep, stride);
        } catch (const std::exception& e) {
            BenchResult r;
            r.case_kind = config.case_kind;
            r.method = c.method;
            r.M = c.M;
            r.rep = c.rep;
            r.status = std::string("SolverFailure:") + e.what();
            results[i] = std::move(r);
        }
        if (progress) {
            const std::lock_guard lock(progress_mutex);
            progress(results[i]);
        }
    };

    const std::size_t nthreads = std::min(config.threads, cells.size());
    if (nthreads <= 1) {
        for (std::size_t i = 0; i < cells.size(); ++i) run_one(i);
    } else {
        std::atomic<std::size_t> next{0};
        std::vector<std::thread> workers;
        for (std::size_t w = 0; w < nthreads; ++w)
            workers.emplace_back([&] {
                for (std::size_t i = next++; i < cells.size(); i = next++) run_one(i);
            });
        for (auto& w : workers) w.join();
    }
    return results;
}

// ---------------------------------------------------------------------------
// Statistics
// ---------------------------------------------------------------------------

double median(std::vector<double> v) {
    if (v.empty()) return std::numeric_limits<double>::quiet_NaN();
    std::sort(v.begin(), v.end());
    const std::size_t n = v.size();
    return n % 2 == 1 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

std::vector<CellSummary> summarize(const std::vector<BenchResult>& results) {
    using Key = std::tuple<int, int, std::size_t>;
    std::map<Key, std::vector<const BenchResult*>> groups;
    for (const BenchResult& r : results)
        groups[{static_cast<int>(r.case_kind), static_cast<int>(r.method), r.M}].push_back(&r);
    std::vector<CellSummary> out;
    for (const auto& [key, runs] : groups) {
        CellSummary s;
        s.case_kind = runs.front()->case_kind;
        s.method = runs.front()->method;
        s.M = runs.front()->M;
        s.repetitions = runs.size();
        s.converged = std::all_of(runs.begin(), runs.end(), [](const BenchResult* r) { return r->converged; });
        std::vector<double> times;
        for (const BenchResult* r : runs)
            if (r->converged) times.push_back(r->time_s);
        s.median_time_s = median(times);
        const BenchResult& first = *runs.front();
        s.iterations = first.iterations;
        s.state_solves = first.state_solves;
        s.adjoint_solves = first.adjoint_solves;
        s.final_grad_norm = first.final_grad_norm;
        out.push_back(s);
    }
    return out;
}

ReductionCurve percent_reduction(const std::vector<CellSummary>& cells, Method baseline, Method method,
                                 std::size_t M_lo, std::size_t M_hi) {
    ReductionCurve curve;
    curve.baseline = baseline;
    curve.method = method;
    curve.M_lo = M_lo;
    curve.M_hi = M_hi;
    std::map<std::pair<int, std::size_t>, const CellSummary*> base, next;
    bool have_case = false;
    for (const CellSummary& c : cells) {
        if (!have_case) {
            curve.case_kind = c.case_kind;
            have_case = true;
        }
        if (c.method == baseline) base[{static_cast<int>(c.case_kind), c.M}] = &c;
        if (c.method == method) next[{static_cast<int>(c.case_kind), c.M}] = &c;
    }
    double sum = 0.0;
    std::size_t count = 0;
    auto label = [&](CaseKind k, std::size_t M) { return problems::to_string(k) + " M=" + std::to_string(M); };
    for (const auto& [key, b] : base) {
        const auto it = next.find(key);
        if (it == next.end()) {
            curve.warnings.push_back("missing " + to_string(method) + " cell for " + label(b->case_kind, b->M));
            continue;
        }
        const CellSummary* n = it->second;
        if (!b->converged || !n->converged) {
            curve.warnings.push_back("non-converged cell excluded at " + label(b->case_kind, b->M));
            continue;
        }
        curve.case_kind = b->case_kind;
        const double pct = 100.0 * (b->median_time_s - n->median_time_s) / b->median_time_s;
        curve.points.push_back({b->M, pct});
        if (b->M >= M_lo && b->M <= M_hi) {
            sum += pct;
            ++count;
        }
    }
    for (const auto& [key, n] : next)
        if (!base.contains(key))
            curve.warnings.push_back("missing " + to_string(baseline) + " cell for " + label(n->case_kind, n->M));
    curve.mean_percent = count > 0 ? sum / static_cast<double>(count) : std::numeric_limits<double>::quiet_NaN();
    return curve;
}

std::vector<ReductionCurve> standard_reductions(const std::vector<CellSummary>& cells) {
    auto has = [&](Method m) {
        return std::any_of(cells.begin(), cells.end(), [m](const CellSummary& c) { return c.method == m; });
    };
    std::vector<ReductionCurve> out;
    if (has(Method::GD) && has(Method::IGD)) out.push_back(percent_reduction(cells, Method::GD, Method::IGD));
    if (has(Method::IGD) && has(Method::IBFGS)) out.push_back(percent_reduction(cells, Method::IGD, Method::IBFGS));
    return out;
}

std::vector<std::string> check_invariants(const std::vector<BenchResult>& results) {
    std::vector<std::string> failures;
    for (const BenchResult& r : results) {
        const std::string cell =
            problems::to_string(r.case_kind) + "/" + to_string(r.method) + "/M=" + std::to_string(r.M) + "/rep=" +
            std::to_string(r.rep);
        if (!(r.time_s > 0.0)) failures.push_back(cell + ": non-positive time");
        if (r.method != Method::GD && r.iterations > 0 && r.state_solves + r.adjoint_solves > 3 * r.iterations)
            failures.push_back(cell + ": more than 3 solves per iteration");
        if (r.condition_violations > 0)
            failures.push_back(cell + ": " + std::to_string(r.condition_violations) + " direction-condition violations");
        if (r.spd_failures > 0) failures.push_back(cell + ": inverse-Hessian approximation lost definiteness");
    }
    return failures;
}

// ---------------------------------------------------------------------------
// Output
// ---------------------------------------------------------------------------

std::string trace_file_name(const BenchResult& r) {
    return "trace_" + problems::to_string(r.case_kind) + "_" + to_string(r.method) + "_M" + std::to_string(r.M) +
           "_rep" + std::to_string(r.rep) + ".csv";
}

void write_trace_csv(const std::filesystem::path& path, const std::vector<descent::IterationRecord>& trace) {
    std::ofstream os = open_out(path);
    const std::size_t m = trace.empty() ? 0 : trace.front().z.size();
    os << "k";
    for (std::size_t i = 0; i < m; ++i) os << ",z" << i;
    os << ",objective,grad_norm,step,tau_R,tau_psi,state_solves,adjoint_solves,at_floor,conditions_ok,d_spd,"
          "elapsed_s\n";
    for (const auto& rec : trace) {
        os << rec.k;
        for (double x : rec.z) os << ',' << fmt17(x);
        os << ',' << fmt17(rec.objective) << ',' << fmt17(rec.grad_norm) << ',' << fmt17(rec.step) << ','
           << fmt17(rec.tau_R) << ',' << fmt17(rec.tau_psi) << ',' << rec.state_solves << ',' << rec.adjoint_solves
           << ',' << int(rec.at_floor) << ',' << int(rec.conditions_ok) << ',' << int(rec.d_spd) << ','
           << fmt17(rec.elapsed_s) << '\n';
    }
    close_out(os, path);
}

void write_reduction_csv(const std::filesystem::path& path, const std::vector<ReductionCurve>& curves) {
    std::ofstream os = open_out(path);
    os << kReductionHeader << '\n';
    for (const auto& c : curves)
        for (const auto& p : c.points)
            os << problems::to_string(c.case_kind) << ',' << to_string(c.baseline) << ',' << to_string(c.method) << ','
               << p.M << ',' << fmt17(p.percent) << '\n';
    close_out(os, path);
}

namespace {

void write_runs_csv(const std::filesystem::path& path, const std::vector<BenchResult>& results) {
    std::ofstream os = open_out(path);
    os << kRunsHeader << '\n';
    for (const auto& r : results)
        os << problems::to_string(r.case_kind) << ',' << to_string(r.method) << ',' << r.M << ',' << r.rep << ','
           << fmt17(r.time_s) << ',' << r.iterations << ',' << r.state_solves << ',' << r.adjoint_solves << ','
           << fmt17(r.final_grad_norm) << ',' << int(r.converged) << ',' << r.status << ',' << r.condition_violations
           << ',' << r.damped_updates << ',' << r.bad_curvature_events << ',' << r.noise_skips << ',' << r.reset_events << ','
           << r.spd_failures << '\n';
    close_out(os, path);
}

void write_summary_csv(const std::filesystem::path& path, const std::vector<CellSummary>& cells) {
    std::ofstream os = open_out(path);
    os << kSummaryHeader << '\n';
    for (const auto& c : cells)
        os << problems::to_string(c.case_kind) << ',' << to_string(c.method) << ',' << c.M << ',' << c.repetitions
           << ',' << fmt17(c.median_time_s) << ',' << c.iterations << ',' << c.state_solves << ',' << c.adjoint_solves
           << ',' << fmt17(c.final_grad_norm) << ',' << int(c.converged) << '\n';
    close_out(os, path);
}

void write_reduction_mean_csv(const std::filesystem::path& path, const std::vector<ReductionCurve>& curves) {
    std::ofstream os = open_out(path);
    os << "case,baseline,method,M_min,M_max,mean_percent_reduction\n";
    for (const auto& c : curves)
        os << problems::to_string(c.case_kind) << ',' << to_string(c.baseline) << ',' << to_string(c.method) << ','
           << c.M_lo << ',' << c.M_hi << ',' << fmt17(c.mean_percent) << '\n';
    close_out(os, path);
}

// Runtime against M on a log scale (top) and the reduction curves with
// their interval means (bottom), one pair of panels per case.
void write_plot_script(const std::filesystem::path& path, const std::vector<CellSummary>& cells,
                       const std::vector<ReductionCurve>& curves) {
    std::ofstream os = open_out(path);
    std::vector<CaseKind> cases;
    for (const auto& c : cells)
        if (std::find(cases.begin(), cases.end(), c.case_kind) == cases.end()) cases.push_back(c.case_kind);
    os << "# gnuplot -c plots.gp  (run inside the output directory)\n"
          "set datafile separator ','\n"
          "set terminal pngcairo size 900,900\n"
          "set key top left\n"
          "set grid\n";
    for (CaseKind k : cases) {
        const std::string cs = problems::to_string(k);
        os << "\nset output 'runtime_" << cs << ".png'\n"
           << "set multiplot layout 2,1 title '" << cs << "'\n"
           << "set logscale y\nset xlabel 'M'\nset ylabel 'median time [s]'\n"
           << "plot ";
        bool first = true;
        for (Method m : {Method::GD, Method::IGD, Method::IBFGS}) {
            const bool present = std::any_of(cells.begin(), cells.end(),
                                             [&](const CellSummary& c) { return c.case_kind == k && c.method == m; });
            if (!present) continue;
            os << (first ? "" : ", \\\n     ") << "'summary.csv' using 3:(strcol(1) eq '" << cs << "' && strcol(2) eq '"
               << to_string(m) << "' ? $5 : 1/0) with linespoints title '" << to_string(m) << "'";
            first = false;
        }
        os << "\nunset logscale y\nset ylabel 'reduction [%]'\nset yrange [*:100]\n";
        std::ostringstream arrows;
        first = true;
        os << "plot ";
        for (const auto& c : curves) {
            if (c.case_kind != k || c.points.empty()) continue;
            const std::string name = to_string(c.method) + " vs " + to_string(c.baseline);
            os << (first ? "" : ", \\\n     ") << "'reduction.csv' using 4:(strcol(1) eq '" << cs
               << "' && strcol(2) eq '" << to_string(c.baseline) << "' && strcol(3) eq '" << to_string(c.method)
               << "' ? $5 : 1/0) with linespoints title '" << name << "'";
            if (!std::isnan(c.mean_percent))
                os << ", \\\n     " << fmt6(c.mean_percent) << " with lines dashtype 2 title '" << name
                   << " mean " << c.M_lo << "-" << c.M_hi << "'";
            first = false;
        }
        if (first) os << "0 notitle";
        os << "\nset yrange [*:*]\nunset multiplot\n";
    }
    close_out(os, path);
}

} // namespace

void emit_outputs(const std::vector<BenchResult>& results, const std::vector<ReductionCurve>& reductions,
                  const std::filesystem::path& outdir) {
    std::error_code ec;
    std::filesystem::create_directories(outdir, ec);
    if (ec) throw std::runtime_error("cannot create " + outdir.string() + ": " + ec.message());
    for (const auto& r : results)
        if (!r.trace.empty()) write_trace_csv(outdir / trace_file_name(r), r.trace);
    const auto cells = summarize(results);
    write_runs_csv(outdir / "runs.csv", results);
    write_summary_csv(outdir / "summary.csv", cells);
    write_reduction_csv(outdir / "reduction.csv", reductions);
    write_reduction_mean_csv(outdir / "reduction_mean.csv", reductions);
    write_plot_script(outdir / "plots.gp", cells, reductions);
}

std::vector<CellSummary> read_summary_csv(const std::filesystem::path& path) {
    std::ifstream is(path);
    if (!is) throw std::runtime_error("cannot open " + path.string());
    std::string line;
    if (!std::getline(is, line) || trim(line) != kSummaryHeader)
        throw std::runtime_error(path.string() + ": unexpected header");
    std::vector<CellSummary> out;
    std::size_t lineno = 1;
    while (std::getline(is, line)) {
        ++lineno;
        if (trim(line).empty()) continue;
        const auto f = split(line, ',');
        if (f.size() != 10) throw std::runtime_error(path.string() + ":" + std::to_string(lineno) + ": expected 10 fields");
        try {
            CellSummary c;
            c.case_kind = problems::case_from_string(f[0]);
            c.method = method_from_string(f[1]);
            c.M = to_size("M", f[2]);
            c.repetitions = to_size("rep", f[3]);
            c.median_time_s = f[4] == "nan" || f[4] == "-nan" ? std::numeric_limits<double>::quiet_NaN()
                                                                : to_double("median_time_s", f[4]);
            c.iterations = to_size("iterations", f[5]);
            c.state_solves = to_size("state_solves", f[6]);
            c.adjoint_solves = to_size("adjoint_solves", f[7]);
            c.final_grad_norm = to_double("final_grad_norm", f[8]);
            c.converged = f[9] == "1";
            out.push_back(c);
        } catch (const std::invalid_argument& e) {
            throw std::runtime_error(path.string() + ":" + std::to_string(lineno) + ": " + e.what());
        }
    }
    return out;
}

} // namespace deco::bench
