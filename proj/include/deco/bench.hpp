#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "deco/descent.hpp"
#include "deco/problems.hpp"

namespace deco::bench {

enum class Method { GD, IGD, IBFGS };
std::string to_string(Method m);
Method method_from_string(const std::string& name);

/// Residual-to-gradient proportionality constants for one method.
struct MethodGammas {
    double gamma1;
    double gamma2;
};

/// Settings left unset take the case default when resolve() is called.
struct BenchConfig {
    problems::CaseKind case_kind = problems::CaseKind::Ode;
    std::vector<Method> methods = {Method::GD, Method::IGD, Method::IBFGS};
    std::vector<std::size_t> grids = {16, 32, 48, 64, 80, 96, 112, 128};
    std::uint64_t seed = 42;
    double eps = 1e-6;
    std::size_t repetitions = 3;
    std::size_t max_iter = 1'000'000;

    /// Fixed solver tolerance of the GD baseline.
    double gd_tolerance = 1e-9;
    MethodGammas igd = {60.0, 3.0};
    /// 1e-3 for ode, 0.1 for laplace.
    std::optional<MethodGammas> ibfgs;
    /// IBFGS skips pairs with ||y|| below this multiple of the summed solver
    /// residuals.
    double ibfgs_noise_ratio = 10.0;
    /// Initial trial tolerances of the adaptive oracle (both solves).
    double tau0 = 1e-6;
    double tau_floor = 1e-9;
    /// Constant step: 1.15/12 for ode, 3.5/(n_s - 2) for laplace. A value
    /// here overrides the rule for every grid.
    std::optional<double> step;
    /// Warm-start extrapolation order shared by all methods: 0 for ode, 1
    /// for laplace.
    std::optional<std::size_t> warm_start_order;

    std::filesystem::path out_dir = "bench_out";
    bool write_traces = true;
    /// Every n-th iteration goes to the trace CSV; the last always does.
    std::size_t trace_stride = 10;
    /// Worker threads; 1 runs cells one after another.
    std::size_t threads = 1;

    /// Fills unset case-dependent fields.
    [[nodiscard]] BenchConfig resolved() const;
    /// Throws std::invalid_argument on out-of-range values.
    void validate() const;
};

/// Applies one key=value setting. Keys: case, methods, grids, seed, eps,
/// repetitions, max_iter, gd_tolerance, igd.gamma1, igd.gamma2,
/// ibfgs.gamma1, ibfgs.gamma2, ibfgs.noise_ratio, tau0, tau_floor, step, warm_start_order,
/// out, write_traces, trace_stride, threads.
void apply_setting(BenchConfig& config, const std::string& key, const std::string& value);

/// Flat key=value file; '#' starts a comment, blank lines are ignored.
void load_config_file(BenchConfig& config, const std::filesystem::path& path);

/// "16..128" (step 16), "16..128:8", or a comma list.
std::vector<std::size_t> parse_grids(const std::string& spec);
std::vector<Method> parse_methods(const std::string& spec);

/// Benchmark starting point and step for a case.
problems::ControlVector default_start(problems::CaseKind kind);
double default_step(problems::CaseKind kind, std::size_t M);

struct BenchResult {
    problems::CaseKind case_kind = problems::CaseKind::Ode;
    Method method = Method::GD;
    std::size_t M = 0;
    std::size_t rep = 0;
    double time_s = 0.0;
    std::size_t iterations = 0;
    std::size_t state_solves = 0;
    std::size_t adjoint_solves = 0;
    double final_grad_norm = 0.0;
    bool converged = false;
    std::string status;
    std::size_t condition_violations = 0;
    std::size_t damped_updates = 0;
    std::size_t bad_curvature_events = 0;
    std::size_t noise_skips = 0;
    std::size_t reset_events = 0;
    std::size_t spd_failures = 0;
    problems::ControlVector final_z;
    /// Every trace_stride-th iteration and the last; empty when traces are off.
    std::vector<descent::IterationRecord> trace;
};

/// One optimization with the benchmark settings. The problem must match
/// the configured case; a stride of 0 keeps no trace.
BenchResult run_cell(const BenchConfig& config, const problems::AffineStateSystem& problem, Method method,
                     std::size_t rep, std::size_t trace_stride);

/// The problem a cell runs on; reference-data generation happens here,
/// outside the timed region.
std::unique_ptr<problems::AffineStateSystem> make_problem(const BenchConfig& config, std::size_t M);

/// Every (method, M, rep) cell of the configuration. Traces are kept for
/// rep 0 only, since repetitions differ in timing alone. progress, when
/// set, is called after each cell.
std::vector<BenchResult> run_matrix(const BenchConfig& config,
                                    const std::function<void(const BenchResult&)>& progress = {});

/// Median time over the repetitions of one cell, converged runs only.
struct CellSummary {
    problems::CaseKind case_kind = problems::CaseKind::Ode;
    Method method = Method::GD;
    std::size_t M = 0;
    std::size_t repetitions = 0;
    double median_time_s = 0.0;
    std::size_t iterations = 0;
    std::size_t state_solves = 0;
    std::size_t adjoint_solves = 0;
    double final_grad_norm = 0.0;
    bool converged = false;
};

std::vector<CellSummary> summarize(const std::vector<BenchResult>& results);
double median(std::vector<double> values);

struct ReductionPoint {
    std::size_t M = 0;
    double percent = 0.0;
};

struct ReductionCurve {
    problems::CaseKind case_kind = problems::CaseKind::Ode;
    Method baseline = Method::GD;
    Method method = Method::IGD;
    std::vector<ReductionPoint> points;
    /// Mean over points with M in [M_lo, M_hi]; NaN when there are none.
    double mean_percent = 0.0;
    std::size_t M_lo = 64;
    std::size_t M_hi = 128;
    std::vector<std::string> warnings;
};

/// 100 (t_base - t_new) / t_base per M on median times. Cells that are
/// missing or did not converge on either side are excluded with a warning.
ReductionCurve percent_reduction(const std::vector<CellSummary>& cells, Method baseline, Method method,
                                 std::size_t M_lo = 64, std::size_t M_hi = 128);

/// IGD vs GD and IBFGS vs IGD when both methods are present.
std::vector<ReductionCurve> standard_reductions(const std::vector<CellSummary>& cells);

/// Invariant failures over a result set: non-positive times, IGD/IBFGS
/// solve counts above 3 per iteration, direction-condition violations, and
/// non-SPD IBFGS matrices.
std::vector<std::string> check_invariants(const std::vector<BenchResult>& results);

/// Columns: k, z0..z{m-1}, objective, grad_norm, step, tau_R, tau_psi,
/// state_solves, adjoint_solves, at_floor, conditions_ok, d_spd, elapsed_s.
/// Doubles use %.17g, so equal runs give equal text outside elapsed_s.
void write_trace_csv(const std::filesystem::path& path, const std::vector<descent::IterationRecord>& trace);
std::string trace_file_name(const BenchResult& r);

inline constexpr const char* kSummaryHeader =
    "case,method,M,rep,median_time_s,iterations,state_solves,adjoint_solves,final_grad_norm,converged";
inline constexpr const char* kReductionHeader = "case,baseline,method,M,percent_reduction";
inline constexpr const char* kRunsHeader =
    "case,method,M,rep,time_s,iterations,state_solves,adjoint_solves,final_grad_norm,converged,status,"
    "condition_violations,damped_updates,bad_curvature_events,noise_skips,reset_events,spd_failures";

/// Writes traces (when kept), runs.csv, summary.csv, reduction.csv,
/// reduction_mean.csv and plots.gp into outdir. In summary.csv the rep
/// column holds the number of repetitions behind the median. Throws
/// std::runtime_error naming the path on I/O failure.
void emit_outputs(const std::vector<BenchResult>& results, const std::vector<ReductionCurve>& reductions,
                  const std::filesystem::path& outdir);

/// Reads summary.csv back, for the reduce command.
std::vector<CellSummary> read_summary_csv(const std::filesystem::path& path);

void write_reduction_csv(const std::filesystem::path& path, const std::vector<ReductionCurve>& curves);

} // namespace deco::bench
