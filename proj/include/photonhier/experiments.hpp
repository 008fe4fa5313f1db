// Protocol drivers: pump quench, pulsed pumping and the runtime benchmark,
// plus the worst-mode log-ratio error between two trajectories.
#pragma once

#include "photonhier/dynamics.hpp"
#include "photonhier/hierarchy.hpp"
#include "photonhier/integrator.hpp"
#include "photonhier/model.hpp"
#include "photonhier/steady_state.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <map>
#include <string>
#include <vector>

namespace photonhier {

// level < 0 selects the exact equations.
struct Method {
    int level{-1};

    bool exact() const noexcept { return level < 0; }
    std::string name() const;  // "exact" or "level_J"
    static Method parse(const std::string& name);
};

struct RunRecord {
    std::string method;
    double cpu_seconds{0.0};    // integration only
    double setup_seconds{0.0};  // steady states and system set-up, reported separately
    long long steps{0};
    long long rejected{0};
    long long rhs_evals{0};
    double final_time{0.0};
    std::string termination;  // "completed", "converged", "t_max", "error: ..."
    std::string config_hash;
    double p_from{0.0};
    double p_to{0.0};

    bool ok() const { return termination == "completed" || termination == "converged"; }
};

struct ErrorSeries {
    std::vector<double> times;
    std::vector<double> epsilon;
    std::vector<int> worst_mode;

    double max() const;
    double median() const;
};

// eps(t) = max_i |log10(n^e_i(t) / n^r_i(t))|, with both populations floored.
// The trajectories must share their sample times.
ErrorSeries error_series(const Trajectory& exact, const Trajectory& reduced, double floor = 1e-30);

// Integrates one method on a given schedule from a state in that method's
// coordinates. Exact states are [n; f]; reduced ones [n; c_0..c_J].
Trajectory simulate(const Model& model, const Hierarchy* hierarchy, Method method,
                    const Eigen::VectorXd& y0, double t0, double t1, const PumpSchedule& pump,
                    const IntegratorSettings& settings, const StepObserver& observer = {});

// Exact [n; f] state mapped into the coordinates of the given method.
Eigen::VectorXd to_method_state(const Model& model, const Hierarchy* hierarchy, Method method,
                                const Eigen::VectorXd& full);

SteadyStateResult method_steady_state(const Model& model, const Hierarchy* hierarchy, Method method,
                                      double pump, const SteadyStateSettings& settings = {});

struct QuenchSpec {
    double p_initial{6.58e-6};
    double p_final{2e-5};
    double t_final{200.0};
    std::vector<int> levels{0, 1, 2};
    bool include_exact{true};
    double epsilon_floor{1e-30};

    void validate() const;
};

struct MethodRun {
    Method method;
    Trajectory trajectory;
    RunRecord record;
};

struct QuenchResult {
    Eigen::VectorXd initial_state;  // exact steady state at p_initial
    std::vector<MethodRun> runs;    // exact first when included, then levels ascending
    std::map<int, ErrorSeries> epsilon;  // per level, against the exact run
};

// Starts every method from the exact steady state at p_initial (lifted onto
// the levels for reduced runs) and switches to p_final at t = 0.
QuenchResult run_quench(const QuenchSpec& spec, const Model& model, const Hierarchy& hierarchy,
                        const IntegratorSettings& settings, const std::string& config_hash = {});

struct PulsedSpec {
    double duty{0.01};
    double period{40.0};
    double average{std::pow(10.0, -3.2)};
    int warmup_periods{5};
    int averaging_periods{10};
    double drift_tol{1e-4};

    void validate() const;
};

struct PulsedResult {
    Method method;
    Trajectory trajectory;
    RunRecord record;
    Eigen::VectorXd average;                     // per mode, over all averaging periods
    std::vector<Eigen::VectorXd> period_means;   // one per averaging period
    double drift{0.0};      // max relative change between the last two period means
    bool periodic{false};   // drift < drift_tol
    double pump_energy{0.0};  // integral of P over the averaging window
};

// Initial state: the method's own steady state under constant pumping at the
// average power. Averages are exact integrals of the continuous output.
PulsedResult run_pulsed(const PulsedSpec& spec, const Model& model, const Hierarchy* hierarchy,
                        Method method, const IntegratorSettings& settings,
                        const std::string& config_hash = {});

struct BenchmarkSpec {
    double p_min{std::pow(10.0, -3.5)};
    double p_max{10.0};
    int count{33};
    std::vector<int> subset;  // indices into the geometric grid; empty: all
    std::vector<int> levels{0, 1, 2, 3};
    bool include_exact{true};
    double tolerance{1e-6};  // fractional deviation from the target steady state
    double floor{1e-30};
    double t_max{1e6};
    int threads{1};
    int repeats{1};  // median CPU time over repeats

    std::vector<double> grid() const;
    std::vector<double> powers() const;  // subset applied
    void validate() const;
};

struct PairResult {
    int index{0};
    double p_from{0.0};
    double p_to{0.0};
    std::vector<RunRecord> records;  // exact first when included, then levels ascending
};

struct BenchmarkResult {
    std::vector<double> powers;
    std::vector<std::string> methods;
    std::vector<PairResult> pairs;  // ordered unequal pairs, row-major in (from, to)
    double steady_state_seconds{0.0};
};

// For every ordered pair (P_a, P_b), P_a != P_b, each method starts in its own
// steady state at P_a, is quenched to P_b and integrated until every n_i is
// within `tolerance` (fractional) of its own steady state at P_b.
BenchmarkResult run_benchmark(const BenchmarkSpec& spec, const Model& model, const Hierarchy& hierarchy,
                              const IntegratorSettings& settings, const std::string& config_hash = {});

struct HistogramSpec {
    int bins{40};
    double lo{1e-3};
    double hi{1.0};

    void validate() const;
};

struct MethodSummary {
    std::string method;
    std::vector<long> counts;  // log-spaced bins of relative runtime
    long underflow{0};
    long overflow{0};
    double median{NAN};  // relative runtime t_method / t_exact
    double max{NAN};
    double min{NAN};
    double median_cpu{NAN};
    int failures{0};
};

struct BenchmarkSummary {
    std::vector<double> edges;  // bins + 1 relative-runtime edges
    std::vector<MethodSummary> methods;  // reduced levels, then exact (cpu only)
    std::vector<std::string> failures;
};

BenchmarkSummary summarize(const BenchmarkResult& result, const HistogramSpec& spec = {});

}  // namespace photonhier
