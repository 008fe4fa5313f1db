#include "photonhier/experiments.hpp"

#include "photonhier/errors.hpp"

#include <algorithm>
#include <atomic>
#include <limits>
#include <thread>

namespace photonhier {

namespace {

double median_of(std::vector<double> v) {
    if (v.empty()) return NAN;
    std::sort(v.begin(), v.end());
    const std::size_t m = v.size() / 2;
    return v.size() % 2 == 1 ? v[m] : 0.5 * (v[m - 1] + v[m]);
}

void require_level(const Hierarchy* h, Method method) {
    if (method.exact()) return;
    if (h == nullptr) throw ConfigError("reduced method " + method.name() + " needs a hierarchy");
    if (method.level >= h->projected_levels()) {
        throw ConfigError("level " + std::to_string(method.level) + " exceeds the projected hierarchy (" +
                          std::to_string(h->projected_levels()) + " levels)");
    }
}

RunRecord record_from(const Method& method, const Trajectory& tr, const std::string& hash) {
    RunRecord r;
    r.method = method.name();
    r.cpu_seconds = tr.stats.cpu_seconds;
    r.steps = tr.stats.steps;
    r.rejected = tr.stats.rejected;
    r.rhs_evals = tr.stats.rhs_evals;
    r.final_time = tr.final_time;
    r.config_hash = hash;
    return r;
}

}  // namespace

std::string Method::name() const {
    return exact() ? "exact" : "level_" + std::to_string(level);
}

Method Method::parse(const std::string& name) {
    if (name == "exact") return Method{-1};
    const std::string prefix = "level_";
    if (name.rfind(prefix, 0) == 0) {
        try {
            std::size_t used = 0;
            const int j = std::stoi(name.substr(prefix.size()), &used);
            if (used == name.size() - prefix.size() && j >= 0) return Method{j};
        } catch (const std::exception&) {
        }
    }
    throw ConfigError("unknown method '" + name + "' (expected exact or level_J)");
}

double ErrorSeries::max() const {
    double m = 0.0;
    for (double e : epsilon) m = std::max(m, e);
    return m;
}

double ErrorSeries::median() const {
    return median_of(epsilon);
}

ErrorSeries error_series(const Trajectory& exact, const Trajectory& reduced, double floor) {
    if (!(floor > 0.0)) throw ConfigError("epsilon floor must be positive");
    if (exact.times.size() != reduced.times.size()) {
        throw ConfigError("trajectories have different sample counts");
    }
    ErrorSeries out;
    for (std::size_t k = 0; k < exact.times.size(); ++k) {
        const double t = exact.times[k];
        if (std::abs(t - reduced.times[k]) > 1e-9 * std::max(1.0, std::abs(t))) {
            throw ConfigError("trajectories are sampled at different times");
        }
        const Eigen::VectorXd& ne = exact.n[k];
        const Eigen::VectorXd& nr = reduced.n[k];
        if (ne.size() != nr.size()) throw ConfigError("trajectories have different mode sets");
        double worst = 0.0;
        int arg = 0;
        for (Eigen::Index i = 0; i < ne.size(); ++i) {
            const double e = std::abs(std::log10(std::max(ne(i), floor) / std::max(nr(i), floor)));
            if (e > worst) {
                worst = e;
                arg = int(i);
            }
        }
        out.times.push_back(t);
        out.epsilon.push_back(worst);
        out.worst_mode.push_back(arg);
    }
    return out;
}

Trajectory simulate(const Model& model, const Hierarchy* hierarchy, Method method, const Eigen::VectorXd& y0,
                    double t0, double t1, const PumpSchedule& pump, const IntegratorSettings& settings,
                    const StepObserver& observer) {
    require_level(hierarchy, method);
    if (method.exact()) {
        const ExactSystem sys(model);
        return integrate(sys, y0, t0, t1, pump, settings, observer);
    }
    const ReducedSystem sys(model, *hierarchy, method.level);
    return integrate(sys, y0, t0, t1, pump, settings, observer);
}

Eigen::VectorXd to_method_state(const Model& model, const Hierarchy* hierarchy, Method method,
                                const Eigen::VectorXd& full) {
    require_level(hierarchy, method);
    if (method.exact()) return full;
    return ReducedSystem(model, *hierarchy, method.level).from_full(full);
}

SteadyStateResult method_steady_state(const Model& model, const Hierarchy* hierarchy, Method method,
                                      double pump, const SteadyStateSettings& settings) {
    require_level(hierarchy, method);
    if (method.exact()) return steady_state_exact(model, pump, settings);
    return steady_state_reduced(model, *hierarchy, method.level, pump, settings);
}

void QuenchSpec::validate() const {
    if (!(p_initial >= 0.0) || !(p_final >= 0.0)) throw ConfigError("quench powers must be non-negative");
    if (p_initial == p_final) throw ConfigError("quench requires P_initial != P_final");
    if (!(t_final > 0.0)) throw ConfigError("quench t_final must be positive");
    if (!(epsilon_floor > 0.0)) throw ConfigError("epsilon floor must be positive");
    for (int j : levels) {
        if (j < 0) throw ConfigError("quench levels must be non-negative");
    }
    if (levels.empty() && !include_exact) throw ConfigError("quench has no method to run");
}

QuenchResult run_quench(const QuenchSpec& spec, const Model& model, const Hierarchy& hierarchy,
                        const IntegratorSettings& settings, const std::string& config_hash) {
    spec.validate();
    std::vector<int> levels = spec.levels;
    std::sort(levels.begin(), levels.end());
    levels.erase(std::unique(levels.begin(), levels.end()), levels.end());
    for (int j : levels) require_level(&hierarchy, Method{j});

    QuenchResult out;
    const double setup0 = thread_cpu_seconds();
    out.initial_state = steady_state_exact(model, spec.p_initial).state;
    const double setup = thread_cpu_seconds() - setup0;

    const PumpSchedule pump = PumpSchedule::quench(spec.p_initial, spec.p_final, 0.0);
    std::vector<Method> methods;
    if (spec.include_exact) methods.push_back(Method{-1});
    for (int j : levels) methods.push_back(Method{j});

    for (const Method& m : methods) {
        const Eigen::VectorXd y0 = to_method_state(model, &hierarchy, m, out.initial_state);
        MethodRun run{m, simulate(model, &hierarchy, m, y0, 0.0, spec.t_final, pump, settings), {}};
        run.record = record_from(m, run.trajectory, config_hash);
        run.record.setup_seconds = setup;
        run.record.termination = "completed";
        run.record.p_from = spec.p_initial;
        run.record.p_to = spec.p_final;
        out.runs.push_back(std::move(run));
    }
    if (spec.include_exact) {
        for (std::size_t r = 1; r < out.runs.size(); ++r) {
            out.epsilon[out.runs[r].method.level] =
                error_series(out.runs.front().trajectory, out.runs[r].trajectory, spec.epsilon_floor);
        }
    }
    return out;
}

void PulsedSpec::validate() const {
    if (!(duty > 0.0 && duty <= 1.0)) throw ConfigError("duty cycle must lie in (0, 1]");
    if (!(period > 0.0)) throw ConfigError("pulse period must be positive");
    if (!(average >= 0.0)) throw ConfigError("average pump power must be non-negative");
    if (warmup_periods < 0) throw ConfigError("warmup_periods must be non-negative");
    if (averaging_periods < 1) throw ConfigError("averaging_periods must be at least 1");
    if (!(drift_tol > 0.0)) throw ConfigError("drift_tol must be positive");
}

namespace {

// Continues `into` with `piece`, which starts where `into` ended.
void append(Trajectory& into, const Trajectory& piece) {
    std::size_t first = 0;
    if (!into.times.empty() && !piece.times.empty() &&
        std::abs(piece.times.front() - into.times.back()) <= 1e-12 * std::max(1.0, std::abs(into.times.back()))) {
        first = 1;
    }
    for (std::size_t k = first; k < piece.times.size(); ++k) {
        into.times.push_back(piece.times[k]);
        into.n.push_back(piece.n[k]);
        into.pump.push_back(piece.pump[k]);
        if (k < piece.states.size()) into.states.push_back(piece.states[k]);
    }
    into.segment_starts.insert(into.segment_starts.end(), piece.segment_starts.begin(), piece.segment_starts.end());
    into.stats.steps += piece.stats.steps;
    into.stats.rejected += piece.stats.rejected;
    into.stats.rhs_evals += piece.stats.rhs_evals;
    into.stats.cpu_seconds += piece.stats.cpu_seconds;
    into.final_state = piece.final_state;
    into.final_time = piece.final_time;
    into.min_population = std::min(into.min_population, piece.min_population);
}

}  // namespace

PulsedResult run_pulsed(const PulsedSpec& spec, const Model& model, const Hierarchy* hierarchy, Method method,
                        const IntegratorSettings& settings, const std::string& config_hash) {
    spec.validate();
    require_level(hierarchy, method);

    const double setup0 = thread_cpu_seconds();
    const Eigen::VectorXd y0 = method_steady_state(model, hierarchy, method, spec.average).state;
    const double setup = thread_cpu_seconds() - setup0;

    const PumpSchedule pump = PumpSchedule::pulsed(spec.average, spec.duty, spec.period);
    const double t_avg = spec.warmup_periods * spec.period;
    const double t_end = (spec.warmup_periods + spec.averaging_periods) * spec.period;
    const Eigen::Index nc = model.num_modes();

    PulsedResult out;
    out.method = method;
    out.period_means.assign(std::size_t(spec.averaging_periods), Eigen::VectorXd::Zero(nc));
    // One integration call per averaging period, so that no step straddles a
    // period boundary even when the pump itself has no edge there (duty 1).
    std::size_t current = 0;
    const StepObserver accumulate = [&](const DenseStep& ds) {
        out.period_means[current] += ds.integral().head(nc);
        return false;
    };
    out.trajectory = simulate(model, hierarchy, method, y0, 0.0, t_avg, pump, settings);
    for (int k = 0; k < spec.averaging_periods; ++k) {
        current = std::size_t(k);
        const double ts = t_avg + k * spec.period;
        const Trajectory piece = simulate(model, hierarchy, method, out.trajectory.final_state, ts,
                                          ts + spec.period, pump, settings, accumulate);
        append(out.trajectory, piece);
    }

    out.average = Eigen::VectorXd::Zero(nc);
    for (auto& m : out.period_means) {
        out.average += m;
        m /= spec.period;
    }
    out.average /= (t_end - t_avg);
    if (out.period_means.size() >= 2) {
        const Eigen::ArrayXd last = out.period_means.back().array();
        const Eigen::ArrayXd prev = out.period_means[out.period_means.size() - 2].array();
        out.drift = ((last - prev).abs() / last.abs().max(std::numeric_limits<double>::min())).maxCoeff();
    }
    out.periodic = out.drift < spec.drift_tol;
    out.pump_energy = pump.integral(t_avg, t_end);
    out.record = record_from(method, out.trajectory, config_hash);
    out.record.setup_seconds = setup;
    out.record.termination = "completed";
    out.record.p_from = spec.average;
    out.record.p_to = spec.average;
    return out;
}

std::vector<double> BenchmarkSpec::grid() const {
    std::vector<double> g;
    if (count == 1) return {p_min};
    const double a = std::log10(p_min);
    const double b = std::log10(p_max);
    for (int k = 0; k < count; ++k) g.push_back(std::pow(10.0, a + (b - a) * k / (count - 1)));
    return g;
}

std::vector<double> BenchmarkSpec::powers() const {
    const std::vector<double> g = grid();
    if (subset.empty()) return g;
    std::vector<double> out;
    for (int k : subset) out.push_back(g.at(std::size_t(k)));
    return out;
}

void BenchmarkSpec::validate() const {
    if (!(p_min > 0.0) || !(p_max > p_min)) throw ConfigError("benchmark needs 0 < p_min < p_max");
    if (count < 2) throw ConfigError("benchmark needs at least 2 pump powers");
    for (int k : subset) {
        if (k < 0 || k >= count) throw ConfigError("benchmark subset index out of range");
    }
    std::vector<int> s = subset;
    std::sort(s.begin(), s.end());
    if (std::adjacent_find(s.begin(), s.end()) != s.end()) throw ConfigError("benchmark subset has duplicates");
    if (!subset.empty() && subset.size() < 2) throw ConfigError("benchmark subset needs at least 2 powers");
    for (int j : levels) {
        if (j < 0) throw ConfigError("benchmark levels must be non-negative");
    }
    if (levels.empty() && !include_exact) throw ConfigError("benchmark has no method to run");
    if (!(tolerance > 0.0)) throw ConfigError("benchmark tolerance must be positive");
    if (!(floor > 0.0)) throw ConfigError("benchmark floor must be positive");
    if (!(t_max > 0.0)) throw ConfigError("benchmark t_max must be positive");
    if (threads < 1) throw ConfigError("threads must be at least 1");
    if (repeats < 1) throw ConfigError("repeats must be at least 1");
}

BenchmarkResult run_benchmark(const BenchmarkSpec& spec, const Model& model, const Hierarchy& hierarchy,
                              const IntegratorSettings& settings, const std::string& config_hash) {
    spec.validate();
    std::vector<int> levels = spec.levels;
    std::sort(levels.begin(), levels.end());
    levels.erase(std::unique(levels.begin(), levels.end()), levels.end());
    std::vector<Method> methods;
    if (spec.include_exact) methods.push_back(Method{-1});
    for (int j : levels) {
        require_level(&hierarchy, Method{j});
        methods.push_back(Method{j});
    }

    BenchmarkResult out;
    out.powers = spec.powers();
    for (const auto& m : methods) out.methods.push_back(m.name());
    const std::size_t np = out.powers.size();

    // Every method's own stationary state at every power: start and target.
    const double setup0 = thread_cpu_seconds();
    std::vector<std::vector<Eigen::VectorXd>> steady(methods.size());
    for (std::size_t m = 0; m < methods.size(); ++m) {
        for (double p : out.powers) {
            steady[m].push_back(method_steady_state(model, &hierarchy, methods[m], p).state);
        }
    }
    out.steady_state_seconds = thread_cpu_seconds() - setup0;

    for (std::size_t a = 0; a < np; ++a) {
        for (std::size_t b = 0; b < np; ++b) {
            if (a == b) continue;
            PairResult pr;
            pr.index = int(out.pairs.size());
            pr.p_from = out.powers[a];
            pr.p_to = out.powers[b];
            pr.records.resize(methods.size());
            out.pairs.push_back(std::move(pr));
        }
    }

    IntegratorSettings is = settings;
    is.sample_interval = 0.0;
    is.record_states = false;
    const Eigen::Index nc = model.num_modes();

    auto run_task = [&](std::size_t task) {
        const std::size_t pair = task / methods.size();
        const std::size_t m = task % methods.size();
        PairResult& pr = out.pairs[pair];
        const std::size_t a = std::size_t(std::find(out.powers.begin(), out.powers.end(), pr.p_from) -
                                          out.powers.begin());
        const std::size_t b = std::size_t(std::find(out.powers.begin(), out.powers.end(), pr.p_to) -
                                          out.powers.begin());
        const Eigen::ArrayXd target = steady[m][b].head(nc).array();
        const Eigen::ArrayXd scale = spec.tolerance * target.abs().max(spec.floor);
        const StepObserver reached = [&](const DenseStep& ds) {
            return ((ds.y1->head(nc).array() - target).abs() <= scale).all();
        };

        RunRecord rec;
        std::vector<double> cpu;
        for (int rep = 0; rep < spec.repeats; ++rep) {
            try {
                const Trajectory tr = simulate(model, &hierarchy, methods[m], steady[m][a], 0.0, spec.t_max,
                                               PumpSchedule::constant(pr.p_to), is, reached);
                rec = record_from(methods[m], tr, config_hash);
                rec.termination = tr.stopped_early ? "converged" : "t_max";
                cpu.push_back(tr.stats.cpu_seconds);
            } catch (const NumericalError& e) {
                rec = RunRecord{};
                rec.method = methods[m].name();
                rec.config_hash = config_hash;
                rec.termination = std::string("error: ") + e.what();
                break;
            }
        }
        if (!cpu.empty()) rec.cpu_seconds = median_of(cpu);
        rec.p_from = pr.p_from;
        rec.p_to = pr.p_to;
        pr.records[m] = std::move(rec);
    };

    const std::size_t tasks = out.pairs.size() * methods.size();
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t t = next++; t < tasks; t = next++) run_task(t);
    };
    const int nthreads = std::max(1, std::min<int>(spec.threads, int(tasks)));
    if (nthreads == 1) {
        worker();
    } else {
        std::vector<std::jthread> pool;
        for (int k = 0; k < nthreads; ++k) pool.emplace_back(worker);
    }
    return out;
}

void HistogramSpec::validate() const {
    if (bins < 1) throw ConfigError("histogram needs at least one bin");
    if (!(lo > 0.0) || !(hi > lo)) throw ConfigError("histogram range needs 0 < lo < hi");
}

BenchmarkSummary summarize(const BenchmarkResult& result, const HistogramSpec& spec) {
    spec.validate();
    if (result.pairs.empty()) throw ConfigError("no benchmark records to summarize");
    BenchmarkSummary s;
    const double llo = std::log10(spec.lo);
    const double lhi = std::log10(spec.hi);
    for (int k = 0; k <= spec.bins; ++k) s.edges.push_back(std::pow(10.0, llo + (lhi - llo) * k / spec.bins));

    const auto exact_it = std::find(result.methods.begin(), result.methods.end(), "exact");
    const bool have_exact = exact_it != result.methods.end();
    const std::size_t ex = std::size_t(exact_it - result.methods.begin());

    for (const auto& pr : result.pairs) {
        for (const auto& r : pr.records) {
            if (!r.ok()) {
                s.failures.push_back("pair " + std::to_string(pr.index) + " (" + std::to_string(pr.p_from) +
                                     " -> " + std::to_string(pr.p_to) + ") " + r.method + ": " + r.termination);
            }
        }
    }

    for (std::size_t m = 0; m < result.methods.size(); ++m) {
        MethodSummary ms;
        ms.method = result.methods[m];
        ms.counts.assign(std::size_t(spec.bins), 0);
        std::vector<double> rel;
        std::vector<double> cpu;
        for (const auto& pr : result.pairs) {
            const RunRecord& r = pr.records[m];
            if (!r.ok()) {
                ++ms.failures;
                continue;
            }
            cpu.push_back(r.cpu_seconds);
            if (!have_exact || m == ex) continue;
            const RunRecord& e = pr.records[ex];
            if (!e.ok() || !(e.cpu_seconds > 0.0)) continue;
            const double ratio = r.cpu_seconds / e.cpu_seconds;
            rel.push_back(ratio);
            if (ratio < spec.lo) {
                ++ms.underflow;
            } else if (ratio > spec.hi) {
                ++ms.overflow;
            } else {
                auto bin = int(std::floor((std::log10(ratio) - llo) / (lhi - llo) * spec.bins));
                ms.counts[std::size_t(std::clamp(bin, 0, spec.bins - 1))] += 1;
            }
        }
        ms.median_cpu = median_of(cpu);
        if (!rel.empty()) {
            ms.median = median_of(rel);
            ms.max = *std::max_element(rel.begin(), rel.end());
            ms.min = *std::min_element(rel.begin(), rel.end());
        }
        s.methods.push_back(std::move(ms));
    }
    // reduced levels first, exact last
    std::stable_partition(s.methods.begin(), s.methods.end(),
                          [](const MethodSummary& ms) { return ms.method != "exact"; });
    return s;
}

}  // namespace photonhier
