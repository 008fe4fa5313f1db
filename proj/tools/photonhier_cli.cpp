// photonhier: command-line front end.
//
//   photonhier [--config FILE] [--out-dir DIR] [--threads N] [--seed S] <subcommand> [options]
//
// Exit status: 0 success, 1 numerical failure, 2 configuration error.

#include "photonhier/config.hpp"
#include "photonhier/csv.hpp"
#include "photonhier/errors.hpp"
#include "photonhier/experiments.hpp"
#include "photonhier/hierarchy.hpp"
#include "photonhier/steady_state.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

namespace fs = std::filesystem;
using nlohmann::json;
using namespace photonhier;

namespace {

struct Options {
    std::string config;
    std::string out_dir;
    int threads{1};
    long long seed{0};  // reserved: the dynamics is deterministic

    std::string method{"exact"};
    int level{-1};
    std::string out;
    bool dump_f{false};
};

struct Context {
    RunConfig config;
    std::string hash;
    fs::path dir;
};

Context prepare(const Options& opt) {
    Context ctx;
    ctx.config = opt.config.empty() ? parse_config(json::object()) : load_config(opt.config);
    if (!opt.out_dir.empty()) ctx.config.output.directory = opt.out_dir;
    ctx.hash = config_hash(ctx.config);
    ctx.dir = ctx.config.output.directory;
    write_resolved_config(ctx.config, ctx.dir.string());
    return ctx;
}

std::string dims_string(const std::vector<Eigen::Index>& dims) {
    std::ostringstream os;
    os << '[';
    for (std::size_t k = 0; k < dims.size(); ++k) os << (k ? ", " : "") << dims[k];
    os << ']';
    return os.str();
}

void write_json(const fs::path& path, const json& j) {
    std::ofstream out(path);
    if (!out) throw ConfigError("cannot write '" + path.string() + "'");
    out << j.dump(2) << '\n';
}

json record_json(const RunRecord& r) {
    return {{"method", r.method},
            {"cpu_seconds", r.cpu_seconds},
            {"setup_seconds", r.setup_seconds},
            {"steps", r.steps},
            {"rejected", r.rejected},
            {"rhs_evals", r.rhs_evals},
            {"final_time", r.final_time},
            {"termination", r.termination},
            {"P_from", r.p_from},
            {"P_to", r.p_to},
            {"config_hash", r.config_hash}};
}

struct Built {
    Model model;
    Hierarchy hierarchy;
    double seconds;
};

Built build(const RunConfig& c, int max_level) {
    const double t0 = thread_cpu_seconds();
    Model model = build_model(c.model);
    Hierarchy h = build_hierarchy(model, max_level, c.hierarchy.rank_tol);
    return {std::move(model), std::move(h), thread_cpu_seconds() - t0};
}

int cmd_build(const Options& opt) {
    const Context ctx = prepare(opt);
    const Built b = build(ctx.config, ctx.config.hierarchy.max_level);
    const auto dims = b.hierarchy.dims();
    std::cout << "modes: " << b.model.num_modes() << ", groups: " << b.model.num_groups() << '\n';
    std::cout << "dims: " << dims_string(dims) << '\n';
    std::cout << "build_seconds: " << b.seconds << '\n';
    if (b.hierarchy.closed()) std::cout << "closed: hierarchy spans its whole invariant subspace\n";
    write_json(ctx.dir / "hierarchy.json", {{"dims", dims},
                                             {"closed", b.hierarchy.closed()},
                                             {"rank_tol", b.hierarchy.rank_tol()},
                                             {"build_seconds", b.seconds},
                                             {"config_hash", ctx.hash}});
    return 0;
}

int cmd_verify(const Options& opt) {
    const Context ctx = prepare(opt);
    const Built b = build(ctx.config, ctx.config.hierarchy.max_level);
    const HierarchyReport r = verify_hierarchy(b.model, b.hierarchy);
    std::cout << "dims: " << dims_string(r.dims) << '\n';
    std::cout << "orthonormality_residual: " << r.orthonormality_residual << '\n';
    std::cout << "cross_level_residual: " << r.cross_level_residual << '\n';
    std::cout << "tridiagonal_residual: " << r.tridiagonal_residual << '\n';
    std::cout << "dual_residual: " << r.dual_residual << '\n';
    std::cout << "s0_leakage: " << r.s0_leakage << '\n';
    const bool ok = r.orthonormality_residual < 1e-12 && r.cross_level_residual < 1e-10 &&
                    r.tridiagonal_residual < 1e-9 && (!b.hierarchy.full_rank() || r.dual_residual < 1e-10);
    std::cout << (ok ? "invariants: ok" : "invariants: VIOLATED") << '\n';
    write_json(ctx.dir / "verify.json", {{"dims", r.dims},
                                          {"orthonormality_residual", r.orthonormality_residual},
                                          {"cross_level_residual", r.cross_level_residual},
                                          {"tridiagonal_residual", r.tridiagonal_residual},
                                          {"dual_residual", r.dual_residual},
                                          {"s0_leakage", r.s0_leakage},
                                          {"ok", ok},
                                          {"config_hash", ctx.hash}});
    return ok ? 0 : 1;
}

// Power the system is assumed to have settled under before t = 0.
double initial_power(const PumpSchedule& pump) {
    const auto& v = pump.variant();
    if (const auto* q = std::get_if<QuenchPump>(&v)) return q->initial;
    if (const auto* p = std::get_if<PulsedPump>(&v)) return p->average;
    return std::get<ConstantPump>(v).power;
}

int cmd_simulate(const Options& opt) {
    const Context ctx = prepare(opt);
    const RunConfig& c = ctx.config;
    Method method;
    if (opt.method == "exact") {
        method = Method{-1};
    } else if (opt.method == "reduced") {
        method = Method{opt.level >= 0 ? opt.level : c.hierarchy.max_level};
    } else {
        throw ConfigError("--method: expected exact or reduced");
    }
    const Built b = build(c, std::max(method.level, 0));
    const SimulateConfig& sc = c.experiment.simulate;

    // initial condition in exact coordinates, mapped onto the method
    const double p0 = sc.initial_power ? *sc.initial_power : initial_power(c.pump);
    Eigen::VectorXd y0;
    if (sc.initial == "steady") {
        y0 = method_steady_state(b.model, &b.hierarchy, method, p0).state;
    } else {
        y0 = to_method_state(b.model, &b.hierarchy, method, ExactSystem(b.model).cold_state());
    }
    IntegratorSettings is = c.integrator_settings();
    is.record_states = opt.dump_f || c.output.dump_f;
    const Trajectory tr = simulate(b.model, &b.hierarchy, method, y0, 0.0, sc.t_final, c.pump, is);

    const fs::path out = opt.out.empty() ? ctx.dir / ("trajectory_" + method.name() + ".csv") : fs::path(opt.out);
    write_trajectory_csv(out.string(), b.model, tr);
    if (is.record_states) {
        std::vector<Eigen::VectorXd> f;
        if (method.exact()) {
            for (const auto& y : tr.states) f.push_back(y.tail(b.model.num_groups()));
        } else {
            const ReducedSystem sys(b.model, b.hierarchy, method.level);
            for (const auto& y : tr.states) f.push_back(sys.molecular_excitation(y));
        }
        fs::path fpath = out;
        fpath.replace_extension();
        write_excitation_csv(fpath.string() + "_f.csv", tr.times, f);
    }
    RunRecord rec;
    rec.method = method.name();
    rec.cpu_seconds = tr.stats.cpu_seconds;
    rec.steps = tr.stats.steps;
    rec.rejected = tr.stats.rejected;
    rec.rhs_evals = tr.stats.rhs_evals;
    rec.final_time = tr.final_time;
    rec.termination = "completed";
    rec.config_hash = ctx.hash;
    write_json(ctx.dir / "records.json", json::array({record_json(rec)}));
    std::cout << method.name() << ": " << tr.stats.steps << " steps, " << tr.stats.cpu_seconds << " s cpu -> "
              << out.string() << '\n';
    if (tr.min_population < -10.0 * is.abs_tol) {
        std::cerr << "warning: occupation fell to " << tr.min_population << '\n';
    }
    return 0;
}

int cmd_quench(const Options& opt) {
    const Context ctx = prepare(opt);
    const RunConfig& c = ctx.config;
    const QuenchSpec& q = c.experiment.quench;
    int top = 0;
    for (int j : q.levels) top = std::max(top, j);
    const Built b = build(c, top);
    const QuenchResult res = run_quench(q, b.model, b.hierarchy, c.integrator_settings(), ctx.hash);

    json records = json::array();
    for (const auto& run : res.runs) {
        write_trajectory_csv((ctx.dir / ("trajectory_" + run.method.name() + ".csv")).string(), b.model,
                             run.trajectory);
        records.push_back(record_json(run.record));
        std::cout << run.method.name() << ": " << run.record.steps << " steps, " << run.record.cpu_seconds
                  << " s cpu\n";
    }
    json eps = json::object();
    for (const auto& [level, series] : res.epsilon) {
        write_epsilon_csv((ctx.dir / ("epsilon_" + std::to_string(level) + ".csv")).string(), b.model, series);
        std::cout << "epsilon_" << level << ": max " << series.max() << ", median " << series.median() << '\n';
        eps[std::to_string(level)] = {{"max", series.max()}, {"median", series.median()}};
    }
    write_json(ctx.dir / "records.json",
               {{"records", records}, {"epsilon", eps}, {"build_seconds", b.seconds}, {"dims", b.hierarchy.dims()}});
    return 0;
}

int cmd_pulsed(const Options& opt) {
    const Context ctx = prepare(opt);
    const RunConfig& c = ctx.config;
    std::vector<Method> methods;
    int top = 0;
    for (const auto& name : c.experiment.pulsed.methods) {
        methods.push_back(Method::parse(name));
        top = std::max(top, methods.back().level);
    }
    const Built b = build(c, top);

    json records = json::array();
    std::vector<std::string> header{"method"};
    for (auto& col : occupation_columns(b.model)) header.push_back(col);
    header.push_back("drift");
    CsvWriter avg((ctx.dir / "averages.csv").string(), header);
    for (const Method& m : methods) {
        const PulsedResult r = run_pulsed(c.experiment.pulsed.spec, b.model, &b.hierarchy, m,
                                          c.integrator_settings(), ctx.hash);
        write_trajectory_csv((ctx.dir / ("trajectory_" + m.name() + ".csv")).string(), b.model, r.trajectory);
        json rec = record_json(r.record);
        rec["drift"] = r.drift;
        rec["periodic"] = r.periodic;
        rec["pump_energy"] = r.pump_energy;
        rec["average"] = std::vector<double>(r.average.data(), r.average.data() + r.average.size());
        records.push_back(rec);
        std::vector<std::string> row{m.name()};
        for (Eigen::Index i = 0; i < r.average.size(); ++i) row.push_back(format_double(r.average(i)));
        row.push_back(format_double(r.drift));
        avg.row(row);
        std::cout << m.name() << ": drift " << r.drift << (r.periodic ? "" : " (not yet periodic)") << '\n';
        for (Eigen::Index i = 0; i < r.average.size(); ++i) {
            std::cout << "  " << b.model.modes()[std::size_t(i)].label() << " " << r.average(i) << '\n';
        }
        if (!r.periodic) std::cerr << "warning: " << m.name() << " drift exceeds drift_tol\n";
    }
    write_json(ctx.dir / "records.json", {{"records", records}, {"build_seconds", b.seconds}});
    return 0;
}

int cmd_benchmark(const Options& opt) {
    const Context ctx = prepare(opt);
    const RunConfig& c = ctx.config;
    BenchmarkSpec spec = c.experiment.benchmark.spec;
    spec.threads = opt.threads;
    int top = 0;
    for (int j : spec.levels) top = std::max(top, j);
    const Built b = build(c, top);
    const BenchmarkResult res = run_benchmark(spec, b.model, b.hierarchy, c.integrator_settings(), ctx.hash);
    const BenchmarkSummary sum = summarize(res, c.experiment.benchmark.histogram);

    json pairs = json::array();
    for (const auto& pr : res.pairs) {
        json recs = json::array();
        for (const auto& r : pr.records) recs.push_back(record_json(r));
        pairs.push_back({{"index", pr.index}, {"P_from", pr.p_from}, {"P_to", pr.p_to}, {"records", recs}});
    }
    json methods = json::array();
    for (const auto& m : sum.methods) {
        methods.push_back({{"method", m.method},
                           {"median_relative", std::isnan(m.median) ? json(nullptr) : json(m.median)},
                           {"max_relative", std::isnan(m.max) ? json(nullptr) : json(m.max)},
                           {"median_cpu", std::isnan(m.median_cpu) ? json(nullptr) : json(m.median_cpu)},
                           {"failures", m.failures}});
        std::cout << m.method << ": median cpu " << m.median_cpu;
        if (!std::isnan(m.median)) std::cout << " s, relative median " << m.median << ", max " << m.max;
        std::cout << '\n';
    }
    write_json(ctx.dir / "records.json", {{"powers", res.powers},
                                           {"dims", b.hierarchy.dims()},
                                           {"build_seconds", b.seconds},
                                           {"steady_state_seconds", res.steady_state_seconds},
                                           {"pairs", pairs},
                                           {"summary", methods},
                                           {"failures", sum.failures}});
    write_histogram_csv((ctx.dir / "histogram.csv").string(), sum);
    for (const auto& f : sum.failures) std::cerr << "failed: " << f << '\n';
    return 0;
}

int cmd_profiles(const Options& opt) {
    const Context ctx = prepare(opt);
    const RunConfig& c = ctx.config;
    const Model model = build_model(c.model);
    const int count = c.experiment.profiles.count > 0 ? c.experiment.profiles.count : int(model.num_modes());
    const ProfileTable t = emit_profiles_1d(model, count, c.hierarchy.rank_tol);
    const fs::path out = opt.out.empty() ? ctx.dir / "profiles.csv" : fs::path(opt.out);
    write_profiles_csv(out.string(), t);
    // value at the grid point closest to the origin
    std::size_t centre = 0;
    for (std::size_t p = 0; p < t.x.size(); ++p) {
        if (std::abs(t.x[p]) < std::abs(t.x[centre])) centre = p;
    }
    for (int i = 0; i < count; ++i) {
        std::cout << "e" << t.labels[std::size_t(i)] << "(x=" << t.x[centre] << ") = "
                  << t.profiles(Eigen::Index(centre), i) << '\n';
    }
    std::cout << "-> " << out.string() << '\n';
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Multimode photon-condensate rate equations with hierarchical model reduction"};
    app.set_version_flag("--version", std::string(kVersion));
    app.require_subcommand(1);
    Options opt;
    app.add_option("--config", opt.config, "JSON configuration file (default parameters if omitted)");
    app.add_option("--out-dir", opt.out_dir, "output directory (overrides output.directory)");
    app.add_option("--threads", opt.threads, "worker threads for the benchmark")->check(CLI::PositiveNumber);
    app.add_option("--seed", opt.seed, "reserved; the dynamics is deterministic");

    auto* build_cmd = app.add_subcommand("build", "build the hierarchy and report its dimensions");
    auto* verify_cmd = app.add_subcommand("verify", "check the hierarchy invariants");
    auto* sim_cmd = app.add_subcommand("simulate", "integrate one method under the configured pump");
    sim_cmd->add_option("--method", opt.method, "exact or reduced")->check(CLI::IsMember({"exact", "reduced"}));
    sim_cmd->add_option("--level", opt.level, "truncation level for --method reduced")->check(CLI::NonNegativeNumber);
    sim_cmd->add_option("--out", opt.out, "trajectory CSV path");
    sim_cmd->add_flag("--dump-f", opt.dump_f, "also write molecular excitation snapshots");
    auto* quench_cmd = app.add_subcommand("quench", "pump quench: exact vs truncated levels");
    auto* pulsed_cmd = app.add_subcommand("pulsed", "pulsed pumping and period-averaged populations");
    auto* bench_cmd = app.add_subcommand("benchmark", "CPU-time benchmark over ordered pump pairs");
    auto* prof_cmd = app.add_subcommand("profiles", "excitation profiles of a 1D model");
    prof_cmd->add_option("--out", opt.out, "profile CSV path");
    for (auto* sub : {build_cmd, verify_cmd, sim_cmd, quench_cmd, pulsed_cmd, bench_cmd, prof_cmd}) {
        sub->fallthrough();
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::Success& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    try {
        if (*build_cmd) return cmd_build(opt);
        if (*verify_cmd) return cmd_verify(opt);
        if (*sim_cmd) return cmd_simulate(opt);
        if (*quench_cmd) return cmd_quench(opt);
        if (*pulsed_cmd) return cmd_pulsed(opt);
        if (*bench_cmd) return cmd_benchmark(opt);
        if (*prof_cmd) return cmd_profiles(opt);
    } catch (const ConfigError& e) {
        std::cerr << "configuration error: " << e.what() << '\n';
        return 2;
    } catch (const NumericalError& e) {
        std::cerr << "numerical error: " << e.what() << '\n';
        return 1;
    } catch (const std::filesystem::filesystem_error& e) {
        std::cerr << "configuration error: " << e.what() << '\n';
        return 2;
    }
    return 2;
}
