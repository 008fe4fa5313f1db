#include "photonhier/config.hpp"

#include "photonhier/errors.hpp"

#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <set>
#include <sstream>

namespace photonhier {

using nlohmann::json;

namespace {

[[noreturn]] void fail(const std::string& path, const std::string& msg) {
    throw ConfigError(path + ": " + msg);
}

// Strict view on one JSON object: every key read is recorded, and finish()
// rejects whatever was left over.
class Section {
public:
    Section(const json& j, std::string path) : j_(j), path_(std::move(path)) {
        if (!j_.is_object()) fail(path_, "expected an object");
    }

    std::string path(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }
    const std::string& name() const noexcept { return path_; }

    bool has(const std::string& key) const { return j_.contains(key); }

    const json* take(const std::string& key) {
        used_.insert(key);
        const auto it = j_.find(key);
        return it == j_.end() ? nullptr : &*it;
    }

    double number(const std::string& key, double def) {
        const json* v = take(key);
        if (v == nullptr) return def;
        if (!v->is_number()) fail(path(key), "expected a number");
        const double x = v->get<double>();
        if (!std::isfinite(x)) fail(path(key), "expected a finite number");
        return x;
    }

    // null means +infinity
    double number_or_inf(const std::string& key, double def) {
        const json* v = take(key);
        if (v == nullptr) return def;
        if (v->is_null()) return std::numeric_limits<double>::infinity();
        if (!v->is_number()) fail(path(key), "expected a number or null");
        return v->get<double>();
    }

    std::optional<double> optional_number(const std::string& key) {
        if (!has(key)) {
            take(key);
            return std::nullopt;
        }
        const json* v = take(key);
        if (v->is_null()) return std::nullopt;
        return number(key, 0.0);
    }

    long long integer(const std::string& key, long long def) {
        const json* v = take(key);
        if (v == nullptr) return def;
        if (!v->is_number_integer()) fail(path(key), "expected an integer");
        return v->get<long long>();
    }

    bool boolean(const std::string& key, bool def) {
        const json* v = take(key);
        if (v == nullptr) return def;
        if (!v->is_boolean()) fail(path(key), "expected true or false");
        return v->get<bool>();
    }

    std::string string(const std::string& key, const std::string& def) {
        const json* v = take(key);
        if (v == nullptr) return def;
        if (!v->is_string()) fail(path(key), "expected a string");
        return v->get<std::string>();
    }

    std::vector<double> numbers(const std::string& key, const std::vector<double>& def) {
        const json* v = take(key);
        if (v == nullptr) return def;
        if (!v->is_array()) fail(path(key), "expected an array of numbers");
        std::vector<double> out;
        for (std::size_t k = 0; k < v->size(); ++k) {
            if (!(*v)[k].is_number()) fail(path(key) + "[" + std::to_string(k) + "]", "expected a number");
            out.push_back((*v)[k].get<double>());
        }
        return out;
    }

    std::vector<int> integers(const std::string& key, const std::vector<int>& def) {
        const json* v = take(key);
        if (v == nullptr) return def;
        if (!v->is_array()) fail(path(key), "expected an array of integers");
        std::vector<int> out;
        for (std::size_t k = 0; k < v->size(); ++k) {
            if (!(*v)[k].is_number_integer()) {
                fail(path(key) + "[" + std::to_string(k) + "]", "expected an integer");
            }
            out.push_back((*v)[k].get<int>());
        }
        return out;
    }

    std::vector<std::string> strings(const std::string& key, const std::vector<std::string>& def) {
        const json* v = take(key);
        if (v == nullptr) return def;
        if (!v->is_array()) fail(path(key), "expected an array of strings");
        std::vector<std::string> out;
        for (std::size_t k = 0; k < v->size(); ++k) {
            if (!(*v)[k].is_string()) fail(path(key) + "[" + std::to_string(k) + "]", "expected a string");
            out.push_back((*v)[k].get<std::string>());
        }
        return out;
    }

    std::optional<Section> child(const std::string& key) {
        const json* v = take(key);
        if (v == nullptr) return std::nullopt;
        return Section(*v, path(key));
    }

    void finish() const {
        for (auto it = j_.begin(); it != j_.end(); ++it) {
            if (!used_.count(it.key())) fail(path(it.key()), "unknown key");
        }
    }

private:
    const json& j_;
    std::string path_;
    std::set<std::string> used_;
};

// Runs a validator and prefixes its message with the config path.
template <class F>
void checked(const std::string& path, F&& f) {
    try {
        f();
    } catch (const ConfigError& e) {
        fail(path, e.what());
    }
}

void parse_model(Section& s, ModelConfig& m) {
    m.dimensions = int(s.integer("dimensions", m.dimensions));
    if (m.dimensions != 1 && m.dimensions != 2) fail(s.path("dimensions"), "must be 1 or 2");
    m.max_level = int(s.integer("max_level", m.max_level));
    if (m.max_level < 0) fail(s.path("max_level"), "must be non-negative");

    const bool custom_levels = s.has("max_level");
    m.absorption_per_level = s.numbers("A_per_level", m.absorption_per_level);
    m.emission_per_level = s.numbers("E_per_level", m.emission_per_level);
    // Truncate the default lists when only the level count was changed.
    if (custom_levels) {
        const auto want = std::size_t(m.max_level + 1);
        if (m.absorption_per_level.size() > want && m.absorption_per_level == defaults::absorption_per_level) {
            m.absorption_per_level.resize(want);
        }
        if (m.emission_per_level.size() > want && m.emission_per_level == defaults::emission_per_level) {
            m.emission_per_level.resize(want);
        }
    }
    const auto want = std::size_t(m.max_level + 1);
    if (m.absorption_per_level.size() != want) {
        fail(s.path("A_per_level"), "needs max_level + 1 = " + std::to_string(want) + " entries");
    }
    if (m.emission_per_level.size() != want) {
        fail(s.path("E_per_level"), "needs max_level + 1 = " + std::to_string(want) + " entries");
    }
    for (std::size_t k = 0; k < want; ++k) {
        if (!(m.absorption_per_level[k] > 0.0)) fail(s.path("A_per_level") + "[" + std::to_string(k) + "]", "must be positive");
        if (!(m.emission_per_level[k] > 0.0)) fail(s.path("E_per_level") + "[" + std::to_string(k) + "]", "must be positive");
    }

    if (auto g = s.child("grid")) {
        m.grid.points_per_axis = int(g->integer("points_per_axis", m.grid.points_per_axis));
        if (m.grid.points_per_axis < 1) fail(g->path("points_per_axis"), "must be positive");
        if (auto sp = g->optional_number("spacing")) {
            if (!(*sp > 0.0)) fail(g->path("spacing"), "must be positive");
            m.grid.spacing = sp;
        }
        if (auto ex = g->optional_number("extent")) {
            if (!(*ex > 0.0)) fail(g->path("extent"), "must be positive");
            m.grid.extent = ex;
        }
        g->finish();
    }
    if (auto d = s.optional_number("density")) {
        if (!(*d > 0.0)) fail(s.path("density"), "must be positive");
        m.density = d;
    }
    m.gamma_down = s.number("Gamma_down", m.gamma_down);
    if (!(m.gamma_down >= 0.0)) fail(s.path("Gamma_down"), "must be non-negative");

    if (const json* ov = s.take("overrides")) {
        if (!ov->is_array()) fail(s.path("overrides"), "expected an array");
        for (std::size_t k = 0; k < ov->size(); ++k) {
            Section o((*ov)[k], s.path("overrides") + "[" + std::to_string(k) + "]");
            const std::vector<int> mode = o.integers("mode", {});
            if (mode.empty() || mode.size() > 2) fail(o.path("mode"), "expected [mx, my] or [m]");
            ModeOverride mo;
            mo.mx = mode[0];
            mo.my = mode.size() == 2 ? mode[1] : 0;
            mo.absorption = o.optional_number("A");
            mo.emission = o.optional_number("E");
            o.finish();
            m.overrides.push_back(mo);
        }
    }
    s.finish();
    checked(s.name(), [&] { build_model(m); });
}

PumpSchedule parse_pump(Section& s) {
    const std::string type = s.string("type", "quench");
    if (type != "constant" && type != "quench" && type != "pulsed") {
        fail(s.path("type"), "expected constant, quench or pulsed");
    }
    PumpSchedule p;
    checked(s.name(), [&] {
        if (type == "constant") {
            p = PumpSchedule::constant(s.number("power", 0.0));
        } else if (type == "quench") {
            p = PumpSchedule::quench(s.number("initial", 6.58e-6), s.number("final", 2e-5),
                                     s.number("switch_time", 0.0));
        } else {
            p = PumpSchedule::pulsed(s.number("average", std::pow(10.0, -3.2)), s.number("duty", 0.01),
                                     s.number("period", 40.0));
        }
    });
    s.finish();
    return p;
}

}  // namespace

IntegratorSettings RunConfig::integrator_settings() const {
    IntegratorSettings s = integrator;
    s.sample_interval = output.sample_interval;
    return s;
}

RunConfig parse_config(const json& j) {
    RunConfig c;
    Section root(j, "");
    root.take("photonhier_version");  // informational, written by write_resolved_config

    if (auto s = root.child("model")) parse_model(*s, c.model);
    else checked("model", [&] { build_model(c.model); });

    if (auto s = root.child("pump")) c.pump = parse_pump(*s);

    if (auto s = root.child("hierarchy")) {
        c.hierarchy.max_level = int(s->integer("max_level", c.hierarchy.max_level));
        if (c.hierarchy.max_level < 0) fail(s->path("max_level"), "must be non-negative");
        c.hierarchy.rank_tol = s->number("rank_tol", c.hierarchy.rank_tol);
        if (!(c.hierarchy.rank_tol > 0.0 && c.hierarchy.rank_tol < 1.0)) fail(s->path("rank_tol"), "must lie in (0, 1)");
        s->finish();
    }

    if (auto s = root.child("integrator")) {
        IntegratorSettings& is = c.integrator;
        is.rel_tol = s->number("rel_tol", is.rel_tol);
        if (!(is.rel_tol > 0.0)) fail(s->path("rel_tol"), "must be positive");
        is.abs_tol = s->number("abs_tol", is.abs_tol);
        if (!(is.abs_tol > 0.0)) fail(s->path("abs_tol"), "must be positive");
        is.max_step = s->number_or_inf("max_step", is.max_step);
        if (!(is.max_step > 0.0)) fail(s->path("max_step"), "must be positive (null: unbounded)");
        is.initial_step = s->number("initial_step", is.initial_step);
        if (is.initial_step < 0.0) fail(s->path("initial_step"), "must be non-negative (0: automatic)");
        is.max_steps = s->integer("max_steps", is.max_steps);
        if (is.max_steps <= 0) fail(s->path("max_steps"), "must be positive");
        s->finish();
    }

    if (auto e = root.child("experiment")) {
        if (auto s = e->child("simulate")) {
            SimulateConfig& sc = c.experiment.simulate;
            sc.t_final = s->number("t_final", sc.t_final);
            if (!(sc.t_final > 0.0)) fail(s->path("t_final"), "must be positive");
            sc.initial = s->string("initial", sc.initial);
            if (sc.initial != "steady" && sc.initial != "cold") fail(s->path("initial"), "expected steady or cold");
            sc.initial_power = s->optional_number("initial_power");
            if (sc.initial_power && !(*sc.initial_power >= 0.0)) fail(s->path("initial_power"), "must be non-negative");
            s->finish();
        }
        if (auto s = e->child("quench")) {
            QuenchSpec& q = c.experiment.quench;
            q.p_initial = s->number("P_initial", q.p_initial);
            q.p_final = s->number("P_final", q.p_final);
            q.t_final = s->number("t_final", q.t_final);
            q.levels = s->integers("levels", q.levels);
            q.include_exact = s->boolean("include_exact", q.include_exact);
            q.epsilon_floor = s->number("epsilon_floor", q.epsilon_floor);
            s->finish();
            checked(s->name(), [&] { q.validate(); });
        }
        if (auto s = e->child("pulsed")) {
            PulsedSpec& p = c.experiment.pulsed.spec;
            p.duty = s->number("duty", p.duty);
            p.period = s->number("period", p.period);
            p.average = s->number("P_avg", p.average);
            p.warmup_periods = int(s->integer("warmup_periods", p.warmup_periods));
            p.averaging_periods = int(s->integer("averaging_periods", p.averaging_periods));
            p.drift_tol = s->number("drift_tol", p.drift_tol);
            c.experiment.pulsed.methods = s->strings("methods", c.experiment.pulsed.methods);
            s->finish();
            checked(s->name(), [&] {
                p.validate();
                if (c.experiment.pulsed.methods.empty()) throw ConfigError("methods must not be empty");
                for (const auto& m : c.experiment.pulsed.methods) Method::parse(m);
            });
        }
        if (auto s = e->child("benchmark")) {
            BenchmarkSpec& b = c.experiment.benchmark.spec;
            b.p_min = s->number("p_min", b.p_min);
            b.p_max = s->number("p_max", b.p_max);
            b.count = int(s->integer("count", b.count));
            b.subset = s->integers("subset", b.subset);
            b.levels = s->integers("levels", b.levels);
            b.include_exact = s->boolean("include_exact", b.include_exact);
            b.tolerance = s->number("tolerance", b.tolerance);
            b.floor = s->number("floor", b.floor);
            b.t_max = s->number("t_max", b.t_max);
            b.repeats = int(s->integer("repeats", b.repeats));
            if (auto h = s->child("histogram")) {
                HistogramSpec& hs = c.experiment.benchmark.histogram;
                hs.bins = int(h->integer("bins", hs.bins));
                hs.lo = h->number("lo", hs.lo);
                hs.hi = h->number("hi", hs.hi);
                h->finish();
                checked(h->name(), [&] { hs.validate(); });
            }
            s->finish();
            checked(s->name(), [&] { b.validate(); });
        }
        if (auto s = e->child("profiles")) {
            c.experiment.profiles.count = int(s->integer("count", c.experiment.profiles.count));
            if (c.experiment.profiles.count < 0) fail(s->path("count"), "must be non-negative");
            s->finish();
        }
        e->finish();
    }

    if (auto s = root.child("output")) {
        c.output.directory = s->string("directory", c.output.directory);
        if (c.output.directory.empty()) fail(s->path("directory"), "must not be empty");
        c.output.sample_interval = s->number("sample_interval", c.output.sample_interval);
        if (!(c.output.sample_interval > 0.0)) fail(s->path("sample_interval"), "must be positive");
        c.output.dump_f = s->boolean("dump_f", c.output.dump_f);
        s->finish();
    }
    root.finish();
    return c;
}

RunConfig parse_config_text(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ConfigError(std::string("malformed JSON: ") + e.what());
    }
    return parse_config(j);
}

RunConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file '" + path + "'");
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_config_text(ss.str());
}

json to_json(const RunConfig& c) {
    json j;
    const ModelConfig& m = c.model;
    json overrides = json::array();
    for (const auto& o : m.overrides) {
        json e;
        e["mode"] = m.dimensions == 1 ? json::array({o.mx}) : json::array({o.mx, o.my});
        if (o.absorption) e["A"] = *o.absorption;
        if (o.emission) e["E"] = *o.emission;
        overrides.push_back(e);
    }
    j["model"] = {
        {"dimensions", m.dimensions},
        {"max_level", m.max_level},
        {"A_per_level", m.absorption_per_level},
        {"E_per_level", m.emission_per_level},
        {"grid", {{"points_per_axis", m.grid.points_per_axis}, {"spacing", m.grid.resolved_spacing()}}},
        {"density", m.resolved_density()},
        {"Gamma_down", m.gamma_down},
        {"overrides", overrides},
    };

    std::visit(
        [&](const auto& p) {
            using T = std::decay_t<decltype(p)>;
            if constexpr (std::is_same_v<T, ConstantPump>) {
                j["pump"] = {{"type", "constant"}, {"power", p.power}};
            } else if constexpr (std::is_same_v<T, QuenchPump>) {
                j["pump"] = {{"type", "quench"},
                             {"initial", p.initial},
                             {"final", p.final_power},
                             {"switch_time", p.switch_time}};
            } else {
                j["pump"] = {{"type", "pulsed"}, {"average", p.average}, {"duty", p.duty}, {"period", p.period}};
            }
        },
        c.pump.variant());

    j["hierarchy"] = {{"max_level", c.hierarchy.max_level}, {"rank_tol", c.hierarchy.rank_tol}};

    const IntegratorSettings& is = c.integrator;
    j["integrator"] = {
        {"rel_tol", is.rel_tol},
        {"abs_tol", is.abs_tol},
        {"max_step", std::isfinite(is.max_step) ? json(is.max_step) : json(nullptr)},
        {"initial_step", is.initial_step},
        {"max_steps", is.max_steps},
    };

    const ExperimentConfig& e = c.experiment;
    const QuenchSpec& q = e.quench;
    const PulsedSpec& p = e.pulsed.spec;
    const BenchmarkSpec& b = e.benchmark.spec;
    const HistogramSpec& h = e.benchmark.histogram;
    j["experiment"] = {
        {"simulate",
         {{"t_final", e.simulate.t_final},
          {"initial", e.simulate.initial},
          {"initial_power", e.simulate.initial_power ? json(*e.simulate.initial_power) : json(nullptr)}}},
        {"quench",
         {{"P_initial", q.p_initial},
          {"P_final", q.p_final},
          {"t_final", q.t_final},
          {"levels", q.levels},
          {"include_exact", q.include_exact},
          {"epsilon_floor", q.epsilon_floor}}},
        {"pulsed",
         {{"duty", p.duty},
          {"period", p.period},
          {"P_avg", p.average},
          {"warmup_periods", p.warmup_periods},
          {"averaging_periods", p.averaging_periods},
          {"drift_tol", p.drift_tol},
          {"methods", e.pulsed.methods}}},
        {"benchmark",
         {{"p_min", b.p_min},
          {"p_max", b.p_max},
          {"count", b.count},
          {"subset", b.subset},
          {"levels", b.levels},
          {"include_exact", b.include_exact},
          {"tolerance", b.tolerance},
          {"floor", b.floor},
          {"t_max", b.t_max},
          {"repeats", b.repeats},
          {"histogram", {{"bins", h.bins}, {"lo", h.lo}, {"hi", h.hi}}}}},
        {"profiles", {{"count", e.profiles.count}}},
    };

    j["output"] = {
        {"directory", c.output.directory},
        {"sample_interval", c.output.sample_interval},
        {"dump_f", c.output.dump_f},
    };
    return j;
}

std::string config_hash(const RunConfig& config) {
    const std::string text = to_json(config).dump();
    std::uint64_t h = 14695981039346656037ULL;
    for (unsigned char ch : text) {
        h ^= ch;
        h *= 1099511628211ULL;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

void write_resolved_config(const RunConfig& config, const std::string& directory) {
    std::filesystem::create_directories(directory);
    json j = to_json(config);
    j["photonhier_version"] = kVersion;
    std::ofstream out(std::filesystem::path(directory) / "config.json");
    if (!out) throw ConfigError("cannot write into output directory '" + directory + "'");
    out << j.dump(2) << '\n';
}

}  // namespace photonhier
