// Declarative run configuration (JSON). Every key is optional and falls back
// to the default parameter set; unknown keys are rejected with their path.
#pragma once

#include "photonhier/experiments.hpp"
#include "photonhier/integrator.hpp"
#include "photonhier/model.hpp"
#include "photonhier/pump.hpp"

#include <json.hpp>

#include <optional>
#include <string>
#include <vector>

namespace photonhier {

inline constexpr const char* kVersion = "0.3.1";

struct HierarchyConfig {
    int max_level{3};
    double rank_tol{1e-10};
};

struct SimulateConfig {
    double t_final{200.0};
    std::string initial{"steady"};       // "steady" or "cold"
    std::optional<double> initial_power;  // unset: the pump value just before t = 0
};

struct PulsedConfig {
    PulsedSpec spec;
    std::vector<std::string> methods{"exact", "level_2"};
};

struct BenchmarkConfig {
    BenchmarkSpec spec;
    HistogramSpec histogram;
};

struct ProfilesConfig {
    int count{0};  // 0: every mode
};

struct ExperimentConfig {
    SimulateConfig simulate;
    QuenchSpec quench;
    PulsedConfig pulsed;
    BenchmarkConfig benchmark;
    ProfilesConfig profiles;
};

struct OutputConfig {
    std::string directory{"out"};
    double sample_interval{0.5};
    bool dump_f{false};
};

struct RunConfig {
    ModelConfig model;
    PumpSchedule pump{PumpSchedule::quench(6.58e-6, 2e-5, 0.0)};
    HierarchyConfig hierarchy;
    IntegratorSettings integrator;
    ExperimentConfig experiment;
    OutputConfig output;

    // integrator settings with the output sampling interval applied
    IntegratorSettings integrator_settings() const;
};

RunConfig parse_config(const nlohmann::json& j);
RunConfig parse_config_text(const std::string& text);
RunConfig load_config(const std::string& path);

// Fully resolved: every default written out explicitly.
nlohmann::json to_json(const RunConfig& config);

// FNV-1a (64 bit) of the compact resolved JSON, as 16 hex digits.
std::string config_hash(const RunConfig& config);

// Writes config.json (resolved config + tool version) into `directory`,
// creating it if needed.
void write_resolved_config(const RunConfig& config, const std::string& directory);

}  // namespace photonhier
