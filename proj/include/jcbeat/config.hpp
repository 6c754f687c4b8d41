#pragma once

// Experiment configuration, read from and written to JSON.
//
// {
//   "experiment": "wigner_origin",
//   "params": {"g": 500, "kappa": 0.5, "gamma": 1, "eps_d": 37.5,
//              "detuning": "two_photon_shifted", "n_trunc": 8},
//   "model": "effective",
//   "channel": "side",
//   "times": {"start": 0, "stop": 1, "step": 0.001},
//   ...
// }
//
// Rates are in units of gamma, times in 1/gamma. Unknown keys are rejected.

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "jcbeat/conditioning.hpp"
#include "jcbeat/lindblad.hpp"
#include "jcbeat/trajectories.hpp"
#include "jcbeat/wigner.hpp"

namespace jcbeat {

enum class ExperimentKind { steady, transient, wigner_grid, wigner_origin, g2, trajectory, ensemble, figure_preset };
std::string to_string(ExperimentKind kind);
ExperimentKind experiment_kind_from_string(const std::string& name);

// full: truncated Jaynes-Cummings master equation; effective: four-level model.
enum class Model { full, effective };
std::string to_string(Model model);
Model model_from_string(const std::string& name);

// Initial state of a transient, trajectory or ensemble.
//   ground, one_photon (|1,->), steady, conditioned (steady state after `channel`)
enum class InitKind { ground, one_photon, steady, conditioned };
std::string to_string(InitKind kind);
InitKind init_kind_from_string(const std::string& name);

struct TimeGrid {
    double start = 0.0;
    double stop = 1.0;
    double step = 1e-3;

    // start, start + step, ... up to stop inclusive (stop is appended if the
    // last multiple falls short by more than step/1000).
    std::vector<double> points() const;
    void validate() const;
    bool operator==(const TimeGrid&) const = default;
};

struct ExperimentConfig {
    ExperimentKind experiment = ExperimentKind::steady;
    SystemParams params;
    Model model = Model::full;
    std::optional<EmissionChannel> channel;
    InitKind init = InitKind::ground;
    TimeGrid times;
    GridSpec grid;
    double tau = 0.0;            // snapshot time for wigner_grid
    bool binary = false;         // wigner_grid: also write the binary grid
    Unraveling method = Unraveling::qsd;
    std::uint64_t seed = 1;
    std::size_t trajectories = 100;
    std::string preset;          // figure_preset only
    std::string output;          // output directory; empty selects the CLI default

    // Throws InvalidArgument naming the offending field.
    void validate() const;
    bool operator==(const ExperimentConfig&) const = default;
};

nlohmann::ordered_json to_json(const ExperimentConfig& config);
// Throws InvalidArgument on missing, mistyped, non-finite or unknown fields.
ExperimentConfig config_from_json(const nlohmann::json& j);
ExperimentConfig parse_config(const std::string& text);
ExperimentConfig load_config(const std::string& path);

// Hash of the fields the chosen experiment reads; output location and format
// flags are left out.
std::uint64_t config_fingerprint(const ExperimentConfig& config);
std::string hex(std::uint64_t value);

} // namespace jcbeat
