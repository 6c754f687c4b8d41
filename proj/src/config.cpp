#include "jcbeat/config.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

#include "jcbeat/error.hpp"

namespace jcbeat {

namespace {

using json = nlohmann::json;

const std::vector<std::string> preset_names{"fig2", "fig3a", "fig3b", "fig3c", "fig4a", "fig4b"};

[[noreturn]] void fail(const std::string& where, const std::string& what) {
    throw InvalidArgument("config: " + where + ": " + what);
}

void reject_unknown(const json& obj, const std::string& where, const std::set<std::string>& allowed) {
    if (!obj.is_object()) fail(where, "expected an object");
    for (const auto& [k, v] : obj.items()) {
        if (!allowed.count(k)) fail(where.empty() ? k : where + "." + k, "unknown key");
    }
}

std::string path(const std::string& where, const std::string& key) { return where.empty() ? key : where + "." + key; }

double number(const json& obj, const std::string& where, const std::string& key) {
    if (!obj.contains(key)) fail(path(where, key), "missing");
    const auto& v = obj.at(key);
    if (!v.is_number()) fail(path(where, key), "expected a number");
    const double x = v.get<double>();
    if (!std::isfinite(x)) fail(path(where, key), "must be finite");
    return x;
}

double number_or(const json& obj, const std::string& where, const std::string& key, double fallback) {
    return obj.contains(key) ? number(obj, where, key) : fallback;
}

std::uint64_t integer(const json& obj, const std::string& where, const std::string& key) {
    if (!obj.contains(key)) fail(path(where, key), "missing");
    const auto& v = obj.at(key);
    if (!v.is_number_unsigned()) {
        if (v.is_number_integer()) fail(path(where, key), "must be non-negative");
        fail(path(where, key), "expected an integer");
    }
    return v.get<std::uint64_t>();
}

std::string text(const json& obj, const std::string& where, const std::string& key) {
    if (!obj.contains(key)) fail(path(where, key), "missing");
    const auto& v = obj.at(key);
    if (!v.is_string()) fail(path(where, key), "expected a string");
    return v.get<std::string>();
}

template <class F>
auto parse_enum(const json& obj, const std::string& where, const std::string& key, F&& from_string) {
    const auto name = text(obj, where, key);
    try {
        return from_string(name);
    } catch (const InvalidArgument&) {
        fail(path(where, key), "unknown value '" + name + "'");
    }
}

SystemParams params_from_json(const json& j) {
    reject_unknown(j, "params", {"g", "kappa", "gamma", "eps_d", "detuning", "explicit_detuning", "n_trunc"});
    SystemParams p;
    p.g = number(j, "params", "g");
    p.kappa = number(j, "params", "kappa");
    p.gamma = number(j, "params", "gamma");
    p.eps_d = number(j, "params", "eps_d");
    if (j.contains("detuning")) p.detuning_mode = parse_enum(j, "params", "detuning", detuning_mode_from_string);
    if (j.contains("explicit_detuning")) {
        if (p.detuning_mode != DetuningMode::explicit_value)
            fail("params.explicit_detuning", "only allowed with detuning = explicit_value");
        p.explicit_detuning = number(j, "params", "explicit_detuning");
    } else if (p.detuning_mode == DetuningMode::explicit_value) {
        fail("params.explicit_detuning", "missing");
    }
    const auto n = integer(j, "params", "n_trunc");
    if (n < 2 || n > 200) fail("params.n_trunc", "must lie in [2, 200]");
    p.spec = HilbertSpec(static_cast<int>(n));
    return p;
}

bool uses_times(ExperimentKind k) {
    return k == ExperimentKind::transient || k == ExperimentKind::wigner_origin || k == ExperimentKind::g2 ||
           k == ExperimentKind::trajectory || k == ExperimentKind::ensemble;
}

} // namespace

std::string to_string(ExperimentKind kind) {
    switch (kind) {
    case ExperimentKind::steady: return "steady";
    case ExperimentKind::transient: return "transient";
    case ExperimentKind::wigner_grid: return "wigner_grid";
    case ExperimentKind::wigner_origin: return "wigner_origin";
    case ExperimentKind::g2: return "g2";
    case ExperimentKind::trajectory: return "trajectory";
    case ExperimentKind::ensemble: return "ensemble";
    case ExperimentKind::figure_preset: return "figure_preset";
    }
    return "?";
}

ExperimentKind experiment_kind_from_string(const std::string& name) {
    for (auto k : {ExperimentKind::steady, ExperimentKind::transient, ExperimentKind::wigner_grid,
                   ExperimentKind::wigner_origin, ExperimentKind::g2, ExperimentKind::trajectory,
                   ExperimentKind::ensemble, ExperimentKind::figure_preset}) {
        if (to_string(k) == name) return k;
    }
    throw InvalidArgument("unknown experiment '" + name + "'");
}

std::string to_string(Model model) { return model == Model::full ? "full" : "effective"; }

Model model_from_string(const std::string& name) {
    if (name == "full") return Model::full;
    if (name == "effective") return Model::effective;
    throw InvalidArgument("unknown model '" + name + "'");
}

std::string to_string(InitKind kind) {
    switch (kind) {
    case InitKind::ground: return "ground";
    case InitKind::one_photon: return "one_photon";
    case InitKind::steady: return "steady";
    case InitKind::conditioned: return "conditioned";
    }
    return "?";
}

InitKind init_kind_from_string(const std::string& name) {
    for (auto k : {InitKind::ground, InitKind::one_photon, InitKind::steady, InitKind::conditioned}) {
        if (to_string(k) == name) return k;
    }
    throw InvalidArgument("unknown init '" + name + "'");
}

std::vector<double> TimeGrid::points() const {
    validate();
    std::vector<double> t;
    const auto n = static_cast<long>(std::floor((stop - start) / step + 1e-9));
    for (long k = 0; k <= n; ++k) t.push_back(start + k * step);
    if (stop - t.back() > 1e-3 * step) t.push_back(stop);
    return t;
}

void TimeGrid::validate() const {
    if (!std::isfinite(start) || !std::isfinite(stop) || !std::isfinite(step)) fail("times", "must be finite");
    if (start < 0.0) fail("times.start", "must be non-negative");
    if (!(stop > start)) fail("times.stop", "must exceed start");
    if (!(step > 0.0)) fail("times.step", "must be positive");
    if ((stop - start) / step > 5e7) fail("times.step", "too many samples");
}

void ExperimentConfig::validate() const {
    params.validate();
    if (uses_times(experiment)) times.validate();
    if (experiment == ExperimentKind::trajectory || experiment == ExperimentKind::ensemble ||
        experiment == ExperimentKind::g2) {
        if (times.start != 0.0) fail("times.start", "must be 0 for " + to_string(experiment));
    }
    if (experiment == ExperimentKind::wigner_grid) {
        try {
            grid.validate();
        } catch (const InvalidArgument& e) {
            fail("grid", e.what());
        }
        if (!(tau >= 0.0) || !std::isfinite(tau)) fail("tau", "must be finite and non-negative");
    }
    if (init == InitKind::conditioned && !channel) fail("channel", "required when init = conditioned");
    if (experiment == ExperimentKind::wigner_origin && model != Model::effective)
        fail("model", "wigner_origin uses the effective model");
    if ((experiment == ExperimentKind::trajectory || experiment == ExperimentKind::ensemble) && model != Model::full)
        fail("model", "trajectories unravel the full master equation");
    if (experiment == ExperimentKind::ensemble && trajectories < 2) fail("trajectories", "need at least 2");
    if (experiment == ExperimentKind::figure_preset &&
        std::find(preset_names.begin(), preset_names.end(), preset) == preset_names.end())
        fail("preset", "unknown preset '" + preset + "'");
    if (model == Model::effective && params.g <= 0.0) fail("params.g", "the effective model needs g > 0");
}

nlohmann::ordered_json to_json(const ExperimentConfig& c) {
    nlohmann::ordered_json p;
    p["g"] = c.params.g;
    p["kappa"] = c.params.kappa;
    p["gamma"] = c.params.gamma;
    p["eps_d"] = c.params.eps_d;
    p["detuning"] = to_string(c.params.detuning_mode);
    if (c.params.detuning_mode == DetuningMode::explicit_value) p["explicit_detuning"] = c.params.explicit_detuning;
    p["n_trunc"] = c.params.spec.n_trunc();

    nlohmann::ordered_json j;
    j["experiment"] = to_string(c.experiment);
    j["params"] = p;
    j["model"] = to_string(c.model);
    if (c.channel) j["channel"] = to_string(*c.channel);
    j["init"] = to_string(c.init);
    j["times"] = {{"start", c.times.start}, {"stop", c.times.stop}, {"step", c.times.step}};
    j["grid"] = {{"x0", c.grid.x0}, {"x1", c.grid.x1}, {"nx", c.grid.nx},
                 {"y0", c.grid.y0}, {"y1", c.grid.y1}, {"ny", c.grid.ny}};
    j["tau"] = c.tau;
    j["binary"] = c.binary;
    j["method"] = to_string(c.method);
    j["seed"] = c.seed;
    j["trajectories"] = c.trajectories;
    if (!c.preset.empty()) j["preset"] = c.preset;
    if (!c.output.empty()) j["output"] = c.output;
    return j;
}

ExperimentConfig config_from_json(const json& j) {
    reject_unknown(j, "", {"experiment", "params", "model", "channel", "init", "times", "grid", "tau", "binary",
                           "method", "seed", "trajectories", "preset", "output"});
    ExperimentConfig c;
    c.experiment = parse_enum(j, "", "experiment", experiment_kind_from_string);
    if (!j.contains("params")) fail("params", "missing");
    c.params = params_from_json(j.at("params"));
    if (j.contains("model")) c.model = parse_enum(j, "", "model", model_from_string);
    if (j.contains("channel") && !j.at("channel").is_null())
        c.channel = parse_enum(j, "", "channel", emission_channel_from_string);
    if (j.contains("init")) c.init = parse_enum(j, "", "init", init_kind_from_string);
    if (j.contains("times")) {
        const auto& t = j.at("times");
        reject_unknown(t, "times", {"start", "stop", "step"});
        c.times.start = number_or(t, "times", "start", 0.0);
        c.times.stop = number(t, "times", "stop");
        c.times.step = number(t, "times", "step");
    }
    if (j.contains("grid")) {
        const auto& g = j.at("grid");
        reject_unknown(g, "grid", {"x0", "x1", "nx", "y0", "y1", "ny"});
        c.grid.x0 = number(g, "grid", "x0");
        c.grid.x1 = number(g, "grid", "x1");
        c.grid.y0 = number(g, "grid", "y0");
        c.grid.y1 = number(g, "grid", "y1");
        const auto nx = integer(g, "grid", "nx"), ny = integer(g, "grid", "ny");
        if (nx > 20001 || ny > 20001) fail("grid", "too many points");
        c.grid.nx = static_cast<int>(nx);
        c.grid.ny = static_cast<int>(ny);
    }
    if (j.contains("tau")) c.tau = number(j, "", "tau");
    if (j.contains("binary")) {
        if (!j.at("binary").is_boolean()) fail("binary", "expected true or false");
        c.binary = j.at("binary").get<bool>();
    }
    if (j.contains("method")) c.method = parse_enum(j, "", "method", unraveling_from_string);
    if (j.contains("seed")) c.seed = integer(j, "", "seed");
    if (j.contains("trajectories")) c.trajectories = integer(j, "", "trajectories");
    if (j.contains("preset")) c.preset = text(j, "", "preset");
    if (j.contains("output")) c.output = text(j, "", "output");
    c.validate();
    return c;
}

ExperimentConfig parse_config(const std::string& s) {
    json j;
    try {
        j = json::parse(s);
    } catch (const json::exception& e) {
        throw InvalidArgument(std::string("config: not valid JSON: ") + e.what());
    }
    return config_from_json(j);
}

ExperimentConfig load_config(const std::string& file) {
    std::ifstream in(file);
    if (!in) throw InvalidArgument("config: cannot open " + file);
    std::ostringstream s;
    s << in.rdbuf();
    return parse_config(s.str());
}

std::uint64_t config_fingerprint(const ExperimentConfig& config) {
    using K = ExperimentKind;
    const auto k = config.experiment;
    auto j = to_json(config);
    j.erase("output");
    j.erase("binary");
    const bool prepared = k == K::transient || k == K::wigner_grid || k == K::wigner_origin || k == K::trajectory ||
                          k == K::ensemble;
    if (!prepared) {
        j.erase("init");
        j.erase("channel");
    }
    if (!uses_times(k)) j.erase("times");
    if (k != K::wigner_grid) {
        j.erase("grid");
        j.erase("tau");
    }
    if (k != K::trajectory && k != K::ensemble && k != K::figure_preset) j.erase("seed");
    if (k != K::trajectory && k != K::ensemble) j.erase("method");
    if (k != K::ensemble) j.erase("trajectories");
    const auto s = j.dump();
    return fnv1a(s.data(), s.size());
}

std::string hex(std::uint64_t value) {
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(value));
    return buf;
}

} // namespace jcbeat
