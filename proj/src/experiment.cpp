#include "jcbeat/experiment.hpp"

#include <chrono>
#include <cmath>
#include <fstream>
#include <limits>
#include <numbers>

#include "jcbeat/csv.hpp"
#include "jcbeat/error.hpp"
#include "jcbeat/four_level.hpp"
#include "jcbeat/rng.hpp"

namespace jcbeat {

#ifndef JCBEAT_VERSION
#define JCBEAT_VERSION "unknown"
#endif
const char* const version = JCBEAT_VERSION;

namespace {

namespace fs = std::filesystem;
using ojson = nlohmann::ordered_json;

constexpr double nan = std::numeric_limits<double>::quiet_NaN();
constexpr double flux_floor = 1e-12;

class Outputs {
public:
    explicit Outputs(fs::path dir) : dir_(std::move(dir)) {
        std::error_code ec;
        fs::create_directories(dir_, ec);
        if (ec) throw InvalidArgument("cannot create output directory " + dir_.string() + ": " + ec.message());
    }

    std::ofstream open(const std::string& name, std::ios::openmode mode = std::ios::out) {
        std::ofstream f(dir_ / name, mode | std::ios::trunc);
        if (!f) throw InvalidArgument("cannot write " + (dir_ / name).string());
        files_.push_back(name);
        return f;
    }

    const std::vector<std::string>& files() const { return files_; }

private:
    fs::path dir_;
    std::vector<std::string> files_;
};

double ratio_or_nan(double n, double sigma, const SystemParams& p) {
    return p.gamma * sigma > flux_floor ? 2.0 * p.kappa * n / (p.gamma * sigma) : nan;
}

// (2/pi) sum_n (-1)^n <n|rho_c|n>
double origin_value(const Matrix& rho_c) {
    double s = 0.0;
    for (Eigen::Index n = 0; n < rho_c.rows(); ++n) s += (n % 2 ? -1.0 : 1.0) * rho_c(n, n).real();
    return 2.0 / std::numbers::pi * s;
}

ChannelRates rates_of(const SystemParams& p) { return {p.kappa, p.gamma, 1.0}; }

DensityMatrix full_init(const ExperimentConfig& c) {
    const auto& p = c.params;
    switch (c.init) {
    case InitKind::ground: return DensityMatrix::pure(ground_state(p.spec));
    case InitKind::one_photon: return DensityMatrix::pure(one_photon_state(p.spec));
    case InitKind::steady: return steady_state(p);
    case InitKind::conditioned: return apply_jump(*c.channel, steady_state(p), rates_of(p)).state;
    }
    throw InvalidArgument("unknown init");
}

FourLevelState effective_init(const ExperimentConfig& c, const EffectiveParams& eff) {
    switch (c.init) {
    case InitKind::ground: return FourLevelState::ground();
    case InitKind::one_photon: {
        FourLevelState s;
        s.rho00 = 0.0;
        s.rho11 = 0.5;
        s.rho22 = 0.5;
        s.rho12 = 0.5;
        return s;
    }
    case InitKind::steady: return steady_state_4l(eff);
    case InitKind::conditioned:
        return apply_jump(*c.channel, steady_state_4l(eff), ChannelRates{eff.kappa, eff.gamma, 1.0}).state;
    }
    throw InvalidArgument("unknown init");
}

std::vector<MixtureComponent> trajectory_init(const ExperimentConfig& c) {
    if (c.init == InitKind::ground) return {{1.0, ground_state(c.params.spec)}};
    if (c.init == InitKind::one_photon) return {{1.0, one_photon_state(c.params.spec)}};
    return decompose_mixture(full_init(c));
}

std::string init_label(const ExperimentConfig& c) {
    if (c.init == InitKind::conditioned) return "conditioned_" + to_string(*c.channel);
    return to_string(c.init);
}

ojson region_summary(const WignerGrid& g) {
    const auto r = negativity_region(g);
    return {{"negativity", to_string(r.kind)}, {"min_value", r.min_value}, {"min_x", r.min_x}, {"min_y", r.min_y},
            {"integral", g.integral()}};
}

void write_grid(Outputs& out, const std::string& stem, const WignerGrid& g, bool binary) {
    {
        auto f = out.open(stem + ".csv");
        g.write_csv(f);
    }
    if (binary) {
        auto f = out.open(stem + ".bin", std::ios::binary);
        g.write_binary(f);
    }
}

WignerGrid effective_grid(const FourLevelState& s, const GridSpec& grid, double tau, const SystemParams& p,
                          Execution exec) {
    auto g = wigner_grid(cavity_coefficients(s), grid, exec);
    g.tau = tau;
    g.fingerprint = fingerprint(p);
    return g;
}

WignerGrid full_grid(const DensityMatrix& rho, const GridSpec& grid, double tau, const SystemParams& p,
                     Execution exec) {
    auto g = wigner_general(reduce_to_cavity(rho), grid, {}, exec);
    g.tau = tau;
    g.fingerprint = fingerprint(p);
    return g;
}

void write_record(Outputs& out, const std::string& stem, const TrajectoryRecord& r) {
    {
        auto f = out.open(stem + ".csv");
        r.write_csv(f);
    }
    auto f = out.open(stem + ".json");
    r.write_sidecar(f);
}

// --- single experiments ---------------------------------------------------

void run_steady(const ExperimentConfig& c, Outputs& out, ojson& summary) {
    const auto& p = c.params;
    double n, sigma, p3 = nan, trunc = nan;
    if (c.model == Model::effective) {
        const auto eff = effective_params(p);
        const auto s = steady_state_4l(eff);
        n = photon_number(s);
        sigma = atomic_excitation(s);
        p3 = eff.p3;
    } else {
        SteadyStateInfo info;
        const auto rho = steady_state(p, &info);
        const auto ops = build_operators(p.spec);
        n = expectation(ops.number, rho).real();
        sigma = expectation(ops.excitation, rho).real();
        trunc = info.truncation_population;
        summary["residual"] = info.residual;
    }
    const double r = ratio_or_nan(n, sigma, p);
    auto f = out.open("steady.csv");
    f << "n_ss,sigma_ss,flux_ratio,p3,truncation_population\n";
    csv::write_row(f, {n, sigma, r, p3, trunc});
    summary["n_ss"] = n;
    summary["sigma_ss"] = sigma;
}

void run_transient(const ExperimentConfig& c, Outputs& out) {
    const auto& p = c.params;
    const auto t = c.times.points();
    auto f = out.open("transient.csv");
    if (c.model == Model::effective) {
        const auto eff = effective_params(p);
        const TransientSolver solver(eff);
        const auto init = effective_init(c, eff);
        f << "tau,n,sigma,w0,rho00,rho11,rho22,rho33,re_rho12,im_rho12,re_rho03,im_rho03\n";
        for (double tau : t) {
            const auto s = solver.at(init, tau);
            csv::write_row(f, {tau, photon_number(s), atomic_excitation(s), wigner_origin(s), s.rho00, s.rho11,
                               s.rho22, s.rho33, s.rho12.real(), s.rho12.imag(), s.rho03.real(), s.rho03.imag()});
        }
        return;
    }
    const auto ops = build_operators(p.spec);
    const auto res = evolve(p, full_init(c), t);
    f << "tau,n,sigma,w0\n";
    for (std::size_t k = 0; k < res.times.size(); ++k) {
        if (res.times[k] < c.times.start) continue;
        const auto& rho = res.states[k];
        csv::write_row(f, {res.times[k], expectation(ops.number, rho).real(), expectation(ops.excitation, rho).real(),
                           origin_value(reduce_to_cavity(rho.matrix()))});
    }
}

void run_wigner_origin(const ExperimentConfig& c, Outputs& out, ojson& summary) {
    const auto eff = effective_params(c.params);
    const TransientSolver solver(eff);
    const auto init = effective_init(c, eff);
    auto f = out.open("w0.csv");
    f << "tau,w0\n";
    for (double tau : c.times.points()) csv::write_row(f, {tau, wigner_origin(solver.at(init, tau))});
    const auto w = [&](double tau) { return wigner_origin(solver.at(init, tau)); };
    const auto m = locate_global_minimum(w, c.times.start, c.times.stop);
    summary["tau_min"] = m.tau;
    summary["w0_min"] = m.value;
    if (auto x = locate_next_local_maximum(w, m.tau, c.times.stop)) summary["tau_next_max"] = x->tau;
}

void run_wigner_grid(const ExperimentConfig& c, Outputs& out, ojson& summary, Execution exec) {
    const auto& p = c.params;
    WignerGrid g;
    if (c.model == Model::effective) {
        const auto eff = effective_params(p);
        const auto s = TransientSolver(eff).at(effective_init(c, eff), c.tau);
        g = effective_grid(s, c.grid, c.tau, p, exec);
        summary["truncation_bound"] = g.truncation_bound();
    } else {
        auto rho = full_init(c);
        if (c.tau > 0.0) {
            const double t[] = {c.tau};
            rho = evolve(p, rho, t).states.back();
        }
        g = full_grid(rho, c.grid, c.tau, p, exec);
    }
    write_grid(out, "wigner", g, c.binary);
    summary["region"] = region_summary(g);
}

void run_g2(const ExperimentConfig& c, Outputs& out, ojson& summary) {
    const auto t = c.times.points();
    auto f = out.open("g2.csv");
    if (c.model == Model::effective) {
        const auto r = g2_forward_effective(effective_params(c.params), t);
        f << "tau,g2,g2_beat_averaged\n";
        for (std::size_t k = 0; k < t.size(); ++k) csv::write_row(f, {r.tau[k], r.g2[k], r.beat_averaged[k]});
        return;
    }
    const auto r = g2_forward(c.params, t);
    f << "tau,g2\n";
    for (std::size_t k = 0; k < r.tau.size(); ++k) csv::write_row(f, {r.tau[k], r.g2[k]});
    summary["n_ss"] = r.n_ss;
}

void run_trajectory(const ExperimentConfig& c, Outputs& out, ojson& summary) {
    const auto mixture = trajectory_init(c);
    const auto& psi = sample_component(mixture, c.seed).psi;
    const auto t = c.times.points();
    TrajectoryOptions opt;
    opt.init_label = init_label(c);
    const auto r = c.method == Unraveling::mc ? run_mc_trajectory(c.params, psi, t, c.seed, opt)
                                              : run_qsd_trajectory(c.params, psi, t, c.seed, opt);
    write_record(out, "trajectory", r);
    summary["jumps"] = r.jumps.size();
    summary["steps"] = r.steps;
}

void run_ensemble_experiment(const ExperimentConfig& c, Outputs& out, ojson& summary, Execution exec) {
    EnsembleSpec s;
    s.method = c.method;
    s.params = c.params;
    s.init = trajectory_init(c);
    s.init_label = init_label(c);
    s.times = c.times.points();
    s.master_seed = c.seed;
    s.count = c.trajectories;
    const auto records = run_ensemble(s, exec);
    const auto stats = ensemble_average(records);
    auto f = out.open("ensemble.csv");
    stats.write_csv(f);
    double defect = 0.0;
    long steps = 0;
    for (const auto& r : records) {
        defect = std::max(defect, r.max_norm_defect);
        steps += r.steps;
    }
    summary["trajectories"] = records.size();
    summary["mean_steps"] = double(steps) / records.size();
    if (c.method == Unraveling::qsd) summary["max_norm_defect"] = defect;
}

// --- presets ----------------------------------------------------------------

void preset_fig2(const ExperimentConfig& c, Outputs& out, ojson& summary, Execution exec) {
    const auto& p = c.params;
    const auto eff = effective_params(p);
    const TransientSolver solver(eff);
    const auto ss = steady_state_4l(eff);
    const ChannelRates rates{eff.kappa, eff.gamma, 1.0};
    const auto t = c.times.points();

    auto conditioned = [&](EmissionChannel ch) { return apply_jump(ch, ss, rates).state; };
    const std::pair<const char*, EmissionChannel> channels[] = {{"forward", EmissionChannel::forward},
                                                                {"side", EmissionChannel::side},
                                                                {"twophoton", EmissionChannel::two_photon}};
    for (const auto& [name, ch] : channels) {
        const auto init = conditioned(ch);
        auto f = out.open(std::string("w0_") + name + ".csv");
        f << "tau,w0\n";
        for (double tau : t) csv::write_row(f, {tau, wigner_origin(solver.at(init, tau))});
    }
    {
        const auto r = g2_forward_effective(eff, t);
        auto f = out.open("g2_forward.csv");
        f << "tau,g2,g2_beat_averaged\n";
        for (std::size_t k = 0; k < t.size(); ++k) csv::write_row(f, {r.tau[k], r.g2[k], r.beat_averaged[k]});
    }

    auto origin = [&](const FourLevelState& init) {
        return [&solver, init](double tau) { return wigner_origin(solver.at(init, tau)); };
    };
    const auto fwd = conditioned(EmissionChannel::forward);
    const auto side = conditioned(EmissionChannel::side);
    const double t1 = c.times.stop;
    const auto b = locate_global_minimum(origin(fwd), c.times.start, t1);
    const auto cmin = locate_global_minimum(origin(side), c.times.start, t1);
    const auto d = locate_next_local_maximum(origin(side), cmin.tau, t1);
    if (!d) throw NumericalError("side-conditioned W(0) has no local maximum after its minimum");

    auto peak = [&](bool averaged) {
        return locate_global_minimum(
            [&](double tau) {
                const double x[] = {tau};
                const auto r = g2_forward_effective(eff, x);
                return -(averaged ? r.beat_averaged[0] : r.g2[0]);
            },
            std::max(c.times.start, 0.01), t1);
    };

    const auto gb = effective_grid(solver.at(fwd, b.tau), c.grid, b.tau, p, exec);
    const auto gc = effective_grid(solver.at(conditioned(EmissionChannel::two_photon), cmin.tau), c.grid, cmin.tau,
                                   p, exec);
    const auto gd = effective_grid(solver.at(side, d->tau), c.grid, d->tau, p, exec);
    write_grid(out, "wigner_b", gb, c.binary);
    write_grid(out, "wigner_c", gc, c.binary);
    write_grid(out, "wigner_d", gd, c.binary);

    summary["p3"] = eff.p3;
    summary["eps_d"] = p.eps_d;
    summary["beat_period"] = 2.0 * std::numbers::pi / eff.nu;
    summary["tau_b"] = b.tau;
    summary["tau_c"] = cmin.tau;
    summary["tau_d"] = d->tau;
    summary["tau_max_g2"] = peak(false).tau;
    summary["tau_max_g2_beat_averaged"] = peak(true).tau;
    summary["wigner_b"] = region_summary(gb);
    summary["wigner_c"] = region_summary(gc);
    summary["wigner_d"] = region_summary(gd);
}

void preset_fig3(const ExperimentConfig& c, Outputs& out, ojson& summary, Execution exec) {
    const auto& p = c.params;
    const auto t = c.times.points();
    const auto ops = build_operators(p.spec);

    TrajectoryOptions opt;
    opt.init_label = "ground";
    write_record(out, "traj_ground", run_qsd_trajectory(p, ground_state(p.spec), t, rng::derive_seed(c.seed, 0), opt));
    opt.init_label = "one_photon";
    write_record(out, "traj_one_photon",
                 run_qsd_trajectory(p, one_photon_state(p.spec), t, rng::derive_seed(c.seed, 1), opt));

    {
        const auto res = evolve(p, DensityMatrix::pure(ground_state(p.spec)), t);
        auto f = out.open("me_ground.csv");
        f << "tau,n,sigma,r\n";
        for (std::size_t k = 0; k < res.times.size(); ++k) {
            const double n = expectation(ops.number, res.states[k]).real();
            const double s = expectation(ops.excitation, res.states[k]).real();
            csv::write_row(f, {res.times[k], n, s, ratio_or_nan(n, s, p)});
        }
    }
    {
        const auto eff = effective_params(p);
        const TransientSolver solver(eff);
        const auto init =
            apply_jump(EmissionChannel::side, steady_state_4l(eff), ChannelRates{eff.kappa, eff.gamma, 1.0}).state;
        auto f = out.open("effective_side.csv");
        f << "tau,n,sigma,r\n";
        for (double tau : t) {
            const auto s = solver.at(init, tau);
            const double n = photon_number(s), sg = atomic_excitation(s);
            csv::write_row(f, {tau, n, sg, ratio_or_nan(n, sg, p)});
        }
        summary["p3"] = eff.p3;
    }
    SteadyStateInfo info;
    const auto g = full_grid(steady_state(p, &info), c.grid, 0.0, p, exec);
    write_grid(out, "wigner_ss", g, c.binary);
    summary["eps_over_g"] = p.eps_d / p.g;
    summary["wigner_ss"] = region_summary(g);
    summary["steady_truncation_population"] = info.truncation_population;
}

void preset_fig4a(const ExperimentConfig& c, Outputs& out, ojson& summary, Execution exec) {
    const auto& p = c.params;
    const auto t = c.times.points();
    TrajectoryOptions opt;
    opt.init_label = "ground";
    write_record(out, "traj_ground", run_qsd_trajectory(p, ground_state(p.spec), t, rng::derive_seed(c.seed, 0), opt));
    opt.init_label = "one_photon";
    write_record(out, "traj_one_photon",
                 run_qsd_trajectory(p, one_photon_state(p.spec), t, rng::derive_seed(c.seed, 1), opt));

    const double ratio = p.eps_d / p.g;
    const std::pair<const char*, double> insets[] = {{"A", 0.5}, {"B", 1.0}, {"C", 2.0}};
    for (const auto& [label, scale] : insets) {
        auto q = p;
        q.g = p.g * scale;
        q.eps_d = ratio * q.g;
        const auto rho = steady_state(q);
        const auto g = full_grid(rho, c.grid, 0.0, q, exec);
        write_grid(out, std::string("wigner_") + label + "", g, c.binary);
        auto s = region_summary(g);
        s["g"] = q.g;
        s["cooperativity"] = q.g * q.g / (q.kappa * q.gamma);
        s["n_ss"] = expectation(build_operators(q.spec).number, rho).real();
        summary[std::string("wigner_") + label] = s;
    }
}

void preset_fig4b(const ExperimentConfig& c, Outputs& out, ojson& summary, Execution exec) {
    const auto& p = c.params;
    TrajectoryOptions opt;
    opt.init_label = "ground";
    opt.keep_jump_states = std::numeric_limits<std::size_t>::max();
    auto rec = run_mc_trajectory(p, ground_state(p.spec), c.times.points(), rng::derive_seed(c.seed, 0), opt);
    const auto states = std::move(rec.jump_states);
    rec.jump_states.clear();
    write_record(out, "traj_mc", rec);

    std::size_t k = 0;
    while (k < rec.jumps.size() && rec.jumps[k].channel != EmissionChannel::forward) ++k;
    if (k == rec.jumps.size()) {
        summary["first_forward_jump"] = nullptr;
        return;
    }
    const auto& [before, after] = states[k];
    const double tau = rec.jumps[k].tau;
    const auto gb = full_grid(DensityMatrix::pure(before), c.grid, tau, p, exec);
    const auto ga = full_grid(DensityMatrix::pure(after), c.grid, tau, p, exec);
    write_grid(out, "wigner_jump_before", gb, c.binary);
    write_grid(out, "wigner_jump_after", ga, c.binary);
    summary["first_forward_jump"] = {{"tau", tau}, {"n_before", rec.jumps[k].n_before},
                                     {"n_after", rec.jumps[k].n_after}};
    summary["wigner_jump_before"] = region_summary(gb);
    summary["wigner_jump_after"] = region_summary(ga);
}

void run_preset(const ExperimentConfig& c, Outputs& out, ojson& summary, Execution exec) {
    if (c.preset == "fig2") return preset_fig2(c, out, summary, exec);
    if (c.preset.rfind("fig3", 0) == 0) return preset_fig3(c, out, summary, exec);
    if (c.preset == "fig4a") return preset_fig4a(c, out, summary, exec);
    if (c.preset == "fig4b") return preset_fig4b(c, out, summary, exec);
    throw InvalidArgument("unknown preset '" + c.preset + "'");
}

SystemParams preset_params(double g, double eps_d, DetuningMode mode, int n_trunc) {
    SystemParams p;
    p.g = g;
    p.kappa = 0.5;
    p.gamma = 1.0;
    p.eps_d = eps_d;
    p.detuning_mode = mode;
    p.spec = HilbertSpec(n_trunc);
    return p;
}

} // namespace

double eps_for_p3(double p3, double g, double gamma) {
    if (!(p3 > 0.0 && p3 < 0.25)) throw InvalidArgument("p3 must lie in (0, 1/4)");
    if (!(g > 0.0) || !(gamma > 0.0)) throw InvalidArgument("g and gamma must be positive");
    const double omega = gamma * std::sqrt(p3 / (1.0 - 4.0 * p3));
    return std::sqrt(omega * g / (2.0 * std::numbers::sqrt2));
}

const std::vector<std::string>& figure_preset_names() {
    static const std::vector<std::string> names{"fig2", "fig3a", "fig3b", "fig3c", "fig4a", "fig4b"};
    return names;
}

ExperimentConfig figure_preset(const std::string& name) {
    ExperimentConfig c;
    c.experiment = ExperimentKind::figure_preset;
    c.preset = name;
    c.seed = 1;
    if (name == "fig2") {
        c.model = Model::effective;
        c.params = preset_params(500, eps_for_p3(0.2475, 500, 1.0), DetuningMode::two_photon_shifted, 8);
        c.times = {0.0, 1.0, 1e-4};
        c.grid = GridSpec::square(2.5, 0.01);
    } else if (name == "fig3a" || name == "fig3b" || name == "fig3c") {
        const double ratio = name == "fig3a" ? 0.04 : name == "fig3b" ? 0.075 : 0.12;
        c.method = Unraveling::qsd;
        c.params = preset_params(500, ratio * 500, DetuningMode::two_photon_shifted, 35);
        c.times = {0.0, 1.0, 1e-3};
        c.grid = GridSpec::square(2.5, 0.02);
    } else if (name == "fig4a" || name == "fig4b") {
        c.method = name == "fig4a" ? Unraveling::qsd : Unraveling::mc;
        c.params = preset_params(12, 0.23 * 12, DetuningMode::two_photon_bare, 35);
        c.times = {0.0, 20.0, 1e-2};
        c.grid = GridSpec::square(3.0, 0.02);
    } else {
        throw InvalidArgument("unknown preset '" + name + "'");
    }
    c.validate();
    return c;
}

RunResult run_experiment(const ExperimentConfig& config, const fs::path& out_dir, Execution exec) {
    config.validate();
    const auto start = std::chrono::steady_clock::now();
    Outputs out(out_dir);
    ojson summary = ojson::object();
    switch (config.experiment) {
    case ExperimentKind::steady: run_steady(config, out, summary); break;
    case ExperimentKind::transient: run_transient(config, out); break;
    case ExperimentKind::wigner_grid: run_wigner_grid(config, out, summary, exec); break;
    case ExperimentKind::wigner_origin: run_wigner_origin(config, out, summary); break;
    case ExperimentKind::g2: run_g2(config, out, summary); break;
    case ExperimentKind::trajectory: run_trajectory(config, out, summary); break;
    case ExperimentKind::ensemble: run_ensemble_experiment(config, out, summary, exec); break;
    case ExperimentKind::figure_preset: run_preset(config, out, summary, exec); break;
    }

    RunResult result;
    result.wall_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    result.files = out.files();
    result.files.push_back("manifest.json");
    result.summary = summary;

    ojson m;
    m["jcbeat_version"] = version;
    m["experiment"] = to_string(config.experiment);
    m["fingerprint"] = hex(config_fingerprint(config));
    m["config"] = to_json(config);
    m["wall_time_s"] = result.wall_time;
    m["files"] = result.files;
    m["summary"] = summary;
    auto f = out.open("manifest.json");
    f << m.dump(2) << '\n';
    return result;
}

} // namespace jcbeat
