// Acceptance criteria P1-P10. One PASS/FAIL line per criterion; exit status
// is the number of failures. Arguments select criteria (e.g. "P1 P5").

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <numbers>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "jcbeat/conditioning.hpp"
#include "jcbeat/error.hpp"
#include "jcbeat/experiment.hpp"
#include "jcbeat/four_level.hpp"
#include "jcbeat/lindblad.hpp"
#include "jcbeat/rng.hpp"
#include "jcbeat/trajectories.hpp"
#include "jcbeat/wigner.hpp"

using namespace jcbeat;

namespace {

struct Verdict {
    bool pass = true;
    std::ostringstream detail;

    void check(bool ok, const std::string& what) {
        pass = pass && ok;
        if (!ok) detail << " [failed: " << what << "]";
    }
};

std::string fmt(double x, int digits = 4) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*f", digits, x);
    return buf;
}

std::string sci(double x) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.2e", x);
    return buf;
}

SystemParams strong(double eps_over_g, int n_trunc = 8) {
    SystemParams p;
    p.g = 500;
    p.kappa = 0.5;
    p.gamma = 1;
    p.eps_d = eps_over_g * p.g;
    p.detuning_mode = DetuningMode::two_photon_shifted;
    p.spec = HilbertSpec(n_trunc);
    return p;
}

SystemParams at_p3(double p3, int n_trunc = 8) {
    auto p = strong(0.0, n_trunc);
    p.eps_d = eps_for_p3(p3, p.g, p.gamma);
    return p;
}

std::vector<double> grid(double t0, double t1, double dt) {
    std::vector<double> t;
    const int n = static_cast<int>(std::lround((t1 - t0) / dt));
    for (int k = 0; k <= n; ++k) t.push_back(t0 + k * dt);
    return t;
}

FourLevelState conditioned(EmissionChannel ch, const EffectiveParams& e) {
    return apply_jump(ch, steady_state_4l(e), ChannelRates{e.kappa, e.gamma, 1.0}).state;
}

FourLevelState random_state(std::mt19937_64& rng, bool real_rho03) {
    std::uniform_real_distribution<double> u(0, 1);
    double w[4], sum = 0;
    for (double& x : w) sum += (x = u(rng));
    FourLevelState s;
    s.rho00 = w[0] / sum;
    s.rho11 = w[1] / sum;
    s.rho22 = w[2] / sum;
    s.rho33 = w[3] / sum;
    s.rho12 = std::polar(u(rng) * std::sqrt(s.rho11 * s.rho22), 2 * std::numbers::pi * u(rng));
    const double m = u(rng) * std::sqrt(s.rho00 * s.rho33);
    s.rho03 = real_rho03 ? cplx(0.0, u(rng) < 0.5 ? m : -m) : std::polar(m, 2 * std::numbers::pi * u(rng));
    return s;
}

double distance(const FourLevelState& a, const FourLevelState& b) {
    return std::max({std::abs(a.rho00 - b.rho00), std::abs(a.rho11 - b.rho11), std::abs(a.rho22 - b.rho22),
                     std::abs(a.rho33 - b.rho33), std::abs(a.rho12 - b.rho12), std::abs(a.rho03 - b.rho03)});
}

std::function<double(double)> origin_curve(const TransientSolver& solver, const FourLevelState& init) {
    return [&solver, init](double tau) { return wigner_origin(solver.at(init, tau)); };
}

// --- criteria ---------------------------------------------------------------

Verdict p1() {
    Verdict v;
    const double ratio[] = {0.04, 0.075, 0.12};
    const double expect[] = {0.2384, 0.2490, 0.2498};
    v.detail << "p3 =";
    for (int i = 0; i < 3; ++i) {
        const double p3 = effective_params(strong(ratio[i])).p3;
        v.detail << " " << fmt(p3) << " (eps/g " << ratio[i] << ", expect " << expect[i] << ")";
        v.check(std::abs(p3 - expect[i]) <= 5e-4, "eps/g " + fmt(ratio[i], 3));
    }
    return v;
}

Verdict p2() {
    Verdict v;
    const auto e = effective_params(at_p3(0.2475));
    const double period = 2 * std::numbers::pi / e.nu;
    v.detail << "gamma T = " << fmt(period, 5) << " (expect 0.0062 +- 2e-4)";
    v.check(std::abs(period - 0.0062) <= 2e-4, "beat period");
    return v;
}

Verdict p3() {
    Verdict v;
    const auto e = effective_params(at_p3(0.2475));
    const TransientSolver solver(e);
    const auto fwd = origin_curve(solver, conditioned(EmissionChannel::forward, e));
    const auto side = origin_curve(solver, conditioned(EmissionChannel::side, e));
    const auto b = locate_global_minimum(fwd, 0.0, 1.0);
    const auto c = locate_global_minimum(side, 0.0, 1.0);
    const auto d = locate_next_local_maximum(side, c.tau, 1.0);
    v.detail << "forward min " << fmt(b.tau) << " (expect 0.3297), side min " << fmt(c.tau)
             << " (expect 0.3327), side next max " << (d ? fmt(d->tau) : std::string("none"))
             << " (expect 0.3390), tol 0.002";
    v.check(std::abs(b.tau - 0.3297) <= 0.002, "forward minimum");
    v.check(std::abs(c.tau - 0.3327) <= 0.002, "side minimum");
    v.check(d && std::abs(d->tau - 0.3390) <= 0.002, "side next maximum");
    return v;
}

Verdict p4() {
    Verdict v;
    const auto p = at_p3(0.2475);
    const auto e = effective_params(p);
    auto g2_at = [&](double tau, bool averaged) {
        const double t[] = {tau};
        const auto r = g2_forward_effective(e, t);
        return averaged ? r.beat_averaged[0] : r.g2[0];
    };
    const auto avg = locate_global_minimum([&](double t) { return -g2_at(t, true); }, 0.01, 2.0);
    const auto raw = locate_global_minimum([&](double t) { return -g2_at(t, false); }, 0.01, 2.0);
    v.detail << "beat-averaged peak " << fmt(avg.tau) << " (expect 0.3235 +- 0.005; raw curve peaks at "
             << fmt(raw.tau, 5) << ")";
    v.check(std::abs(avg.tau - 0.3235) <= 0.005, "beat-averaged peak");

    const auto tau = grid(0.0, 2.0, 5e-4);
    const auto me = g2_forward(p, tau);
    const auto eff = g2_forward_effective(e, tau);
    double worst = 0, at = 0;
    for (std::size_t k = 0; k < tau.size(); ++k) {
        const double rel = std::abs(me.g2[k] - eff.g2[k]) / eff.g2[k];
        if (rel > worst) {
            worst = rel;
            at = tau[k];
        }
    }
    v.detail << "; full ME vs effective g2 max rel. dev. " << fmt(100 * worst, 1) << "% at gamma tau "
             << fmt(at, 3) << " (limit 5%)";
    v.check(worst <= 0.05, "full-ME g2 agreement");
    return v;
}

Verdict p5() {
    Verdict v;
    std::mt19937_64 rng(20240501);
    std::uniform_real_distribution<double> u(1e-4, 0.25 - 1e-4);
    double worst_n = 0, worst_r = 0;
    for (int k = 0; k < 20; ++k) {
        const double target = u(rng);
        const auto e = effective_params(at_p3(target));
        const auto ss = steady_state_4l(e);
        worst_n = std::max(worst_n, std::abs(photon_number(ss) - 2.5 * e.p3) / e.p3);
        worst_r = std::max(worst_r, std::abs(flux_ratio(ss, e.gamma, e.kappa) - 5.0 / 3));
    }
    v.detail << "20 random p3: max rel. |<n> - 5p3/2| " << sci(worst_n) << ", max |r - 5/3| " << sci(worst_r);
    v.check(worst_n <= 1e-12, "<n>_ss");
    v.check(worst_r <= 1e-12, "flux ratio");
    return v;
}

Verdict p6() {
    Verdict v;
    const double gs[] = {6, 12, 24};
    const double expect[] = {0.60, 0.80, 0.87};
    v.detail << "<n>_ss =";
    for (int i = 0; i < 3; ++i) {
        SystemParams p;
        p.g = gs[i];
        p.kappa = 0.5;
        p.gamma = 1;
        p.eps_d = 0.23 * p.g;
        p.detuning_mode = DetuningMode::two_photon_bare;
        p.spec = HilbertSpec(35);
        const auto rho = steady_state(p);
        const double n = expectation(build_operators(p.spec).number, rho).real();
        v.detail << " " << fmt(n) << " (g " << gs[i] << ", expect " << expect[i] << ")";
        v.check(std::abs(n - expect[i]) <= 0.02, "g = " + fmt(gs[i], 0));
    }
    return v;
}

Verdict p7() {
    Verdict v;
    double worst = 0;
    for (double p3 : {0.01, 0.1, 0.2, 0.2475, 0.2499}) {
        const auto e = effective_params(at_p3(p3));
        const auto f = conditioned(EmissionChannel::forward, e);
        const auto s = conditioned(EmissionChannel::side, e);
        const auto t = conditioned(EmissionChannel::two_photon, e);
        worst = std::max({worst, std::abs(f.rho00 - 0.4), std::abs(f.rho11 + f.rho22 - 0.6), std::abs(f.rho33),
                          std::abs(f.rho12 - 0.1), std::abs(s.rho00 - 2.0 / 3), std::abs(s.rho11 + s.rho22 - 1.0 / 3),
                          std::abs(s.rho33), std::abs(s.rho12 - 1.0 / 6), std::abs(t.rho00 - 1.0),
                          std::abs(t.rho11), std::abs(t.rho22), std::abs(t.rho33), std::abs(t.rho12),
                          std::abs(t.rho03)});
    }
    v.detail << "forward (2/5, 3/5, rho12 1/10), side (2/3, 1/3, rho12 1/6), two-photon ground; max deviation "
             << sci(worst) << " over 5 values of p3";
    v.check(worst <= 1e-12, "conditioned weights");
    return v;
}

Verdict p8() {
    Verdict v;
    std::mt19937_64 rng(77);
    std::uniform_real_distribution<double> u(0, 1);
    double worst = 0;
    for (int k = 0; k < 100; ++k) {
        const auto e = effective_params(strong(0.03 + 0.05 * u(rng)));
        const auto init = random_state(rng, false);
        const double tau = 3.0 * u(rng);
        const auto a = analytic_transient(make_transient_init(init, e), e, tau);
        const auto n = evolve_effective(init, e, std::vector<double>{tau});
        worst = std::max(worst, distance(a, n[0]));
    }
    v.detail << "analytic vs integrated " << sci(worst);
    v.check(worst <= 1e-10, "analytic transient");

    double worst_w = 0;
    const HilbertSpec spec(6);
    const cplx points[] = {{0, 0}, {0.3, 0.4}, {-1.0, 0.7}, {1.5, -1.5}, {0.0, 2.2}};
    for (int k = 0; k < 50; ++k) {
        const auto s = random_state(rng, true);
        const DisplacedParity w(reduce_to_cavity(DensityMatrix(embed(spec, s))), 2.5);
        for (cplx a : points) worst_w = std::max(worst_w, std::abs(w(a) - wigner_point(cavity_coefficients(s), a)));
    }
    v.detail << "; displaced parity vs closed form " << sci(worst_w);
    v.check(worst_w <= 1e-10, "wigner_general");

    const auto p = strong(0.075);
    const auto e = effective_params(p);
    const auto t = grid(0.0, 1.0, 2e-3);
    const auto me = evolve(p, DensityMatrix::pure(ground_state(p.spec)), std::span<const double>(t).subspan(1));
    const auto ops = build_operators(p.spec);
    const TransientSolver solver(e);
    double dev = 0, scale = 0, at = 0;
    for (std::size_t k = 0; k < t.size(); ++k) {
        const double n_eff = photon_number(solver.at(FourLevelState::ground(), t[k]));
        const double n_me = expectation(ops.number, me.states[k]).real();
        scale = std::max(scale, n_eff);
        if (std::abs(n_me - n_eff) > dev) {
            dev = std::abs(n_me - n_eff);
            at = t[k];
        }
    }
    v.detail << "; full ME vs effective <n> from ground, gamma tau <= 1: max dev. " << fmt(100 * dev / scale, 1)
             << "% of max <n> at " << fmt(at, 3) << " (limit 3%)";
    v.check(dev <= 0.03 * scale, "full-ME agreement");
    return v;
}

// |sum_k x_k e^{-i w t_k}|^2 maximized over w in [w0, w1]
double dominant_frequency(const std::vector<double>& t, const std::vector<double>& x, double w0, double w1,
                          double dw) {
    double mean = 0;
    for (double y : x) mean += y / x.size();
    double best = 0, best_w = w0;
    for (double w = w0; w <= w1; w += dw) {
        cplx s = 0;
        for (std::size_t k = 0; k < t.size(); ++k) s += (x[k] - mean) * std::polar(1.0, -w * t[k]);
        if (std::norm(s) > best) {
            best = std::norm(s);
            best_w = w;
        }
    }
    // Parabolic refinement around the best sample.
    auto power = [&](double w) {
        cplx s = 0;
        for (std::size_t k = 0; k < t.size(); ++k) s += (x[k] - mean) * std::polar(1.0, -w * t[k]);
        return std::norm(s);
    };
    const double a = power(best_w - dw), b = power(best_w), c = power(best_w + dw);
    const double den = a - 2 * b + c;
    return den < 0 ? best_w + 0.5 * dw * (a - c) / den : best_w;
}

Verdict p9() {
    Verdict v;
    const auto p = strong(0.075);
    const auto rho_ss = steady_state(p);
    const auto cond = apply_jump(EmissionChannel::side, rho_ss, ChannelRates{p.kappa, p.gamma, 1.0});
    EnsembleSpec spec;
    spec.params = p;
    spec.init = decompose_mixture(cond.state);
    spec.init_label = "conditioned_side";
    spec.times = grid(0.0, 1.0, 0.02);
    spec.count = 2000;
    spec.master_seed = 2025;
    const auto me = evolve(p, cond.state, std::span<const double>(spec.times).subspan(1));
    const auto ops = build_operators(p.spec);

    v.detail << "2000 trajectories from the side-conditioned mixture (" << spec.init.size() << " components):";
    for (auto method : {Unraveling::mc, Unraveling::qsd}) {
        spec.method = method;
        const auto start = std::chrono::steady_clock::now();
        const auto stats = ensemble_average(run_ensemble(spec));
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        double worst = 0;
        for (std::size_t k = 0; k < spec.times.size(); ++k) {
            const double n = expectation(ops.number, me.states[k]).real();
            const double diff = std::abs(stats.mean_n[k] - n);
            const double z = stats.se_n[k] > 0 ? diff / stats.se_n[k] : (diff > 1e-12 ? INFINITY : 0.0);
            worst = std::max(worst, z);
        }
        v.detail << " " << to_string(method) << " max |z| " << fmt(worst, 2) << " (" << fmt(secs, 0) << " s)";
        v.check(worst <= 3.0, to_string(method) + " ensemble");
    }

    // Beat frequency of single |1,-> records at the three drive strengths.
    v.detail << "; |1,-> spectral peaks / nu:";
    const auto t = grid(0.0, 1.0, 2e-4);
    std::uint64_t seed = 1;
    for (double ratio : {0.04, 0.075, 0.12}) {
        const auto q = strong(ratio);
        const double nu = effective_params(q).nu;
        const auto rec = run_qsd_trajectory(q, one_photon_state(q.spec), t, seed++);
        const double w = dominant_frequency(t, rec.n_cond, 4 * std::numbers::pi, 2 * nu, 1.0);
        v.detail << " " << fmt(w / nu, 4);
        v.check(std::abs(w / nu - 1) <= 0.02, "beat peak at eps/g " + fmt(ratio, 3));
    }
    return v;
}

Verdict p10() {
    Verdict v;
    const auto p = strong(0.075);
    const auto rho_ss = steady_state(p);
    const auto cond = apply_jump(EmissionChannel::side, rho_ss, ChannelRates{p.kappa, p.gamma, 1.0});
    const auto res = evolve(p, cond.state, grid(0.01, 1.0, 0.01));
    double trace = 0, herm = 0, pos = 0;
    for (const auto& s : res.states) {
        trace = std::max(trace, std::abs(s.matrix().trace() - 1.0));
        herm = std::max(herm, hermiticity_defect(s.matrix()));
        pos = std::min(pos, min_eigenvalue(s.matrix()));
    }
    v.detail << "ME trace " << sci(trace) << ", hermiticity " << sci(herm) << ", min eigenvalue " << sci(pos);
    v.check(trace <= 1e-10 && herm <= 1e-12 && pos >= -1e-9, "ME invariants");

    const auto e = effective_params(at_p3(0.2475));
    const TransientSolver solver(e);
    double norm = 0, dsum = 0;
    for (auto ch : {EmissionChannel::forward, EmissionChannel::side, EmissionChannel::two_photon}) {
        for (double tau : {0.0, 0.1, 0.3297, 1.0}) {
            const auto c = cavity_coefficients(solver.at(conditioned(ch, e), tau));
            dsum = std::max(dsum, std::abs(c.d0 + c.d1 + c.d2 - 1));
            const auto g = wigner_grid(c, GridSpec::square(4.0, 0.02));
            norm = std::max(norm, std::abs(g.integral() - 1));
        }
    }
    std::mt19937_64 rng(5);
    for (int k = 0; k < 200; ++k) {
        const auto c = cavity_coefficients(random_state(rng, false));
        dsum = std::max(dsum, std::abs(c.d0 + c.d1 + c.d2 - 1));
    }
    v.detail << "; Wigner normalization " << sci(norm) << "; |d0+d1+d2-1| " << sci(dsum);
    v.check(norm <= 1e-6, "Wigner normalization");
    v.check(dsum <= 1e-12, "d0 + d1 + d2");

    const auto t = grid(0.0, 1.0, 0.01);
    bool same = true;
    for (auto method : {Unraveling::mc, Unraveling::qsd}) {
        for (std::uint64_t seed : {3ULL, 0xfeedULL}) {
            auto run = [&] {
                return method == Unraveling::mc ? run_mc_trajectory(p, ground_state(p.spec), t, seed)
                                                : run_qsd_trajectory(p, ground_state(p.spec), t, seed);
            };
            const auto a = run(), b = run();
            same = same && a.n_cond == b.n_cond && a.sigma_cond == b.sigma_cond && a.steps == b.steps &&
                   a.jumps.size() == b.jumps.size();
            for (std::size_t j = 0; same && j < a.jumps.size(); ++j)
                same = a.jumps[j].tau == b.jumps[j].tau && a.jumps[j].channel == b.jumps[j].channel;
        }
    }
    EnsembleSpec spec;
    spec.params = p;
    spec.init = decompose_mixture(cond.state);
    spec.times = grid(0.0, 0.2, 0.02);
    spec.count = 16;
    for (auto method : {Unraveling::mc, Unraveling::qsd}) {
        spec.method = method;
        const auto a = run_ensemble(spec, Execution::serial), b = run_ensemble(spec, Execution::parallel);
        for (std::size_t i = 0; i < a.size(); ++i) same = same && a[i].n_cond == b[i].n_cond;
    }
    v.detail << "; trajectory replay " << (same ? "bit-exact" : "differs");
    v.check(same, "replay");
    return v;
}

} // namespace

int main(int argc, char** argv) {
    diag::set_sink([](const std::string&) {});
    const std::vector<std::pair<std::string, std::function<Verdict()>>> criteria{
        {"P1", p1}, {"P2", p2}, {"P3", p3}, {"P4", p4}, {"P5", p5},
        {"P6", p6}, {"P7", p7}, {"P8", p8}, {"P9", p9}, {"P10", p10}};
    std::set<std::string> selected(argv + 1, argv + argc);
    int failures = 0;
    for (const auto& [name, run] : criteria) {
        if (!selected.empty() && !selected.count(name)) continue;
        const auto start = std::chrono::steady_clock::now();
        Verdict v;
        try {
            v = run();
        } catch (const std::exception& e) {
            v.pass = false;
            v.detail << " [error: " << e.what() << "]";
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        std::printf("%-4s %s  %s  (%.1f s)\n", name.c_str(), v.pass ? "PASS" : "FAIL", v.detail.str().c_str(), secs);
        std::fflush(stdout);
        failures += v.pass ? 0 : 1;
    }
    return failures;
}
