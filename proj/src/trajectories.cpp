#include "jcbeat/trajectories.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <exception>
#include <limits>
#include <ostream>
#include <sstream>

#include <json.hpp>

#include "jcbeat/csv.hpp"
#include "jcbeat/error.hpp"
#include "jcbeat/ode.hpp"
#include "jcbeat/rng.hpp"

namespace jcbeat {

namespace {

constexpr double nan = std::numeric_limits<double>::quiet_NaN();
constexpr std::uint64_t tag_mc = 0x6d63;
constexpr std::uint64_t tag_qsd = 0x717364;
constexpr std::uint64_t tag_init = 0x696e6974;

void check_times(std::span<const double> times) {
    if (times.empty() || times.front() != 0.0) throw InvalidArgument("trajectory sampling grid must start at 0");
    for (std::size_t k = 1; k < times.size(); ++k) {
        if (!(times[k] > times[k - 1]) || !std::isfinite(times[k])) {
            throw InvalidArgument("trajectory sampling grid must be strictly increasing");
        }
    }
}

void check_init(const SystemParams& params, const Vector& init) {
    if (init.size() != params.spec.dim()) throw InvalidArgument("initial state dimension does not match the system");
    if (std::abs(init.norm() - 1.0) > 1e-10) throw InvalidArgument("initial state must be normalized");
}

// Diagonal photon-number and atomic-excitation weights of the basis.
struct Observer {
    Eigen::VectorXd photons;
    Eigen::VectorXd excited;
    double kappa, gamma, floor;

    Observer(const SystemParams& p, double r_floor) : kappa(p.kappa), gamma(p.gamma), floor(r_floor) {
        const auto& s = p.spec;
        photons.resize(s.dim());
        excited.resize(s.dim());
        for (Eigen::Index i = 0; i < s.dim(); ++i) {
            photons(i) = s.photons(i);
            excited(i) = s.excited(i) ? 1.0 : 0.0;
        }
    }

    void sample(TrajectoryRecord& r, double tau, const Vector& psi) const {
        const Eigen::VectorXd prob = psi.cwiseAbs2() / psi.squaredNorm();
        const double n = prob.dot(photons);
        const double s = prob.dot(excited);
        r.times.push_back(tau);
        r.n_cond.push_back(n);
        r.sigma_cond.push_back(s);
        r.r_cond.push_back(s > floor ? 2.0 * kappa * n / (gamma * s) : nan);
    }

    double photon_number(const Vector& psi) const { return (psi.cwiseAbs2() / psi.squaredNorm()).dot(photons); }
};

TrajectoryRecord start_record(Unraveling method, const SystemParams& params, std::uint64_t seed,
                              const TrajectoryOptions& options, std::size_t n) {
    TrajectoryRecord r;
    r.method = method;
    r.seed = seed;
    r.fingerprint = options.fingerprint ? options.fingerprint : fingerprint(params);
    r.init_label = options.init_label;
    r.times.reserve(n);
    r.n_cond.reserve(n);
    r.sigma_cond.reserve(n);
    r.r_cond.reserve(n);
    return r;
}

using csv::write_value;

} // namespace

std::string to_string(Unraveling u) { return u == Unraveling::mc ? "mc" : "qsd"; }

Unraveling unraveling_from_string(const std::string& name) {
    if (name == "mc") return Unraveling::mc;
    if (name == "qsd") return Unraveling::qsd;
    throw InvalidArgument("unknown unraveling '" + name + "' (expected mc or qsd)");
}

Vector ground_state(const HilbertSpec& spec) { return basis_state(spec, 0, Atom::lower); }
Vector one_photon_state(const HilbertSpec& spec) { return basis_state(spec, 1, Atom::lower); }

void TrajectoryRecord::write_csv(std::ostream& out) const {
    out << "tau,n_cond,sigma_cond,r_cond\n";
    for (std::size_t k = 0; k < times.size(); ++k) {
        write_value(out, times[k]);
        out << ',';
        write_value(out, n_cond[k]);
        out << ',';
        write_value(out, sigma_cond[k]);
        out << ',';
        write_value(out, r_cond[k]);
        out << '\n';
    }
}

void TrajectoryRecord::write_sidecar(std::ostream& out) const {
    nlohmann::ordered_json j;
    j["seed"] = seed;
    char fp[17];
    std::snprintf(fp, sizeof fp, "%016llx", static_cast<unsigned long long>(fingerprint));
    j["fingerprint"] = fp;
    j["method"] = to_string(method);
    j["init"] = init_label;
    auto jumps_json = nlohmann::json::array();
    auto photons_json = nlohmann::json::array();
    for (const auto& e : jumps) {
        jumps_json.push_back({e.tau, to_string(e.channel)});
        photons_json.push_back({e.n_before, e.n_after});
    }
    j["jumps"] = jumps_json;
    j["jump_photon_numbers"] = photons_json;
    j["steps"] = steps;
    if (method == Unraveling::qsd) j["max_norm_defect"] = max_norm_defect;
    out << j.dump(2) << '\n';
}

TrajectoryRecord run_mc_trajectory(const SystemParams& params, const Vector& init, std::span<const double> times,
                                   std::uint64_t seed, const TrajectoryOptions& options) {
    params.validate();
    check_times(times);
    check_init(params, init);
    const Liouvillian gen(params);
    const Matrix minus_i_hnh = cplx(0.0, -1.0) * gen.nonhermitian_hamiltonian();
    const Matrix& a = gen.operators().a;
    const Matrix& sm = gen.operators().sigma_minus;
    const Observer obs(params, options.r_floor);

    auto rhs = [&](double, const Vector& psi) -> Vector { return minus_i_hnh * psi; };
    rng::Stream stream(seed, tag_mc);
    ode::AdaptiveIntegrator<Vector> integrator({.abs_tol = options.mc_tol, .initial_step = 1e-3 / std::max(1.0, params.g)});

    TrajectoryRecord rec = start_record(Unraveling::mc, params, seed, options, times.size());
    Vector psi = init;
    double t = 0.0;
    double r1 = stream.uniform();
    obs.sample(rec, 0.0, psi);
    std::size_t next = 1;
    while (next < times.size()) {
        const double target = times[next];
        const double t0 = t;
        const Vector psi0 = psi;
        integrator.step(rhs, t, psi, target);
        const double norm2 = psi.squaredNorm();
        if (norm2 >= r1) {
            if (norm2 < 1e-14) throw NumericalError("no-jump norm underflow at tau = " + std::to_string(t));
            if (t == target) {
                obs.sample(rec, target, psi);
                ++next;
            }
            continue;
        }
        // The collapse threshold was crossed inside the last step; bisect on
        // single sub-steps from its start.
        double lo = 0.0, hi = t - t0;
        for (int it = 0; it < 200 && hi - lo > 1e-15 * std::max(1.0, t0); ++it) {
            const double mid = 0.5 * (lo + hi);
            if (ode::cash_karp_step(rhs, t0, psi0, mid).y.squaredNorm() > r1) lo = mid;
            else hi = mid;
        }
        const double t_jump = t0 + hi;
        const Vector pre = ode::cash_karp_step(rhs, t0, psi0, hi).y;
        const double w_forward = 2.0 * params.kappa * (a * pre).squaredNorm();
        const double w_side = params.gamma * (sm * pre).squaredNorm();
        if (!(w_forward + w_side > 0.0)) throw NumericalError("norm decayed without an available jump channel");
        const double r2 = stream.uniform();
        JumpEvent ev;
        ev.tau = t_jump;
        ev.channel = r2 * (w_forward + w_side) < w_forward ? EmissionChannel::forward : EmissionChannel::side;
        ev.n_before = obs.photon_number(pre);
        psi = ev.channel == EmissionChannel::forward ? Vector(a * pre) : Vector(sm * pre);
        psi.normalize();
        ev.n_after = obs.photon_number(psi);
        if (rec.jump_states.size() < options.keep_jump_states) rec.jump_states.push_back({pre.normalized(), psi});
        rec.jumps.push_back(ev);
        t = t_jump;
        r1 = stream.uniform();
    }
    rec.steps = integrator.accepted();
    return rec;
}

BrownianPath::BrownianPath(std::uint64_t seed, int channels, double lattice)
    : seed_(seed), channels_(channels), lattice_(lattice), tick_(std::ldexp(lattice, -levels)),
      cumulative_(channels, std::vector<cplx>{cplx(0.0, 0.0)}) {
    if (!(lattice > 0.0)) throw InvalidArgument("noise lattice spacing must be positive");
}

std::int64_t BrownianPath::to_ticks(double t) const { return std::llround(t / tick_); }

cplx BrownianPath::lattice_value(int channel, std::int64_t cell) {
    auto& w = cumulative_[channel];
    const double scale = std::sqrt(0.5 * lattice_);
    while (static_cast<std::int64_t>(w.size()) <= cell) {
        const auto j = static_cast<std::uint64_t>(w.size() - 1);
        const auto ch = static_cast<std::uint64_t>(channel);
        const double re = rng::normal(rng::key({seed_, j, 0, 0, ch, 0}));
        const double im = rng::normal(rng::key({seed_, j, 0, 0, ch, 1}));
        w.push_back(w.back() + scale * cplx(re, im));
    }
    return w[cell];
}

cplx BrownianPath::value(int channel, std::int64_t ticks) {
    if (ticks < 0 || channel < 0 || channel >= channels_) throw InvalidArgument("Brownian path query out of range");
    const std::int64_t cell = ticks >> levels;
    const std::int64_t offset = ticks & ((std::int64_t{1} << levels) - 1);
    cplx a = lattice_value(channel, cell);
    if (offset == 0) return a;
    cplx b = lattice_value(channel, cell + 1);
    std::int64_t lo = 0, hi = std::int64_t{1} << levels;
    const auto ch = static_cast<std::uint64_t>(channel);
    for (std::uint64_t level = 1;; ++level) {
        const std::int64_t mid = (lo + hi) / 2;
        const double span = static_cast<double>(hi - lo) * tick_;
        const double sd = std::sqrt(span / 8.0);
        const auto c = static_cast<std::uint64_t>(cell);
        const auto m = static_cast<std::uint64_t>(mid);
        const cplx z(rng::normal(rng::key({seed_, c, level, m, ch, 0})), rng::normal(rng::key({seed_, c, level, m, ch, 1})));
        const cplx w = 0.5 * (a + b) + sd * z;
        if (offset == mid) return w;
        if (offset < mid) {
            hi = mid;
            b = w;
        } else {
            lo = mid;
            a = w;
        }
    }
}

TrajectoryRecord run_qsd_trajectory(const SystemParams& params, const Vector& init, std::span<const double> times,
                                    std::uint64_t seed, const TrajectoryOptions& options) {
    params.validate();
    check_times(times);
    check_init(params, init);
    const Liouvillian gen(params);
    const auto& ops = gen.operators();
    const std::array<Matrix, 2> jumps{std::sqrt(2.0 * params.kappa) * ops.a, std::sqrt(params.gamma) * ops.sigma_minus};
    Matrix ldl = Matrix::Zero(params.spec.dim(), params.spec.dim());
    for (const auto& l : jumps) ldl += l.adjoint() * l;
    const Matrix drift = cplx(0.0, -1.0) * gen.hamiltonian() - 0.5 * ldl;
    const Observer obs(params, options.r_floor);

    std::array<cplx, 2> xi{};
    auto rhs = [&](double, const Vector& psi) -> Vector {
        const double nrm = psi.squaredNorm();
        Vector out = drift * psi;
        out += (0.5 * psi.dot(ldl * psi).real() / nrm) * psi;
        for (std::size_t k = 0; k < jumps.size(); ++k) {
            const Vector lpsi = jumps[k] * psi;
            const cplx e = psi.dot(lpsi) / nrm;
            out += (std::conj(e) + xi[k]) * (lpsi - e * psi);
        }
        return out;
    };

    const double lattice = options.noise_lattice > 0.0 ? options.noise_lattice : 5e-3 / std::max(params.g, 1.0);
    BrownianPath path(rng::key({seed, tag_qsd}), 2, lattice);
    std::vector<std::int64_t> sample_ticks;
    for (double t : times) sample_ticks.push_back(path.to_ticks(t));

    TrajectoryRecord rec = start_record(Unraveling::qsd, params, seed, options, times.size());
    Vector psi = init;
    obs.sample(rec, 0.0, psi);
    std::int64_t now = 0;
    std::array<cplx, 2> w_now{path.value(0, 0), path.value(1, 0)};
    double h = 0.25 * lattice;
    const int max_power = BrownianPath::levels + 16;
    for (std::size_t next = 1; next < times.size();) {
        const std::int64_t target = sample_ticks[next];
        if (target <= now) {
            obs.sample(rec, times[next], psi);
            ++next;
            continue;
        }
        const int p = std::clamp(static_cast<int>(std::floor(std::log2(h / path.tick()))), 0, max_power);
        const std::int64_t aligned = ((now >> p) + 1) << p;
        const std::int64_t end = std::min(aligned, target);
        const double dt = static_cast<double>(end - now) * path.tick();
        std::array<cplx, 2> w_end{path.value(0, end), path.value(1, end)};
        for (int k = 0; k < 2; ++k) xi[k] = (w_end[k] - w_now[k]) / dt;
        auto out = ode::cash_karp_step(rhs, static_cast<double>(now) * path.tick(), psi, dt);
        const double norm = out.y.norm();
        const double defect = std::abs(norm - 1.0);
        if (std::isfinite(out.error) && out.error <= options.qsd_tol && defect <= options.norm_tol) {
            psi = out.y / norm;
            now = end;
            w_now = w_end;
            rec.max_norm_defect = std::max(rec.max_norm_defect, defect);
            ++rec.steps;
            const double grow =
                out.error == 0.0 ? 5.0 : std::clamp(0.9 * std::pow(options.qsd_tol / out.error, 0.2), 0.2, 5.0);
            if (end == aligned || dt * grow > h) h = dt * grow;
            continue;
        }
        if (end - now <= 1) {
            std::ostringstream msg;
            msg << "step size underflow at tau = " << static_cast<double>(now) * path.tick();
            throw NumericalError(msg.str());
        }
        const double shrink = std::isfinite(out.error) && out.error > options.qsd_tol
                                  ? std::clamp(0.9 * std::pow(options.qsd_tol / out.error, 0.25), 0.1, 0.5)
                                  : 0.5;
        h = dt * shrink;
    }
    return rec;
}

std::vector<double> conditional_observables(const TrajectoryRecord& record, double kappa, double gamma,
                                            double floor) {
    std::vector<double> r(record.times.size());
    for (std::size_t k = 0; k < r.size(); ++k) {
        const double s = record.sigma_cond[k];
        r[k] = s > floor ? 2.0 * kappa * record.n_cond[k] / (gamma * s) : nan;
    }
    return r;
}

EnsembleStats ensemble_average(std::span<const TrajectoryRecord> records) {
    if (records.size() < 2) throw InvalidArgument("ensemble average needs at least 2 records");
    const auto& first = records.front();
    for (const auto& r : records) {
        if (r.times != first.times) throw InvalidArgument("ensemble records have different time grids");
        if (r.fingerprint != first.fingerprint) throw InvalidArgument("ensemble records come from different configs");
    }
    const std::size_t n = first.times.size();
    EnsembleStats st;
    st.times = first.times;
    st.count = records.size();
    auto moments = [&](auto pick, std::vector<double>& mean, std::vector<double>& se, bool skip_nan) {
        mean.assign(n, nan);
        se.assign(n, nan);
        for (std::size_t k = 0; k < n; ++k) {
            double sum = 0.0;
            std::size_t m = 0;
            for (const auto& r : records) {
                const double v = pick(r)[k];
                if (skip_nan && std::isnan(v)) continue;
                sum += v;
                ++m;
            }
            if (m == 0) continue;
            const double mu = sum / static_cast<double>(m);
            mean[k] = mu;
            if (m < 2) continue;
            double ss = 0.0;
            for (const auto& r : records) {
                const double v = pick(r)[k];
                if (skip_nan && std::isnan(v)) continue;
                ss += (v - mu) * (v - mu);
            }
            se[k] = std::sqrt(ss / static_cast<double>(m - 1)) / std::sqrt(static_cast<double>(m));
        }
    };
    moments([](const TrajectoryRecord& r) -> const std::vector<double>& { return r.n_cond; }, st.mean_n, st.se_n, false);
    moments([](const TrajectoryRecord& r) -> const std::vector<double>& { return r.sigma_cond; }, st.mean_sigma,
            st.se_sigma, false);
    moments([](const TrajectoryRecord& r) -> const std::vector<double>& { return r.r_cond; }, st.mean_r, st.se_r, true);
    return st;
}

void EnsembleStats::write_csv(std::ostream& out) const {
    out << "tau,mean_n,se_n,mean_sigma,se_sigma,mean_r,se_r\n";
    for (std::size_t k = 0; k < times.size(); ++k) {
        for (double v : {times[k], mean_n[k], se_n[k], mean_sigma[k], se_sigma[k], mean_r[k]}) {
            write_value(out, v);
            out << ',';
        }
        write_value(out, se_r[k]);
        out << '\n';
    }
}

const MixtureComponent& sample_component(std::span<const MixtureComponent> mixture, std::uint64_t seed) {
    if (mixture.empty()) throw InvalidArgument("empty mixture");
    rng::Stream pick(seed, tag_init);
    const double u = pick.uniform();
    std::size_t c = 0;
    double acc = mixture[0].weight;
    while (u >= acc && c + 1 < mixture.size()) acc += mixture[++c].weight;
    return mixture[c];
}

std::vector<TrajectoryRecord> run_ensemble(const EnsembleSpec& spec, Execution exec) {
    if (spec.init.empty()) throw InvalidArgument("ensemble needs at least one initial state component");
    check_times(spec.times);
    TrajectoryOptions options = spec.options;
    options.init_label = spec.init_label;
    if (!options.fingerprint) options.fingerprint = fingerprint(spec.params);

    std::vector<TrajectoryRecord> records(spec.count);
    auto run_one = [&](std::size_t i) {
        const std::uint64_t seed = rng::derive_seed(spec.master_seed, i);
        const Vector& psi = sample_component(spec.init, seed).psi;
        records[i] = spec.method == Unraveling::mc ? run_mc_trajectory(spec.params, psi, spec.times, seed, options)
                                                   : run_qsd_trajectory(spec.params, psi, spec.times, seed, options);
    };

    if (exec == Execution::serial) {
        for (std::size_t i = 0; i < spec.count; ++i) run_one(i);
        return records;
    }
    std::vector<std::exception_ptr> errors(spec.count);
    const auto count = static_cast<long>(spec.count);
#pragma omp parallel for schedule(dynamic, 1)
    for (long i = 0; i < count; ++i) {
        try {
            run_one(static_cast<std::size_t>(i));
        } catch (...) {
            errors[i] = std::current_exception();
        }
    }
    for (auto& e : errors)
        if (e) std::rethrow_exception(e);
    return records;
}

} // namespace jcbeat
