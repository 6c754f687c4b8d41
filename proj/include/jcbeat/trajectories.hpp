#pragma once

// Stochastic unravelings of the master equation.
//
// mc:  quantum jumps on the forward (sqrt(2 kappa) a) and side (sqrt(gamma) s-)
//      channels, waiting-time algorithm with two uniforms per jump.
// qsd: heterodyne state diffusion, written in Stratonovich form so the
//      norm is conserved by the flow:
//        dpsi = -i H psi dt - 1/2 sum (L^dag L - <L^dag L>) psi dt
//               + sum <L^dag> (L - <L>) psi dt + sum (L - <L>) psi o dW
//      with complex dW, E|dW|^2 = dt.

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "jcbeat/conditioning.hpp"
#include "jcbeat/lindblad.hpp"
#include "jcbeat/wigner.hpp"

namespace jcbeat {

enum class Unraveling { mc, qsd };
std::string to_string(Unraveling u);
Unraveling unraveling_from_string(const std::string& name);

struct JumpEvent {
    double tau = 0.0;
    EmissionChannel channel = EmissionChannel::forward;
    double n_before = 0.0; // <a^dag a> just before and after the jump
    double n_after = 0.0;
};

struct TrajectoryRecord {
    Unraveling method = Unraveling::mc;
    std::vector<double> times;
    std::vector<double> n_cond;     // <a^dag a>_REC
    std::vector<double> sigma_cond; // <s+ s->_REC
    std::vector<double> r_cond;     // flux ratio, NaN where undefined
    std::vector<JumpEvent> jumps;
    std::vector<std::pair<Vector, Vector>> jump_states; // normalized states around the first jumps (mc)
    std::uint64_t seed = 0;
    std::uint64_t fingerprint = 0;
    std::string init_label = "custom";
    double max_norm_defect = 0.0; // qsd: largest |norm - 1| before renormalization
    long steps = 0;

    // Columns tau, n_cond, sigma_cond, r_cond; missing values written as "nan".
    void write_csv(std::ostream& out) const;
    // seed, fingerprint, method, init, jumps as [tau, channel] pairs.
    void write_sidecar(std::ostream& out) const;
};

struct TrajectoryOptions {
    double mc_tol = 1e-9;       // per-amplitude local error of the no-jump evolution
    double qsd_tol = 1e-8;      // per-amplitude local error of each diffusion step
    double norm_tol = 1e-6;     // qsd steps with a larger norm defect are retried smaller
    double noise_lattice = 0.0; // Wiener lattice spacing; 0 selects 5e-3 / max(g, 1)
    double r_floor = 1e-12;     // <s+ s-> below this gives a missing flux ratio
    std::string init_label = "custom";
    std::uint64_t fingerprint = 0; // 0 selects fingerprint(params)
    std::size_t keep_jump_states = 0; // mc: keep states around this many leading jumps
};

// `times` is the sampling grid: non-negative, strictly increasing, starting at 0.
TrajectoryRecord run_mc_trajectory(const SystemParams& params, const Vector& init, std::span<const double> times,
                                   std::uint64_t seed, const TrajectoryOptions& options = {});
TrajectoryRecord run_qsd_trajectory(const SystemParams& params, const Vector& init, std::span<const double> times,
                                    std::uint64_t seed, const TrajectoryOptions& options = {});

// Deterministic complex Brownian paths, one per channel, defined at every
// point of an integer tick grid (tick = lattice / 2^levels). Coarse lattice
// increments are refined by Brownian bridges keyed on (seed, cell, level,
// index, channel, component), so W(t) does not depend on how it is queried.
class BrownianPath {
public:
    static constexpr int levels = 24;

    BrownianPath(std::uint64_t seed, int channels, double lattice);

    double tick() const { return tick_; }
    std::int64_t to_ticks(double t) const;
    cplx value(int channel, std::int64_t ticks);

private:
    cplx lattice_value(int channel, std::int64_t cell);

    std::uint64_t seed_;
    int channels_;
    double lattice_;
    double tick_;
    std::vector<std::vector<cplx>> cumulative_;
};

// r_REC = 2 kappa <a^dag a> / (gamma <s+ s->), NaN where <s+ s-> <= floor.
std::vector<double> conditional_observables(const TrajectoryRecord& record, double kappa, double gamma,
                                            double floor = 1e-12);

struct EnsembleStats {
    std::vector<double> times;
    std::vector<double> mean_n, se_n;
    std::vector<double> mean_sigma, se_sigma;
    std::vector<double> mean_r, se_r; // over records where r is defined
    std::size_t count = 0;

    void write_csv(std::ostream& out) const;
};

EnsembleStats ensemble_average(std::span<const TrajectoryRecord> records);

struct EnsembleSpec {
    Unraveling method = Unraveling::qsd;
    SystemParams params;
    std::vector<MixtureComponent> init; // sampled per trajectory by weight
    std::string init_label = "custom";
    std::vector<double> times;
    std::uint64_t master_seed = 1;
    std::size_t count = 100;
    TrajectoryOptions options;
};

// Component drawn for a trajectory with this seed (weights summing to 1).
const MixtureComponent& sample_component(std::span<const MixtureComponent> mixture, std::uint64_t seed);

// Trajectory i uses seed derive_seed(master_seed, i) and draws its initial
// component from that seed's own stream. Output is independent of the
// execution mode and of the number of workers.
std::vector<TrajectoryRecord> run_ensemble(const EnsembleSpec& spec, Execution exec = Execution::parallel);

// Initial state labels used by presets.
Vector ground_state(const HilbertSpec& spec);
Vector one_photon_state(const HilbertSpec& spec); // |1,->

} // namespace jcbeat
