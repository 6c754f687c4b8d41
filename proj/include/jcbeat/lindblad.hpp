#pragma once

// Master equation of the driven, damped Jaynes-Cummings system in the frame
// rotating at the drive frequency:
//
//   drho/dt = -i[H, rho] + kappa (2 a rho a^dag - {a^dag a, rho})
//             + (gamma/2) (2 s- rho s+ - {s+ s-, rho})
//   H = -dw (s+ s- + a^dag a) + g (a s+ + a^dag s-) + eps (a + a^dag)
//
// Rates are in units of gamma unless a caller chooses otherwise; times in 1/gamma.

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "jcbeat/hilbert.hpp"
#include "jcbeat/ode.hpp"

namespace jcbeat {

enum class DetuningMode { two_photon_shifted, two_photon_bare, vacuum_rabi, explicit_value };

std::string to_string(DetuningMode mode);
DetuningMode detuning_mode_from_string(const std::string& name);

struct SystemParams {
    double g = 0.0;
    double kappa = 0.0;
    double gamma = 0.0;
    double eps_d = 0.0;
    DetuningMode detuning_mode = DetuningMode::two_photon_shifted;
    double explicit_detuning = 0.0; // used only with DetuningMode::explicit_value
    HilbertSpec spec{2};

    // Drive detuning dw = omega_d - omega_0 implied by the mode.
    double detuning() const;
    // Throws InvalidArgument on negative or non-finite rates.
    void validate() const;

    bool operator==(const SystemParams&) const = default;
};

// FNV-1a over the physics fields; equal params give equal fingerprints.
std::uint64_t fingerprint(const SystemParams& params);
std::uint64_t fnv1a(const void* data, std::size_t size, std::uint64_t h = 0xcbf29ce484222325ULL);

Matrix rotating_frame_hamiltonian(const SystemParams& params);

// Precomputed generator; cheap to copy, immutable after construction.
class Liouvillian {
public:
    explicit Liouvillian(const SystemParams& params);

    const SystemParams& params() const { return params_; }
    const OperatorSet& operators() const { return ops_; }
    const Matrix& hamiltonian() const { return h_; }
    // H - i kappa a^dag a - i (gamma/2) s+ s-
    const Matrix& nonhermitian_hamiltonian() const { return h_nh_; }

    // d rho / d tau
    Matrix apply(const Matrix& rho) const;

    // Column-major vectorized generator, dimension d^2 x d^2.
    SparseMatrix sparse_superoperator() const;
    Matrix superoperator() const;

private:
    SystemParams params_;
    OperatorSet ops_;
    Matrix h_;
    Matrix h_nh_;
    Matrix jump_a_;     // sqrt(2 kappa) a
    Matrix jump_sigma_; // sqrt(gamma) s-
};

Matrix liouvillian_rhs(const SystemParams& params, const Matrix& rho);

struct EvolveOptions {
    double abs_tol = 1e-10;     // per-entry local error per step
    double correction_log = 1e-8; // Hermiticity / trace corrections above this are reported
    double initial_step = 1e-4;
};

struct EvolutionResult {
    std::vector<double> times;
    std::vector<DensityMatrix> states;
};

// The result starts with rho0 at tau = 0 and then holds one state per requested
// time. Requested times must be strictly increasing and non-negative; a leading
// 0 is not duplicated.
EvolutionResult evolve(const SystemParams& params, const DensityMatrix& rho0,
                       std::span<const double> times, const EvolveOptions& options = {});
EvolutionResult evolve(const Liouvillian& generator, const DensityMatrix& rho0,
                       std::span<const double> times, const EvolveOptions& options = {});

struct SteadyStateInfo {
    double residual = 0.0; // max |L(rho_ss)|
    double truncation_population = 0.0; // population of n >= N - 2
};

DensityMatrix steady_state(const SystemParams& params, SteadyStateInfo* info = nullptr);

// Population of Fock levels n >= N - 2; warns above 1e-6.
double truncation_population(const HilbertSpec& spec, const Matrix& rho, bool warn = true);

struct G2Result {
    std::vector<double> tau;
    std::vector<double> g2;
    double n_ss = 0.0;
};

// Forward (transmitted-light) intensity correlation via quantum regression.
// tau_grid must start at 0 and be strictly increasing.
G2Result g2_forward(const SystemParams& params, std::span<const double> tau_grid,
                    const EvolveOptions& options = {});
G2Result g2_forward(const SystemParams& params, const DensityMatrix& rho_ss,
                    std::span<const double> tau_grid, const EvolveOptions& options = {});

} // namespace jcbeat
