#pragma once

// Effective four-level model of the two-photon resonance.
//
// Dressed states (Fock (x) atom):
//   xi0 = |0,->
//   xi1 = (|1,-> - |0,+>)/sqrt2
//   xi2 = (|1,-> + |0,+>)/sqrt2
//   xi3 = (|2,-> - |1,+>)/sqrt2
// xi0 <-> xi3 is driven at the two-photon Rabi frequency Omega = 2 sqrt2 eps^2/g;
// xi3 decays to xi1/xi2 (rates Gamma31, Gamma32), which decay to xi0 (rate Gamma).
// Within the secular approximation only rho12 and rho03 survive as coherences.

#include <array>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "jcbeat/hilbert.hpp"
#include "jcbeat/lindblad.hpp"

namespace jcbeat {

struct EffectiveParams {
    double omega = 0.0;               // two-photon Rabi frequency
    std::array<double, 4> delta{};    // drive-induced level shifts
    double gamma31 = 0.0;
    double gamma32 = 0.0;
    double gamma_1 = 0.0;             // Gamma: decay of xi1 and xi2
    double nu = 0.0;                  // xi1/xi2 beat frequency, 2g + delta2 - delta1
    double p3 = 0.0;                  // steady occupation of xi3
    double gamma = 0.0;
    double kappa = 0.0;
    double detuning = 0.0;
    double g = 0.0;

    double gamma3() const { return gamma31 + gamma32; }
};

// Throws InvalidArgument for g = 0. Warns outside the perturbative window.
EffectiveParams effective_params(const SystemParams& params);

struct FourLevelState {
    double rho00 = 1.0;
    double rho11 = 0.0;
    double rho22 = 0.0;
    double rho33 = 0.0;
    cplx rho12{};
    cplx rho03{};

    // Populations in [0,1] summing to 1 and Cauchy-Schwarz bounds, to `tol`.
    void validate(double tol = 1e-12) const;
    double population_sum() const { return rho00 + rho11 + rho22 + rho33; }

    // <xi_i|rho|xi_j>
    Eigen::Matrix4cd to_matrix() const;
    // Throws InvalidArgument if coherences outside {rho12, rho03} exceed `tol`.
    static FourLevelState from_matrix(const Eigen::Matrix4cd& m, double tol = 1e-12);

    static FourLevelState ground() { return {}; }
};

struct TransientInit {
    FourLevelState state;
    double c2 = 0.0; // rho33(0) - rho00(0)
    double c1 = 0.0; // -p3 (1 + 2 c2)
};

TransientInit make_transient_init(const FourLevelState& state, const EffectiveParams& eff);

struct FourLevelOperators {
    Eigen::Matrix4cd a;
    Eigen::Matrix4cd sigma_minus;
};

// a and s- restricted to span{xi0..xi3}, in the xi basis.
FourLevelOperators jump_operators_4l();

// lambda_+- = (sqrt2 +- 1)/2
double lambda_plus();
double lambda_minus();

FourLevelState steady_state_4l(const EffectiveParams& eff);

// Numerical integration of the effective master equation.
std::vector<FourLevelState> evolve_effective(const FourLevelState& init, const EffectiveParams& eff,
                                             std::span<const double> times, double abs_tol = 1e-13);

// Closed-form solution from the eigendecomposition of the effective generator.
class TransientSolver {
public:
    explicit TransientSolver(const EffectiveParams& eff);

    FourLevelState at(const FourLevelState& init, double tau) const;
    FourLevelState at(const TransientInit& init, double tau) const { return at(init.state, tau); }

    // Generator of (rho00, rho11, rho22, rho33, Re rho03, Im rho03).
    const Eigen::Matrix<double, 6, 6>& generator() const { return gen_; }
    const Eigen::Matrix<cplx, 6, 1>& eigenvalues() const { return evals_; }
    // Amplitude of each mode in rho33(tau) for the given initial state.
    Eigen::Matrix<cplx, 6, 1> rho33_amplitudes(const FourLevelState& init) const;
    bool used_fallback() const { return fallback_; }

private:
    EffectiveParams eff_;
    Eigen::Matrix<double, 6, 6> gen_;
    Eigen::Matrix<cplx, 6, 6> evecs_;
    Eigen::Matrix<cplx, 6, 6> evecs_inv_;
    Eigen::Matrix<cplx, 6, 1> evals_;
    bool fallback_ = false;
};

FourLevelState analytic_transient(const TransientInit& init, const EffectiveParams& eff, double tau);

// Photon number and atomic excitation of a four-level state.
double photon_number(const FourLevelState& s);
double atomic_excitation(const FourLevelState& s);

// Forward-to-side photon flux ratio 2 kappa <a^dag a> / (gamma <s+ s->).
// Throws NumericalError when the atom carries no excitation.
double flux_ratio(const FourLevelState& s, double gamma, double kappa);

struct FockCoefficients {
    double d0 = 1.0; // <0|rho_c|0>
    double d1 = 0.0; // <1|rho_c|1>
    double d2 = 0.0; // <2|rho_c|2>
    double d3 = 0.0; // Im <0|rho_c|2>; Re <0|rho_c|2> is taken to vanish, as it does
                     // for every state reachable from the ground state

    void validate(double tol = 1e-12) const;
};

FockCoefficients cavity_coefficients(const FourLevelState& s);

// Dressed states and a four-level state embedded in the full space.
Vector dressed_state(const HilbertSpec& spec, int which);
Matrix embed(const HilbertSpec& spec, const FourLevelState& s);
// Projection of a full-space state onto the xi basis. Throws if coherences outside
// the secular form exceed `tol`.
FourLevelState project(const HilbertSpec& spec, const Matrix& rho, double tol = 1e-12);

} // namespace jcbeat
