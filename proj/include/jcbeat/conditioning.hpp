#pragma once

// Photodetection conditioning: rho -> J rho J^dag / tr(J rho J^dag).
//
//   forward     J = sqrt(2 kappa) a
//   side        J = sqrt(gamma) s-
//   two_photon  J = sqrt(kappa') a^2    (kappa' is a free normalization)

#include <span>
#include <string>
#include <vector>

#include "jcbeat/four_level.hpp"
#include "jcbeat/hilbert.hpp"
#include "jcbeat/lindblad.hpp"

namespace jcbeat {

enum class EmissionChannel { forward, side, two_photon };

std::string to_string(EmissionChannel channel);
EmissionChannel emission_channel_from_string(const std::string& name);

struct ChannelRates {
    double kappa = 0.5;
    double gamma = 1.0;
    double kappa_prime = 1.0;

    double rate(EmissionChannel channel) const;
};

struct ConditionedState {
    FourLevelState state;
    double weight = 0.0; // tr(J rho J^dag) before normalization
};

struct ConditionedDensity {
    DensityMatrix state;
    double weight = 0.0;
};

// Both throw InvalidArgument when the jump annihilates the state.
ConditionedState apply_jump(EmissionChannel channel, const FourLevelState& rho, const ChannelRates& rates);
ConditionedDensity apply_jump(EmissionChannel channel, const DensityMatrix& rho, const ChannelRates& rates);

TransientInit beat_initial_conditions(const ConditionedState& cond, const EffectiveParams& eff);

// Forward intensity correlation of the effective model,
//   g2(tau) = <a^dag a>(tau | forward emission at 0) / <a^dag a>_ss.
// `beat_averaged` drops the Re rho12 term, which carries the whole
// oscillation at nu.
struct EffectiveG2 {
    std::vector<double> tau;
    std::vector<double> g2;
    std::vector<double> beat_averaged;
};
EffectiveG2 g2_forward_effective(const EffectiveParams& eff, std::span<const double> tau);

// Spectral decomposition rho = sum_k p_k |psi_k><psi_k|, keeping p_k > tol.
// Used to sample pure trajectory initial states from a mixed state.
struct MixtureComponent {
    double weight = 0.0;
    Vector psi;
};
std::vector<MixtureComponent> decompose_mixture(const DensityMatrix& rho, double tol = 1e-12);

} // namespace jcbeat
