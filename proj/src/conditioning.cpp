#include "jcbeat/conditioning.hpp"

#include <algorithm>
#include <cmath>

#include <Eigen/Eigenvalues>

#include "jcbeat/error.hpp"

namespace jcbeat {

std::string to_string(EmissionChannel channel) {
    switch (channel) {
    case EmissionChannel::forward: return "forward";
    case EmissionChannel::side: return "side";
    case EmissionChannel::two_photon: return "two_photon";
    }
    return "unknown";
}

EmissionChannel emission_channel_from_string(const std::string& name) {
    if (name == "forward") return EmissionChannel::forward;
    if (name == "side") return EmissionChannel::side;
    if (name == "two_photon") return EmissionChannel::two_photon;
    throw InvalidArgument("unknown emission channel '" + name + "'");
}

double ChannelRates::rate(EmissionChannel channel) const {
    switch (channel) {
    case EmissionChannel::forward: return 2.0 * kappa;
    case EmissionChannel::side: return gamma;
    case EmissionChannel::two_photon: return kappa_prime;
    }
    return 0.0;
}

namespace {

template <class M>
std::pair<M, double> jump(const M& op, const M& rho, double rate, EmissionChannel channel) {
    if (!(rate > 0.0)) throw InvalidArgument("channel " + to_string(channel) + " has zero rate");
    M out = op * rho * op.adjoint();
    const double tr = out.trace().real();
    if (!(tr > 1e-15)) {
        throw InvalidArgument("a " + to_string(channel) + " emission is impossible from this state (zero weight)");
    }
    out /= tr;
    return {out, rate * tr};
}

} // namespace

ConditionedState apply_jump(EmissionChannel channel, const FourLevelState& rho, const ChannelRates& rates) {
    const auto ops = jump_operators_4l();
    Eigen::Matrix4cd op;
    switch (channel) {
    case EmissionChannel::forward: op = ops.a; break;
    case EmissionChannel::side: op = ops.sigma_minus; break;
    case EmissionChannel::two_photon: op = ops.a * ops.a; break;
    }
    auto [m, weight] = jump<Eigen::Matrix4cd>(op, rho.to_matrix(), rates.rate(channel), channel);
    return {FourLevelState::from_matrix(m, 1e-12), weight};
}

ConditionedDensity apply_jump(EmissionChannel channel, const DensityMatrix& rho, const ChannelRates& rates) {
    const HilbertSpec spec((static_cast<int>(rho.dim()) / 2) - 1);
    const auto ops = build_operators(spec);
    Matrix op;
    switch (channel) {
    case EmissionChannel::forward: op = ops.a; break;
    case EmissionChannel::side: op = ops.sigma_minus; break;
    case EmissionChannel::two_photon: op = ops.a * ops.a; break;
    }
    auto [m, weight] = jump<Matrix>(op, rho.matrix(), rates.rate(channel), channel);
    return {DensityMatrix(0.5 * (m + m.adjoint())), weight};
}

TransientInit beat_initial_conditions(const ConditionedState& cond, const EffectiveParams& eff) {
    return make_transient_init(cond.state, eff);
}

EffectiveG2 g2_forward_effective(const EffectiveParams& eff, std::span<const double> tau) {
    const auto ss = steady_state_4l(eff);
    const double n_ss = photon_number(ss);
    const auto cond = apply_jump(EmissionChannel::forward, ss, ChannelRates{eff.kappa, eff.gamma, 1.0});
    const TransientSolver solver(eff);
    EffectiveG2 out;
    for (double t : tau) {
        auto s = solver.at(cond.state, t);
        out.tau.push_back(t);
        out.g2.push_back(photon_number(s) / n_ss);
        s.rho12 = 0.0;
        out.beat_averaged.push_back(photon_number(s) / n_ss);
    }
    return out;
}

std::vector<MixtureComponent> decompose_mixture(const DensityMatrix& rho, double tol) {
    Eigen::SelfAdjointEigenSolver<Matrix> es(rho.matrix());
    std::vector<MixtureComponent> out;
    double total = 0.0;
    for (Eigen::Index k = es.eigenvalues().size() - 1; k >= 0; --k) {
        const double p = es.eigenvalues()(k);
        if (p <= tol) continue;
        Vector psi = es.eigenvectors().col(k);
        // Fix the global phase so the largest component is real and positive.
        Eigen::Index big = 0;
        psi.cwiseAbs().maxCoeff(&big);
        psi *= std::polar(1.0, -std::arg(psi(big)));
        out.push_back({p, psi});
        total += p;
    }
    for (auto& c : out) c.weight /= total;
    return out;
}

} // namespace jcbeat
