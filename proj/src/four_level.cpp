#include "jcbeat/four_level.hpp"

#include <cmath>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

#include <Eigen/Eigenvalues>
#include <unsupported/Eigen/MatrixFunctions>

#include "jcbeat/error.hpp"
#include "jcbeat/ode.hpp"

namespace jcbeat {

namespace {
constexpr double sqrt2 = std::numbers::sqrt2;
constexpr cplx I{0.0, 1.0};

// Coupled block (rho00, rho11, rho22, rho33, Im rho03); Re rho03 and rho12 decouple.
using Block = Eigen::Matrix<double, 5, 5>;
using BlockVec = Eigen::Matrix<double, 5, 1>;

Block coupled_block(const EffectiveParams& e) {
    Block m = Block::Zero();
    const double g3 = e.gamma3();
    m(0, 1) = e.gamma_1;
    m(0, 2) = e.gamma_1;
    m(0, 4) = -2.0 * e.omega;
    m(1, 1) = -e.gamma_1;
    m(1, 3) = e.gamma31;
    m(2, 2) = -e.gamma_1;
    m(2, 3) = e.gamma32;
    m(3, 3) = -g3;
    m(3, 4) = 2.0 * e.omega;
    m(4, 0) = e.omega;
    m(4, 3) = -e.omega;
    m(4, 4) = -0.5 * g3;
    return m;
}

BlockVec to_block(const FourLevelState& s) {
    BlockVec v;
    v << s.rho00, s.rho11, s.rho22, s.rho33, s.rho03.imag();
    return v;
}

} // namespace

double lambda_plus() { return (sqrt2 + 1.0) / 2.0; }
double lambda_minus() { return (sqrt2 - 1.0) / 2.0; }

EffectiveParams effective_params(const SystemParams& params) {
    params.validate();
    if (params.g <= 0.0) throw InvalidArgument("effective model needs g > 0");
    EffectiveParams e;
    const double s = params.eps_d * params.eps_d / params.g; // eps^2 / g
    e.g = params.g;
    e.gamma = params.gamma;
    e.kappa = params.kappa;
    e.detuning = params.detuning();
    e.omega = 2.0 * sqrt2 * s;
    e.delta = {sqrt2 * s, -(20.0 + 19.0 * sqrt2) / 7.0 * s, (20.0 - 19.0 * sqrt2) / 7.0 * s, -sqrt2 * s};
    e.gamma31 = params.gamma / 4.0 + (sqrt2 + 1.0) * (sqrt2 + 1.0) * params.kappa / 2.0;
    e.gamma32 = params.gamma / 4.0 + (sqrt2 - 1.0) * (sqrt2 - 1.0) * params.kappa / 2.0;
    e.gamma_1 = params.gamma / 2.0 + params.kappa;
    e.nu = 2.0 * params.g + e.delta[2] - e.delta[1];

    const double g3 = e.gamma3();
    const double w2 = 4.0 * e.omega * e.omega;
    if (w2 == 0.0) {
        e.p3 = 0.0;
    } else {
        if (e.gamma_1 <= 0.0) throw InvalidArgument("effective model needs kappa > 0 or gamma > 0");
        e.p3 = w2 / (w2 * (2.0 + g3 / e.gamma_1) + g3 * g3);
    }

    std::vector<std::string> issues;
    auto note = [&](auto... parts) {
        std::ostringstream m;
        (m << ... << parts);
        issues.push_back(m.str());
    };
    if (params.eps_d > 0.0 && params.eps_d <= 0.5 * (params.kappa + params.gamma / 2.0))
        note("eps_d = ", params.eps_d, " is below the perturbative window (kappa + gamma/2)/2");
    if (params.eps_d / params.g > 0.15) note("eps_d/g = ", params.eps_d / params.g, " is not small");
    if (e.p3 > 0.24) note("p3 = ", e.p3, " exceeds 0.24");
    if (!issues.empty()) {
        std::string msg = "effective model outside its perturbative regime: " + issues[0];
        for (std::size_t i = 1; i < issues.size(); ++i) msg += "; " + issues[i];
        diag::warn(msg);
    }
    return e;
}

void FourLevelState::validate(double tol) const {
    for (double p : {rho00, rho11, rho22, rho33}) {
        if (!(p >= -tol && p <= 1.0 + tol)) throw InvalidArgument("four-level population outside [0, 1]");
    }
    if (std::abs(population_sum() - 1.0) > tol) throw InvalidArgument("four-level populations do not sum to 1");
    if (std::norm(rho12) > rho11 * rho22 + tol) throw InvalidArgument("|rho12|^2 exceeds rho11 rho22");
    if (std::norm(rho03) > rho00 * rho33 + tol) throw InvalidArgument("|rho03|^2 exceeds rho00 rho33");
}

Eigen::Matrix4cd FourLevelState::to_matrix() const {
    Eigen::Matrix4cd m = Eigen::Matrix4cd::Zero();
    m(0, 0) = rho00;
    m(1, 1) = rho11;
    m(2, 2) = rho22;
    m(3, 3) = rho33;
    m(1, 2) = rho12;
    m(2, 1) = std::conj(rho12);
    m(0, 3) = rho03;
    m(3, 0) = std::conj(rho03);
    return m;
}

FourLevelState FourLevelState::from_matrix(const Eigen::Matrix4cd& m, double tol) {
    const double scale = std::max(1.0, m.cwiseAbs().maxCoeff());
    for (auto [i, j] : {std::pair{0, 1}, {0, 2}, {1, 3}, {2, 3}}) {
        if (std::abs(m(i, j)) > tol * scale || std::abs(m(j, i)) > tol * scale) {
            throw InvalidArgument("state has coherences outside the secular four-level form");
        }
    }
    FourLevelState s;
    s.rho00 = m(0, 0).real();
    s.rho11 = m(1, 1).real();
    s.rho22 = m(2, 2).real();
    s.rho33 = m(3, 3).real();
    s.rho12 = 0.5 * (m(1, 2) + std::conj(m(2, 1)));
    s.rho03 = 0.5 * (m(0, 3) + std::conj(m(3, 0)));
    return s;
}

TransientInit make_transient_init(const FourLevelState& state, const EffectiveParams& eff) {
    TransientInit init;
    init.state = state;
    init.c2 = state.rho33 - state.rho00;
    init.c1 = -eff.p3 * (1.0 + 2.0 * init.c2);
    return init;
}

FourLevelOperators jump_operators_4l() {
    FourLevelOperators ops;
    ops.a = Eigen::Matrix4cd::Zero();
    ops.a(0, 1) = 1.0 / sqrt2;
    ops.a(0, 2) = 1.0 / sqrt2;
    ops.a(1, 3) = lambda_plus();
    ops.a(2, 3) = lambda_minus();
    ops.sigma_minus = Eigen::Matrix4cd::Zero();
    ops.sigma_minus(0, 1) = -1.0 / sqrt2;
    ops.sigma_minus(0, 2) = 1.0 / sqrt2;
    ops.sigma_minus(1, 3) = -0.5;
    ops.sigma_minus(2, 3) = -0.5;
    return ops;
}

FourLevelState steady_state_4l(const EffectiveParams& eff) {
    FourLevelState s;
    const double p3 = eff.p3;
    if (p3 == 0.0) return s;
    s.rho33 = p3;
    s.rho11 = eff.gamma31 / eff.gamma_1 * p3;
    s.rho22 = eff.gamma32 / eff.gamma_1 * p3;
    s.rho00 = 1.0 - s.rho11 - s.rho22 - s.rho33;
    s.rho03 = I * (eff.gamma3() / (2.0 * eff.omega)) * p3;
    return s;
}

std::vector<FourLevelState> evolve_effective(const FourLevelState& init, const EffectiveParams& eff,
                                             std::span<const double> times, double abs_tol) {
    init.validate(1e-10);
    // Variables: coupled block, Re rho03, and rho12 in the frame co-rotating at nu.
    using State = Eigen::Matrix<double, 8, 1>;
    const Block block = coupled_block(eff);
    const double half_g3 = 0.5 * eff.gamma3();
    const double g1 = eff.gamma_1;
    auto rhs = [&](double, const State& y) {
        State dy;
        dy.head<5>() = block * y.head<5>();
        dy(5) = -half_g3 * y(5);
        dy(6) = -g1 * y(6);
        dy(7) = -g1 * y(7);
        return dy;
    };
    State y;
    y.head<5>() = to_block(init);
    y(5) = init.rho03.real();
    y(6) = init.rho12.real();
    y(7) = init.rho12.imag();

    ode::AdaptiveIntegrator<State> integrator({.abs_tol = abs_tol, .initial_step = 1e-3});
    std::vector<FourLevelState> out;
    out.reserve(times.size());
    double t = 0.0;
    for (double target : times) {
        if (target < t) throw InvalidArgument("evolve_effective: times must be non-decreasing and >= 0");
        integrator.advance(rhs, t, y, target);
        FourLevelState s;
        s.rho00 = y(0);
        s.rho11 = y(1);
        s.rho22 = y(2);
        s.rho33 = y(3);
        s.rho03 = cplx(y(5), y(4));
        s.rho12 = cplx(y(6), y(7)) * std::exp(I * (eff.nu * target));
        out.push_back(s);
    }
    return out;
}

TransientSolver::TransientSolver(const EffectiveParams& eff) : eff_(eff) {
    const Block block = coupled_block(eff);
    gen_.setZero();
    // Layout (rho00, rho11, rho22, rho33, Re rho03, Im rho03).
    const std::array<int, 5> idx{0, 1, 2, 3, 5};
    for (int i = 0; i < 5; ++i)
        for (int j = 0; j < 5; ++j) gen_(idx[i], idx[j]) = block(i, j);
    gen_(4, 4) = -0.5 * eff.gamma3();

    Eigen::EigenSolver<Block> es(block);
    const Eigen::Matrix<cplx, 5, 5> v = es.eigenvectors();
    Eigen::JacobiSVD<Eigen::Matrix<cplx, 5, 5>> svd(v);
    const auto sv = svd.singularValues();
    const double cond = sv(0) / sv(4);
    evecs_.setZero();
    evals_.setZero();
    if (!(cond < 1e8)) {
        fallback_ = true;
        std::ostringstream msg;
        msg << "effective generator is (nearly) defective (eigenvector condition " << cond
            << "); using scaling-and-squaring exponential";
        diag::warn(msg.str());
    } else {
        evecs_.topLeftCorner<5, 5>() = v;
        evecs_inv_.setZero();
        evecs_inv_.topLeftCorner<5, 5>() = v.inverse();
    }
    evals_.head<5>() = es.eigenvalues();
    evals_(5) = -0.5 * eff.gamma3();
}

FourLevelState TransientSolver::at(const FourLevelState& init, double tau) const {
    if (tau < 0.0) throw InvalidArgument("transient time must be non-negative");
    BlockVec x;
    if (tau == 0.0) {
        return init;
    }
    if (fallback_) {
        const Block m = (coupled_block(eff_) * tau).exp();
        x = m * to_block(init);
    } else {
        const auto v = evecs_.topLeftCorner<5, 5>();
        const auto vinv = evecs_inv_.topLeftCorner<5, 5>();
        Eigen::Matrix<cplx, 5, 1> c = vinv * to_block(init).cast<cplx>();
        for (int k = 0; k < 5; ++k) c(k) *= std::exp(evals_(k) * tau);
        x = (v * c).real();
    }
    FourLevelState s;
    s.rho00 = x(0);
    s.rho11 = x(1);
    s.rho22 = x(2);
    s.rho33 = x(3);
    s.rho03 = cplx(init.rho03.real() * std::exp(-0.5 * eff_.gamma3() * tau), x(4));
    s.rho12 = init.rho12 * std::exp(cplx(-eff_.gamma_1, eff_.nu) * tau);
    return s;
}

Eigen::Matrix<cplx, 6, 1> TransientSolver::rho33_amplitudes(const FourLevelState& init) const {
    Eigen::Matrix<cplx, 6, 1> amp = Eigen::Matrix<cplx, 6, 1>::Zero();
    if (fallback_) throw NumericalError("mode amplitudes are unavailable for a defective generator");
    const Eigen::Matrix<cplx, 5, 1> c = evecs_inv_.topLeftCorner<5, 5>() * to_block(init).cast<cplx>();
    for (int k = 0; k < 5; ++k) amp(k) = evecs_(3, k) * c(k);
    return amp;
}

FourLevelState analytic_transient(const TransientInit& init, const EffectiveParams& eff, double tau) {
    return TransientSolver(eff).at(init, tau);
}

double photon_number(const FourLevelState& s) {
    return 0.5 * (s.rho11 + s.rho22 + 2.0 * s.rho12.real()) + 1.5 * s.rho33;
}

double atomic_excitation(const FourLevelState& s) {
    return 0.5 * (s.rho11 + s.rho22 - 2.0 * s.rho12.real()) + 0.5 * s.rho33;
}

double flux_ratio(const FourLevelState& s, double gamma, double kappa) {
    const double side = gamma * atomic_excitation(s);
    if (!(side > 1e-15)) {
        throw NumericalError("flux ratio undefined: no side-scattered flux (atom unexcited)");
    }
    return 2.0 * kappa * photon_number(s) / side;
}

void FockCoefficients::validate(double tol) const {
    for (double d : {d0, d1, d2}) {
        if (!(d >= -tol && d <= 1.0 + tol)) throw InvalidArgument("Fock population outside [0, 1]");
    }
    if (std::abs(d0 + d1 + d2 - 1.0) > tol) throw InvalidArgument("Fock populations do not sum to 1");
}

FockCoefficients cavity_coefficients(const FourLevelState& s) {
    const double re12 = s.rho12.real();
    FockCoefficients c;
    c.d0 = s.rho00 + 0.5 * (s.rho11 + s.rho22 - 2.0 * re12);
    c.d1 = 0.5 * (s.rho11 + s.rho22 + 2.0 * re12) + 0.5 * s.rho33;
    c.d2 = 0.5 * s.rho33;
    c.d3 = s.rho03.imag() / sqrt2;
    return c;
}

Vector dressed_state(const HilbertSpec& spec, int which) {
    const double r = 1.0 / sqrt2;
    switch (which) {
    case 0: return basis_state(spec, 0, Atom::lower);
    case 1: return r * (basis_state(spec, 1, Atom::lower) - basis_state(spec, 0, Atom::upper));
    case 2: return r * (basis_state(spec, 1, Atom::lower) + basis_state(spec, 0, Atom::upper));
    case 3: return r * (basis_state(spec, 2, Atom::lower) - basis_state(spec, 1, Atom::upper));
    default: throw InvalidArgument("dressed-state index must be 0..3");
    }
}

namespace {
Eigen::MatrixXcd dressed_basis(const HilbertSpec& spec) {
    Eigen::MatrixXcd v(spec.dim(), 4);
    for (int k = 0; k < 4; ++k) v.col(k) = dressed_state(spec, k);
    return v;
}
} // namespace

Matrix embed(const HilbertSpec& spec, const FourLevelState& s) {
    const auto v = dressed_basis(spec);
    return v * s.to_matrix() * v.adjoint();
}

FourLevelState project(const HilbertSpec& spec, const Matrix& rho, double tol) {
    const auto v = dressed_basis(spec);
    const Eigen::Matrix4cd m = v.adjoint() * rho * v;
    return FourLevelState::from_matrix(m, tol);
}

} // namespace jcbeat
