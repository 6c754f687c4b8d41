#include "jcbeat/lindblad.hpp"

#include <cmath>
#include <numbers>
#include <sstream>
#include <vector>

#include <Eigen/SparseLU>

#include "jcbeat/error.hpp"

namespace jcbeat {

namespace {
constexpr cplx I{0.0, 1.0};
}

std::string to_string(DetuningMode mode) {
    switch (mode) {
    case DetuningMode::two_photon_shifted: return "two_photon_shifted";
    case DetuningMode::two_photon_bare: return "two_photon_bare";
    case DetuningMode::vacuum_rabi: return "vacuum_rabi";
    case DetuningMode::explicit_value: return "explicit";
    }
    return "unknown";
}

DetuningMode detuning_mode_from_string(const std::string& name) {
    if (name == "two_photon_shifted") return DetuningMode::two_photon_shifted;
    if (name == "two_photon_bare") return DetuningMode::two_photon_bare;
    if (name == "vacuum_rabi") return DetuningMode::vacuum_rabi;
    if (name == "explicit") return DetuningMode::explicit_value;
    throw InvalidArgument("unknown detuning mode '" + name + "'");
}

double SystemParams::detuning() const {
    switch (detuning_mode) {
    case DetuningMode::two_photon_shifted:
        if (g <= 0.0) throw InvalidArgument("the drive-shifted two-photon detuning needs g > 0");
        return -g / std::numbers::sqrt2 - std::numbers::sqrt2 * eps_d * eps_d / g;
    case DetuningMode::two_photon_bare: return -g / std::numbers::sqrt2;
    case DetuningMode::vacuum_rabi: return -g;
    case DetuningMode::explicit_value: return explicit_detuning;
    }
    return 0.0;
}

void SystemParams::validate() const {
    auto check = [](double v, const char* name) {
        if (!std::isfinite(v) || v < 0.0) {
            throw InvalidArgument(std::string(name) + " must be finite and non-negative");
        }
    };
    check(g, "g");
    check(kappa, "kappa");
    check(gamma, "gamma");
    check(eps_d, "eps_d");
    if (!std::isfinite(explicit_detuning)) throw InvalidArgument("detuning must be finite");
    (void)detuning();
}

std::uint64_t fnv1a(const void* data, std::size_t size, std::uint64_t h) {
    const auto* bytes = static_cast<const unsigned char*>(data);
    for (std::size_t k = 0; k < size; ++k) {
        h ^= bytes[k];
        h *= 0x100000001b3ULL;
    }
    return h;
}

std::uint64_t fingerprint(const SystemParams& params) {
    const double explicit_part = params.detuning_mode == DetuningMode::explicit_value ? params.explicit_detuning : 0.0;
    const double fields[] = {params.g, params.kappa, params.gamma, params.eps_d, explicit_part};
    std::uint64_t h = fnv1a(fields, sizeof fields);
    const std::int32_t ints[] = {static_cast<std::int32_t>(params.detuning_mode), params.spec.n_trunc()};
    return fnv1a(ints, sizeof ints, h);
}

Matrix rotating_frame_hamiltonian(const SystemParams& params) {
    params.validate();
    const auto ops = build_operators(params.spec);
    const double dw = params.detuning();
    Matrix h = -dw * (ops.excitation + ops.number);
    h += params.g * (ops.a * ops.sigma_plus + ops.a_dag * ops.sigma_minus);
    h += params.eps_d * (ops.a + ops.a_dag);
    return h;
}

Liouvillian::Liouvillian(const SystemParams& params)
    : params_(params), ops_(build_operators(params.spec)), h_(rotating_frame_hamiltonian(params)) {
    jump_a_ = std::sqrt(2.0 * params.kappa) * ops_.a;
    jump_sigma_ = std::sqrt(params.gamma) * ops_.sigma_minus;
    h_nh_ = h_ - I * (params.kappa * ops_.number + 0.5 * params.gamma * ops_.excitation);
}

Matrix Liouvillian::apply(const Matrix& rho) const {
    if (rho.rows() != h_.rows() || rho.cols() != h_.cols()) {
        throw InvalidArgument("state dimension does not match the Liouvillian");
    }
    Matrix out = -I * (h_nh_ * rho);
    out += I * (rho * h_nh_.adjoint());
    out.noalias() += jump_a_ * rho * jump_a_.adjoint();
    out.noalias() += jump_sigma_ * rho * jump_sigma_.adjoint();
    return out;
}

SparseMatrix Liouvillian::sparse_superoperator() const {
    const auto d = h_.rows();
    std::vector<Eigen::Triplet<cplx>> entries;
    // vec(A X B) = (B^T (x) A) vec(X), column-major.
    auto kron = [&](const Matrix& bt, const Matrix& a) {
        for (Eigen::Index j = 0; j < d; ++j) {
            for (Eigen::Index l = 0; l < d; ++l) {
                const cplx b = bt(j, l);
                if (b == cplx(0.0)) continue;
                for (Eigen::Index i = 0; i < d; ++i) {
                    for (Eigen::Index k = 0; k < d; ++k) {
                        if (a(i, k) != cplx(0.0)) entries.emplace_back(j * d + i, l * d + k, b * a(i, k));
                    }
                }
            }
        }
    };
    const Matrix id = Matrix::Identity(d, d);
    kron(id, -I * h_nh_);
    kron(I * h_nh_.conjugate(), id);
    kron(jump_a_.conjugate(), jump_a_);
    kron(jump_sigma_.conjugate(), jump_sigma_);
    SparseMatrix sup(d * d, d * d);
    sup.setFromTriplets(entries.begin(), entries.end());
    return sup;
}

Matrix Liouvillian::superoperator() const {
    return Matrix(sparse_superoperator());
}

Matrix liouvillian_rhs(const SystemParams& params, const Matrix& rho) {
    return Liouvillian(params).apply(rho);
}

double truncation_population(const HilbertSpec& spec, const Matrix& rho, bool warn) {
    double pop = 0.0;
    for (Eigen::Index i = 0; i < rho.rows(); ++i) {
        if (spec.photons(i) >= spec.n_trunc() - 2) pop += rho(i, i).real();
    }
    if (warn && pop > 1e-6) {
        std::ostringstream msg;
        msg << "population " << pop << " in Fock levels n >= " << spec.n_trunc() - 2
            << "; the photon cutoff N = " << spec.n_trunc() << " may be too small";
        diag::warn(msg.str());
    }
    return pop;
}

namespace {

DensityMatrix tidy_output(Matrix rho, double tau, const EvolveOptions& options) {
    const double herm = hermiticity_defect(rho);
    rho = 0.5 * (rho + rho.adjoint()).eval();
    const cplx tr = rho.trace();
    const double trace_dev = std::abs(tr - cplx(1.0));
    rho /= tr.real();
    if (herm > options.correction_log || trace_dev > options.correction_log) {
        std::ostringstream msg;
        msg << "evolve: corrected Hermiticity defect " << herm << " and trace deviation " << trace_dev
            << " at tau = " << tau;
        diag::warn(msg.str());
    }
    try {
        return DensityMatrix(std::move(rho));
    } catch (const InvalidArgument& e) {
        std::ostringstream msg;
        msg << "evolve: state at tau = " << tau << " is no longer a valid density matrix (" << e.what()
            << ")";
        throw NumericalError(msg.str());
    }
}

} // namespace

EvolutionResult evolve(const Liouvillian& generator, const DensityMatrix& rho0,
                       std::span<const double> times, const EvolveOptions& options) {
    if (rho0.dim() != generator.hamiltonian().rows()) {
        throw InvalidArgument("initial state dimension does not match the system");
    }
    EvolutionResult result;
    result.times.push_back(0.0);
    result.states.push_back(rho0);
    double prev = 0.0;
    for (std::size_t k = 0; k < times.size(); ++k) {
        const bool leading_zero = k == 0 && times[k] == 0.0;
        if (!std::isfinite(times[k]) || times[k] < 0.0 || (!leading_zero && times[k] <= prev)) {
            throw InvalidArgument("evolve: output times must be non-negative and strictly increasing");
        }
        prev = times[k];
    }

    ode::AdaptiveIntegrator<Matrix> integrator({.abs_tol = options.abs_tol, .initial_step = options.initial_step});
    auto rhs = [&generator](double, const Matrix& rho) { return generator.apply(rho); };
    Matrix rho = rho0.matrix();
    double t = 0.0;
    for (double target : times) {
        if (target == 0.0) continue;
        integrator.advance(rhs, t, rho, target);
        auto out = tidy_output(rho, target, options);
        rho = out.matrix();
        result.times.push_back(target);
        result.states.push_back(std::move(out));
    }
    return result;
}

EvolutionResult evolve(const SystemParams& params, const DensityMatrix& rho0, std::span<const double> times,
                       const EvolveOptions& options) {
    return evolve(Liouvillian(params), rho0, times, options);
}

DensityMatrix steady_state(const SystemParams& params, SteadyStateInfo* info) {
    params.validate();
    if (params.kappa <= 0.0 && params.gamma <= 0.0) {
        throw InvalidArgument("steady state needs kappa > 0 or gamma > 0");
    }
    const Liouvillian gen(params);
    const auto d = gen.hamiltonian().rows();
    const auto n = d * d;

    // Bordered system: the equation for rho_00 is replaced by tr(rho) = 1.
    SparseMatrix sys = gen.sparse_superoperator();
    sys.prune([](Eigen::Index row, Eigen::Index, const cplx&) { return row != 0; });
    for (Eigen::Index k = 0; k < d; ++k) sys.coeffRef(0, k * d + k) = 1.0;
    sys.makeCompressed();
    Eigen::SparseLU<SparseMatrix> lu;
    lu.compute(sys);
    if (lu.info() != Eigen::Success) {
        throw NumericalError("steady state: Liouvillian null space is degenerate (" + lu.lastErrorMessage() + ")");
    }

    Vector rhs = Vector::Zero(n);
    rhs(0) = 1.0;
    Vector x = lu.solve(rhs);
    auto as_matrix = [d](const Vector& v) { return Eigen::Map<const Matrix>(v.data(), d, d); };

    double residual = 0.0;
    for (int refine = 0; refine < 4; ++refine) {
        const Matrix rho = as_matrix(x);
        const Matrix lrho = gen.apply(rho);
        residual = lrho.cwiseAbs().maxCoeff();
        if (residual <= 1e-12) break;
        Vector r = -Eigen::Map<const Vector>(lrho.data(), n);
        r(0) = 1.0 - rho.trace();
        x += lu.solve(r);
    }

    Matrix rho = as_matrix(x);
    rho = 0.5 * (rho + rho.adjoint()).eval();
    rho /= rho.trace().real();
    residual = gen.apply(rho).cwiseAbs().maxCoeff();
    if (!(residual <= 1e-10)) {
        std::ostringstream msg;
        msg << "steady state: residual " << residual << " exceeds 1e-10";
        throw NumericalError(msg.str());
    }
    const double trunc = truncation_population(params.spec, rho);
    if (info) *info = {residual, trunc};
    try {
        return DensityMatrix(std::move(rho));
    } catch (const InvalidArgument& e) {
        throw NumericalError(std::string("steady state is not a valid density matrix: ") + e.what());
    }
}

G2Result g2_forward(const SystemParams& params, const DensityMatrix& rho_ss, std::span<const double> tau_grid,
                    const EvolveOptions& options) {
    if (tau_grid.empty() || tau_grid.front() != 0.0) {
        throw InvalidArgument("g2 delay grid must start at tau = 0");
    }
    const Liouvillian gen(params);
    const auto& ops = gen.operators();
    const double n_ss = expectation(ops.number, rho_ss).real();
    if (!(n_ss >= 1e-12)) {
        throw NumericalError("g2: steady-state photon number below 1e-12, nothing to condition on");
    }
    const Matrix cond = ops.a * rho_ss.matrix() * ops.a_dag;
    const double weight = cond.trace().real();
    const DensityMatrix rho_cond(0.5 * (cond + cond.adjoint()) / weight);

    const auto evo = evolve(gen, rho_cond, tau_grid.subspan(1), options);
    G2Result out;
    out.n_ss = n_ss;
    for (std::size_t k = 0; k < evo.times.size(); ++k) {
        out.tau.push_back(evo.times[k]);
        out.g2.push_back(expectation(ops.number, evo.states[k]).real() * weight / (n_ss * n_ss));
    }
    return out;
}

G2Result g2_forward(const SystemParams& params, std::span<const double> tau_grid, const EvolveOptions& options) {
    return g2_forward(params, steady_state(params), tau_grid, options);
}

} // namespace jcbeat
