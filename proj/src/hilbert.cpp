#include "jcbeat/hilbert.hpp"

#include <cmath>
#include <string>
#include <utility>

#include "jcbeat/error.hpp"

namespace jcbeat {

HilbertSpec::HilbertSpec(int n_trunc) : n_trunc_(n_trunc) {
    // Two-photon physics needs the n = 2 Fock state.
    if (n_trunc < 2) {
        throw InvalidArgument("photon cutoff must be at least 2, got " + std::to_string(n_trunc));
    }
}

OperatorSet build_operators(const HilbertSpec& spec) {
    const auto d = spec.dim();
    OperatorSet ops;
    ops.a = Matrix::Zero(d, d);
    ops.sigma_minus = Matrix::Zero(d, d);
    for (int atom = 0; atom < 2; ++atom) {
        const auto at = static_cast<Atom>(atom);
        for (int n = 1; n <= spec.n_trunc(); ++n) {
            ops.a(spec.index(at, n - 1), spec.index(at, n)) = std::sqrt(static_cast<double>(n));
        }
    }
    for (int n = 0; n <= spec.n_trunc(); ++n) {
        ops.sigma_minus(spec.index(Atom::lower, n), spec.index(Atom::upper, n)) = 1.0;
    }
    ops.a_dag = ops.a.adjoint();
    ops.sigma_plus = ops.sigma_minus.adjoint();
    ops.number = ops.a_dag * ops.a;
    ops.excitation = ops.sigma_plus * ops.sigma_minus;
    ops.identity = Matrix::Identity(d, d);
    return ops;
}

Vector basis_state(const HilbertSpec& spec, int n, Atom atom) {
    if (n < 0 || n > spec.n_trunc()) {
        throw InvalidArgument("Fock index " + std::to_string(n) + " outside the truncated space");
    }
    Vector v = Vector::Zero(spec.dim());
    v(spec.index(atom, n)) = 1.0;
    return v;
}

double hermiticity_defect(const Matrix& m) {
    const double scale = std::max(1.0, m.cwiseAbs().maxCoeff());
    return (m - m.adjoint()).cwiseAbs().maxCoeff() / scale;
}

double min_eigenvalue(const Matrix& m) {
    const Matrix h = 0.5 * (m + m.adjoint());
    Eigen::SelfAdjointEigenSolver<Matrix> es(h, Eigen::EigenvaluesOnly);
    return es.eigenvalues().minCoeff();
}

namespace {

void check_state(const Matrix& m, const char* what) {
    if (m.rows() != m.cols() || m.rows() == 0) {
        throw InvalidArgument(std::string(what) + " must be a non-empty square matrix");
    }
    if (hermiticity_defect(m) > DensityMatrix::hermiticity_tol) {
        throw InvalidArgument(std::string(what) + " is not Hermitian");
    }
    if (std::abs(m.trace() - cplx(1.0)) > DensityMatrix::trace_tol) {
        throw InvalidArgument(std::string(what) + " does not have unit trace");
    }
    if (min_eigenvalue(m) < -DensityMatrix::positivity_tol) {
        throw InvalidArgument(std::string(what) + " has a negative eigenvalue");
    }
}

} // namespace

DensityMatrix::DensityMatrix(Matrix entries) : entries_(std::move(entries)) {
    check_state(entries_, "density matrix");
}

DensityMatrix DensityMatrix::pure(const Vector& psi) {
    const double norm = psi.norm();
    if (norm == 0.0) {
        throw InvalidArgument("cannot build a density matrix from the zero vector");
    }
    const Vector u = psi / norm;
    return DensityMatrix(u * u.adjoint());
}

CavityDensityMatrix::CavityDensityMatrix(Matrix entries) : entries_(std::move(entries)) {
    check_state(entries_, "cavity density matrix");
}

cplx expectation(const Matrix& op, const Matrix& rho) {
    if (op.rows() != rho.rows() || op.cols() != rho.cols() || op.rows() != op.cols()) {
        throw InvalidArgument("operator and state dimensions differ");
    }
    // tr(rho op) = sum_ij rho_ij op_ji
    return (rho.transpose().cwiseProduct(op)).sum();
}

cplx expectation(const Matrix& op, const DensityMatrix& rho) {
    return expectation(op, rho.matrix());
}

Matrix reduce_to_cavity(const Matrix& rho) {
    if (rho.rows() != rho.cols() || rho.rows() % 2 != 0 || rho.rows() < 6) {
        throw InvalidArgument("state dimension is not 2(N+1) with N >= 2");
    }
    const auto f = rho.rows() / 2;
    return rho.topLeftCorner(f, f) + rho.bottomRightCorner(f, f);
}

CavityDensityMatrix reduce_to_cavity(const DensityMatrix& rho) {
    return CavityDensityMatrix(reduce_to_cavity(rho.matrix()));
}

} // namespace jcbeat
