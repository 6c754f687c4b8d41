#pragma once

// Truncated Fock (x) qubit space of a single cavity mode coupled to a two-level atom.
//
// Basis ordering is (atom (x) cavity) with the atom index slow:
//     index = atom * (N + 1) + n,   atom = 0 for |->, 1 for |+>.
// Matrix dumps use this ordering.

#include <complex>

#include <Eigen/Dense>
#include <Eigen/SparseCore>

namespace jcbeat {

using cplx = std::complex<double>;
using Matrix = Eigen::MatrixXcd;
using Vector = Eigen::VectorXcd;
using SparseMatrix = Eigen::SparseMatrix<cplx>;

enum class Atom : int { lower = 0, upper = 1 };

class HilbertSpec {
public:
    explicit HilbertSpec(int n_trunc);

    int n_trunc() const { return n_trunc_; }
    int fock_dim() const { return n_trunc_ + 1; }
    int dim() const { return 2 * (n_trunc_ + 1); }
    Eigen::Index index(Atom atom, int n) const {
        return static_cast<Eigen::Index>(atom) * fock_dim() + n;
    }
    // Photon number and atomic excitation of a basis index.
    int photons(Eigen::Index i) const { return static_cast<int>(i % fock_dim()); }
    bool excited(Eigen::Index i) const { return i >= fock_dim(); }

    bool operator==(const HilbertSpec&) const = default;

private:
    int n_trunc_;
};

struct OperatorSet {
    Matrix a;
    Matrix a_dag;
    Matrix sigma_minus;
    Matrix sigma_plus;
    Matrix number;     // a^dag a
    Matrix excitation; // sigma_+ sigma_-
    Matrix identity;
};

OperatorSet build_operators(const HilbertSpec& spec);

// |n, atom>
Vector basis_state(const HilbertSpec& spec, int n, Atom atom);

// Hermitian, unit-trace, positive (within numerical slack) state on the full space.
class DensityMatrix {
public:
    static constexpr double hermiticity_tol = 1e-12;
    static constexpr double trace_tol = 1e-10;
    static constexpr double positivity_tol = 1e-9;

    // Validates the invariants; throws InvalidArgument on violation.
    explicit DensityMatrix(Matrix entries);
    static DensityMatrix pure(const Vector& psi);

    const Matrix& matrix() const { return entries_; }
    Eigen::Index dim() const { return entries_.rows(); }

private:
    Matrix entries_;
};

// Reduced state of the cavity field, dimension N + 1.
class CavityDensityMatrix {
public:
    explicit CavityDensityMatrix(Matrix entries);

    const Matrix& matrix() const { return entries_; }
    Eigen::Index dim() const { return entries_.rows(); }

private:
    Matrix entries_;
};

// Checks used by both density-matrix types and by the integrators.
double hermiticity_defect(const Matrix& m); // max |m - m^H| / max(1, max |m|)
double min_eigenvalue(const Matrix& m);     // of the Hermitian part

cplx expectation(const Matrix& op, const Matrix& rho);
cplx expectation(const Matrix& op, const DensityMatrix& rho);

// <m|rho_c|n> = <m,+|rho|n,+> + <m,-|rho|n,->
CavityDensityMatrix reduce_to_cavity(const DensityMatrix& rho);
Matrix reduce_to_cavity(const Matrix& rho);

} // namespace jcbeat
