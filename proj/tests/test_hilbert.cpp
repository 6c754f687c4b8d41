#include <doctest.h>

#include <cmath>
#include <random>

#include "jcbeat/error.hpp"
#include "jcbeat/four_level.hpp"
#include "jcbeat/hilbert.hpp"

using namespace jcbeat;

namespace {

Matrix random_hermitian(int d, std::mt19937_64& rng) {
    std::normal_distribution<double> n;
    Matrix m(d, d);
    for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j) m(i, j) = cplx(n(rng), n(rng));
    return 0.5 * (m + m.adjoint());
}

Matrix random_state(int d, std::mt19937_64& rng) {
    std::normal_distribution<double> n;
    Matrix m(d, d);
    for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j) m(i, j) = cplx(n(rng), n(rng));
    Matrix r = m * m.adjoint();
    return r / r.trace().real();
}

} // namespace

TEST_CASE("spec dimension and ordering") {
    HilbertSpec s(5);
    CHECK(s.dim() == 12);
    CHECK(s.index(Atom::upper, 2) == 8);
    CHECK(s.photons(8) == 2);
    CHECK(s.excited(8));
    CHECK_THROWS_AS(HilbertSpec(1), InvalidArgument);
}

TEST_CASE("ladder operators") {
    HilbertSpec s(2);
    auto ops = build_operators(s);
    CHECK(ops.a(s.index(Atom::lower, 1), s.index(Atom::lower, 2)) == cplx(std::sqrt(2.0)));
    CHECK(ops.a(s.index(Atom::upper, 1), s.index(Atom::upper, 2)) == cplx(std::sqrt(2.0)));
    CHECK(ops.a_dag == ops.a.adjoint());
    CHECK(ops.sigma_plus == ops.sigma_minus.adjoint());
    CHECK(ops.sigma_minus(s.index(Atom::lower, 1), s.index(Atom::upper, 1)) == cplx(1.0));

    HilbertSpec big(8);
    auto b = build_operators(big);
    Matrix comm = b.a * b.a_dag - b.a_dag * b.a;
    for (int atom = 0; atom < 2; ++atom)
        for (int n = 0; n < big.n_trunc(); ++n) {
            auto i = big.index(static_cast<Atom>(atom), n);
            CHECK(std::abs(comm(i, i) - 1.0) < 1e-14);
        }
    auto top = big.index(Atom::lower, big.n_trunc());
    CHECK(std::abs(comm(top, top) - 1.0) > 0.5);

    Eigen::SelfAdjointEigenSolver<Matrix> es(b.excitation);
    for (double ev : es.eigenvalues()) CHECK((std::abs(ev) < 1e-14 || std::abs(ev - 1.0) < 1e-14));
}

TEST_CASE("expectation values") {
    HilbertSpec s(4);
    auto ops = build_operators(s);
    auto vac = DensityMatrix::pure(basis_state(s, 0, Atom::lower));
    CHECK(std::abs(expectation(ops.number, vac)) < 1e-15);
    auto one = DensityMatrix::pure(basis_state(s, 1, Atom::lower));
    CHECK(std::abs(expectation(ops.number, one) - 1.0) < 1e-15);
    CHECK_THROWS_AS(expectation(Matrix::Identity(3, 3), vac), InvalidArgument);

    SystemParams p;
    p.g = 500;
    p.gamma = 1;
    p.kappa = 0.5;
    p.eps_d = 0.0;
    // p3 = 0.2475 embedded in the full space
    const double p3 = 0.2475;
    FourLevelState ss;
    ss.rho33 = p3;
    ss.rho11 = (1.0 / 4 + std::pow(std::sqrt(2.0) + 1, 2) / 4) * p3;
    ss.rho22 = 2 * p3 - ss.rho11;
    ss.rho00 = 1 - 3 * p3;
    ss.rho03 = cplx(0, std::sqrt(p3 * (1 - 4 * p3)));
    DensityMatrix rho(embed(HilbertSpec(35), ss));
    auto big = build_operators(HilbertSpec(35));
    CHECK(std::abs(expectation(big.number, rho) - 0.61875) < 1e-14);
}

TEST_CASE("expectation is linear and real for Hermitian operators") {
    std::mt19937_64 rng(7);
    for (int k = 0; k < 10; ++k) {
        Matrix h1 = random_hermitian(8, rng), h2 = random_hermitian(8, rng);
        Matrix r1 = random_state(8, rng), r2 = random_state(8, rng);
        cplx lhs = expectation(2.0 * h1 - 0.5 * h2, r1);
        cplx rhs = 2.0 * expectation(h1, r1) - 0.5 * expectation(h2, r1);
        CHECK(std::abs(lhs - rhs) < 1e-12);
        lhs = expectation(h1, Matrix(0.3 * r1 + 0.7 * r2));
        rhs = 0.3 * expectation(h1, r1) + 0.7 * expectation(h1, r2);
        CHECK(std::abs(lhs - rhs) < 1e-12);
        CHECK(std::abs(expectation(h1, r1).imag()) < 1e-12);
        CHECK(std::abs(expectation(h1, r1) - (r1 * h1).trace()) < 1e-12);
    }
}

TEST_CASE("density matrix validation") {
    Matrix m = Matrix::Zero(6, 6);
    m(0, 0) = 0.5;
    CHECK_THROWS_AS(DensityMatrix{m}, InvalidArgument);
    m(1, 1) = 0.5;
    m(0, 1) = 0.1;
    CHECK_THROWS_AS(DensityMatrix{m}, InvalidArgument);
    m(1, 0) = 0.1;
    CHECK_NOTHROW(DensityMatrix{m});
    m(0, 1) = m(1, 0) = 0.7;
    CHECK_THROWS_AS(DensityMatrix{m}, InvalidArgument);
}

TEST_CASE("partial trace over the atom") {
    HilbertSpec s(3);
    auto r = reduce_to_cavity(DensityMatrix::pure(basis_state(s, 0, Atom::upper)));
    CHECK(std::abs(r.matrix()(0, 0) - 1.0) < 1e-15);
    CHECK(std::abs(r.matrix().trace() - 1.0) < 1e-15);

    // Independent expansion of xi1 = (|1,-> - |0,+>)/sqrt2.
    Vector xi1 = (basis_state(s, 1, Atom::lower) - basis_state(s, 0, Atom::upper)) / std::sqrt(2.0);
    Matrix rc = reduce_to_cavity(Matrix(xi1 * xi1.adjoint()));
    Matrix expect = Matrix::Zero(4, 4);
    expect(0, 0) = expect(1, 1) = 0.5;
    CHECK((rc - expect).cwiseAbs().maxCoeff() < 1e-15);

    Vector xi0 = basis_state(s, 0, Atom::lower);
    Vector xi3 = (basis_state(s, 2, Atom::lower) - basis_state(s, 1, Atom::upper)) / std::sqrt(2.0);
    rc = reduce_to_cavity(Matrix(xi0 * xi3.adjoint()));
    expect.setZero();
    expect(0, 2) = 1.0 / std::sqrt(2.0);
    CHECK((rc - expect).cwiseAbs().maxCoeff() < 1e-15);

    std::mt19937_64 rng(3);
    for (int k = 0; k < 5; ++k) {
        Matrix h = random_state(s.dim(), rng);
        Matrix c = reduce_to_cavity(h);
        CHECK(std::abs(c.trace() - h.trace()) < 1e-13);
        CHECK(hermiticity_defect(c) < 1e-15);
    }
}
