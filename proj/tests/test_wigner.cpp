#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>
#include <sstream>

#include "jcbeat/conditioning.hpp"
#include "jcbeat/error.hpp"
#include "jcbeat/wigner.hpp"

using namespace jcbeat;

namespace {

constexpr double two_pi_inv = 2.0 / std::numbers::pi;

EffectiveParams fig2_params() {
    const double p3 = 0.2475;
    const double omega = std::sqrt(p3 / (1 - 4 * p3));
    SystemParams p;
    p.g = 500;
    p.gamma = 1;
    p.kappa = 0.5;
    p.eps_d = std::sqrt(omega * p.g / (2 * std::numbers::sqrt2));
    return effective_params(p);
}

CavityDensityMatrix fock(int n, int cutoff) {
    Matrix m = Matrix::Zero(cutoff + 1, cutoff + 1);
    m(n, n) = 1.0;
    return CavityDensityMatrix(m);
}

FourLevelState random_state(std::mt19937_64& rng) {
    std::uniform_real_distribution<double> u(0, 1);
    double w[4];
    double sum = 0;
    for (double& x : w) sum += (x = u(rng));
    FourLevelState s;
    s.rho00 = w[0] / sum;
    s.rho11 = w[1] / sum;
    s.rho22 = w[2] / sum;
    s.rho33 = w[3] / sum;
    s.rho12 = std::polar(u(rng) * std::sqrt(s.rho11 * s.rho22), 6.3 * u(rng));
    s.rho03 = cplx(0.0, (2 * u(rng) - 1) * std::sqrt(s.rho00 * s.rho33));
    return s;
}

} // namespace

TEST_CASE("closed form at the origin") {
    CHECK(wigner_point({1, 0, 0, 0}, 0.0) == doctest::Approx(two_pi_inv).epsilon(1e-15));
    CHECK(wigner_point({0, 1, 0, 0}, 0.0) == doctest::Approx(-two_pi_inv).epsilon(1e-15));
    auto e = fig2_params();
    auto c = cavity_coefficients(steady_state_4l(e));
    CHECK(wigner_point(c, 0.0) == doctest::Approx(0.16392).epsilon(1e-5 / 0.16392));
    CHECK(wigner_point(c, 0.0) == doctest::Approx(two_pi_inv * (1 - 3 * e.p3)).epsilon(1e-14));

    std::mt19937_64 rng(2);
    for (int k = 0; k < 20; ++k) {
        auto s = random_state(rng);
        auto d = cavity_coefficients(s);
        CHECK(wigner_point(d, 0.0) == two_pi_inv * (d.d0 - d.d1 + d.d2));
        CHECK(wigner_origin(s) == wigner_point(d, 0.0));
        for (cplx a : {cplx(0.3, -0.7), cplx(-1.1, 0.2)}) CHECK(wigner_point(d, a) == wigner_point(d, -a));
    }
}

TEST_CASE("steady-state form and bimodality") {
    auto e = fig2_params();
    auto c = cavity_coefficients(steady_state_4l(e));
    CHECK(c.d3 > 0);
    for (double x : {0.2, 0.5, 0.9, 1.4}) {
        CHECK(wigner_point(c, cplx(x, -x)) > wigner_point(c, cplx(x, x)));
        CHECK(wigner_point(c, cplx(-x, x)) > wigner_point(c, cplx(-x, -x)));
    }
    for (cplx a : {cplx(0, 0), cplx(0.4, -0.3), cplx(-1.2, 0.8), cplx(2, 2)}) {
        CHECK(std::abs(wigner_ss_point(e.p3, e.gamma / e.omega, a) - wigner_point(c, a)) < 1e-14);
        CHECK(wigner_ss_point(0.0, 1.0, a) == doctest::Approx(two_pi_inv * std::exp(-2 * std::norm(a))));
    }
    CHECK(wigner_ss_point(e.p3, e.gamma / e.omega, 0.0) == doctest::Approx(0.16392).epsilon(1e-4));
    CHECK_THROWS_AS(wigner_ss_point(0.3, 1.0, 0.0), InvalidArgument);
}

TEST_CASE("origin transients") {
    auto e = fig2_params();
    TransientSolver solver(e);
    ChannelRates rates{e.kappa, e.gamma, 1.0};
    auto ss = steady_state_4l(e);
    auto fwd = apply_jump(EmissionChannel::forward, ss, rates).state;
    auto w_fwd = [&](double t) { return wigner_origin(solver.at(fwd, t)); };
    auto min_fwd = locate_global_minimum(w_fwd, 0.0, 1.0);
    CHECK(min_fwd.tau == doctest::Approx(0.3297).epsilon(0.002 / 0.3297));

    auto two = apply_jump(EmissionChannel::two_photon, ss, rates).state;
    std::vector<FourLevelState> series;
    for (int k = 0; k <= 2000; ++k) series.push_back(solver.at(two, 1e-3 * k));
    auto w = wigner_origin_series(series);
    CHECK(w.front() == doctest::Approx(two_pi_inv).epsilon(1e-15));
    CHECK(*std::min_element(w.begin(), w.end()) > min_fwd.value);

    auto side = apply_jump(EmissionChannel::side, ss, rates).state;
    auto w_side = [&](double t) { return wigner_origin(solver.at(side, t)); };
    auto min_side = locate_global_minimum(w_side, 0.0, 1.0);
    auto max_side = locate_next_local_maximum(w_side, min_side.tau, 1.0);
    REQUIRE(max_side);
    CHECK(max_side->tau > min_side.tau);
    CHECK(max_side->tau - min_side.tau < 2 * std::numbers::pi / e.nu);
}

TEST_CASE("extremum search") {
    auto f = [](double t) { return std::cos(2 * std::numbers::pi * t); };
    auto m = locate_global_minimum(f, 0.0, 1.0, 1e-3);
    CHECK(m.tau == doctest::Approx(0.5).epsilon(1e-6));
    CHECK(m.value == doctest::Approx(-1.0).epsilon(1e-12));
    auto x = locate_next_local_maximum(f, 0.5, 2.0, 1e-3);
    REQUIRE(x);
    CHECK(x->tau == doctest::Approx(1.0).epsilon(1e-6));
    auto y = locate_next_local_minimum(f, 0.5, 2.0, 1e-3);
    REQUIRE(y);
    CHECK(y->tau == doctest::Approx(1.5).epsilon(1e-6));
    CHECK_FALSE(locate_next_local_maximum(f, 0.5, 0.9, 1e-3));
}

TEST_CASE("displaced parity against closed forms") {
    DisplacedParity vac(fock(0, 4), 3.0);
    DisplacedParity one(fock(1, 4), 3.0);
    double worst0 = 0, worst1 = 0;
    for (double x = -2.1; x <= 2.1; x += 0.3)
        for (double y = -2.1; y <= 2.1; y += 0.3) {
            const double r2 = x * x + y * y;
            worst0 = std::max(worst0, std::abs(vac(cplx(x, y)) - two_pi_inv * std::exp(-2 * r2)));
            worst1 = std::max(worst1, std::abs(one(cplx(x, y)) - two_pi_inv * std::exp(-2 * r2) * (4 * r2 - 1)));
        }
    CHECK(worst0 < 1e-10);
    CHECK(worst1 < 1e-10);

    std::mt19937_64 rng(9);
    HilbertSpec spec(6);
    double worst = 0;
    for (int k = 0; k < 20; ++k) {
        auto s = random_state(rng);
        auto c = cavity_coefficients(s);
        DisplacedParity w(reduce_to_cavity(DensityMatrix(embed(spec, s))), 2.5);
        for (cplx a : {cplx(0, 0), cplx(0.3, 0.4), cplx(-1.0, 0.7), cplx(1.5, -1.5)})
            worst = std::max(worst, std::abs(w(a) - wigner_point(c, a)));
    }
    CHECK(worst < 1e-10);

    auto e = fig2_params();
    HilbertSpec big(35);
    DisplacedParity w_ss(reduce_to_cavity(DensityMatrix(embed(big, steady_state_4l(e)))), 2.5);
    worst = 0;
    for (cplx a : {cplx(0, 0), cplx(0.5, -0.5), cplx(-1.2, 0.3), cplx(1.7, 1.7)})
        worst = std::max(worst, std::abs(w_ss(a) - wigner_ss_point(e.p3, e.gamma / e.omega, a)));
    CHECK(worst < 1e-10);

    WignerOptions tight;
    tight.extra_cutoff = -20;
    DisplacedParity small(fock(0, 2), 3.0, tight);
    CHECK_THROWS_AS(small(cplx(3.0, 0.0)), NumericalError);
    CHECK_THROWS_AS(vac(cplx(4.0, 0.0)), InvalidArgument);
}

TEST_CASE("grid normalization and symmetry") {
    auto g = GridSpec::square(4.0, 0.02);
    CHECK(g.nx == 401);
    auto e = fig2_params();
    std::mt19937_64 rng(4);
    std::vector<FockCoefficients> cases{{1, 0, 0, 0}, {0, 1, 0, 0}, {0, 0, 1, 0},
                                        cavity_coefficients(steady_state_4l(e))};
    for (int k = 0; k < 4; ++k) cases.push_back(cavity_coefficients(random_state(rng)));
    for (const auto& c : cases) {
        CHECK(std::abs(c.d0 + c.d1 + c.d2 - 1.0) < 1e-12);
        auto grid = wigner_grid(c, g);
        CHECK(std::abs(grid.integral() - 1.0) < 1e-6);
        for (int j = 0; j < g.ny; j += 37)
            for (int i = 0; i < g.nx; i += 41)
                CHECK(std::abs(grid.at(i, j) - grid.at(g.nx - 1 - i, g.ny - 1 - j)) < 1e-13 * std::abs(grid.at(i, j)) + 1e-300);
    }
    CHECK(wigner_grid(cases[0], g).truncation_bound() < 1e-6);
}

TEST_CASE("serial and parallel grids are identical") {
    auto e = fig2_params();
    auto c = cavity_coefficients(steady_state_4l(e));
    auto g = GridSpec::square(2.5, 0.05);
    auto a = wigner_grid(c, g, Execution::serial);
    auto b = wigner_grid(c, g, Execution::parallel);
    CHECK(a.values == b.values);

    HilbertSpec spec(10);
    auto rc = reduce_to_cavity(DensityMatrix(embed(spec, steady_state_4l(e))));
    auto gs = wigner_general(rc, GridSpec::square(2.0, 0.1), {}, Execution::serial);
    auto gp = wigner_general(rc, GridSpec::square(2.0, 0.1), {}, Execution::parallel);
    CHECK(gs.values == gp.values);
    double worst = 0;
    for (int j = 0; j < gs.spec.ny; ++j)
        for (int i = 0; i < gs.spec.nx; ++i)
            worst = std::max(worst, std::abs(gs.at(i, j) - wigner_point(c, cplx(gs.spec.x(i), gs.spec.y(j)))));
    CHECK(worst < 1e-10);
}

TEST_CASE("grid serialization") {
    auto g = GridSpec::square(1.0, 0.25);
    auto grid = wigner_grid({0.5, 0.3, 0.2, 0.1}, g);
    std::stringstream bin;
    grid.write_binary(bin);
    CHECK(bin.str().size() == 32 + 8 * grid.values.size());
    CHECK(bin.str().substr(0, 4) == "WIGR");
    auto back = WignerGrid::read_binary(bin);
    CHECK(back.values == grid.values);
    CHECK(back.spec == grid.spec);

    std::stringstream csv;
    grid.write_csv(csv);
    std::string line;
    std::getline(csv, line);
    CHECK(line == "x,y,w");
    int rows = 0;
    double x, y, w;
    char comma;
    while (csv >> x >> comma >> y >> comma >> w) {
        CHECK(w == grid.values[rows]);
        ++rows;
    }
    CHECK(rows == g.nx * g.ny);

    std::stringstream junk("nope");
    CHECK_THROWS_AS(WignerGrid::read_binary(junk), InvalidArgument);
}

TEST_CASE("negativity regions") {
    auto g = GridSpec::square(2.0, 0.01);
    auto vac = negativity_region(wigner_grid({1, 0, 0, 0}, g));
    CHECK(vac.kind == RegionKind::empty);
    CHECK(vac.contours.empty());

    auto one = negativity_region(wigner_grid({0, 1, 0, 0}, g));
    CHECK(one.kind == RegionKind::simply_connected);
    REQUIRE(one.contours.size() == 1);
    CHECK(one.contours[0].front() == one.contours[0].back());
    for (const auto& p : one.contours[0]) CHECK(std::abs(std::hypot(p[0], p[1]) - 0.5) < 0.01);
    CHECK(one.min_value == doctest::Approx(-two_pi_inv));
    CHECK(std::abs(one.min_x) < 1e-12);

    auto two = negativity_region(wigner_grid({0, 0, 1, 0}, g));
    CHECK(two.kind == RegionKind::ring);
    CHECK(two.contours.size() == 2);

    auto e = fig2_params();
    ChannelRates rates{e.kappa, e.gamma, 1.0};
    auto ss = steady_state_4l(e);
    auto cond = apply_jump(EmissionChannel::two_photon, ss, rates).state;
    auto later = TransientSolver(e).at(cond, 0.3327);
    auto ring = negativity_region(wigner_grid(cavity_coefficients(later), GridSpec::square(2.5, 0.01)));
    CHECK(ring.kind == RegionKind::ring);
    CHECK(wigner_origin(later) > 0);
}
