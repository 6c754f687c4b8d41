#pragma once

// Wigner function of the cavity field.
//
//   W(alpha) = (2/pi) sum_n (-1)^n <n| D(-alpha) rho_c D(alpha) |n>
//
// Four-level states are supported on n <= 2 and have a closed form in the
// Fock coefficients d0..d3; arbitrary truncated states go through the
// displaced-parity sum at an enlarged internal cutoff.

#include <array>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "jcbeat/four_level.hpp"
#include "jcbeat/hilbert.hpp"

namespace jcbeat {

enum class Execution { serial, parallel };

double wigner_point(const FockCoefficients& c, cplx alpha);

// Steady state of the effective model, written directly in p3 and gamma/Omega.
double wigner_ss_point(double p3, double gamma_over_omega, cplx alpha);

// (2/pi)(d0 - d1 + d2)
double wigner_origin(const FourLevelState& s);
std::vector<double> wigner_origin_series(std::span<const FourLevelState> states);

struct Extremum {
    double tau = 0.0;
    double value = 0.0;
};

// Coarse scan of f on [t0, t1] with spacing dt, then golden-section refinement
// around the best sample.
Extremum locate_global_minimum(const std::function<double(double)>& f, double t0, double t1, double dt = 1e-4);
// First local maximum strictly after t_start.
std::optional<Extremum> locate_next_local_maximum(const std::function<double(double)>& f, double t_start, double t1,
                                                  double dt = 1e-4);
// First local minimum strictly after t_start.
std::optional<Extremum> locate_next_local_minimum(const std::function<double(double)>& f, double t_start, double t1,
                                                  double dt = 1e-4);

struct GridSpec {
    double x0 = -2.5;
    double x1 = 2.5;
    int nx = 501;
    double y0 = -2.5;
    double y1 = 2.5;
    int ny = 501;

    static GridSpec square(double half_width, double step);
    double dx() const { return nx > 1 ? (x1 - x0) / (nx - 1) : 0.0; }
    double dy() const { return ny > 1 ? (y1 - y0) / (ny - 1) : 0.0; }
    double x(int i) const { return x0 + i * dx(); }
    double y(int j) const { return y0 + j * dy(); }
    void validate() const;
    bool operator==(const GridSpec&) const = default;
};

struct WignerGrid {
    GridSpec spec;
    std::vector<double> values; // row-major, values[j * nx + i] = W(x_i + i y_j)
    double tau = 0.0;
    std::uint64_t fingerprint = 0;

    double at(int i, int j) const { return values[static_cast<std::size_t>(j) * spec.nx + i]; }
    // Riemann sum of W dx dy.
    double integral() const;
    // Mass of an n <= 2 state outside the inscribed disk of the grid.
    double truncation_bound() const;

    void write_csv(std::ostream& out) const;
    // 32-byte little-endian header: "WIGR", uint32 nx, ny, version,
    // float32 x0, x1, y0, y1; then nx*ny float64 values row-major.
    void write_binary(std::ostream& out) const;
    static WignerGrid read_binary(std::istream& in);
};

WignerGrid wigner_grid(const FockCoefficients& c, const GridSpec& grid, Execution exec = Execution::parallel);

struct WignerOptions {
    int extra_cutoff = 20;      // N' >= N + extra_cutoff, grown with the grid extent
    double leakage_tol = 1e-8;  // trace lost by the truncated displacement
    double rank_tol = 1e-15;    // eigenvalues of rho_c below this are dropped
};

// Displaced-parity evaluator for an arbitrary cavity state.
class DisplacedParity {
public:
    DisplacedParity(const CavityDensityMatrix& rho_c, double max_radius, const WignerOptions& options = {});

    // Throws NumericalError when the truncated displacement leaks more than leakage_tol.
    double operator()(cplx alpha) const;
    // Evaluates without throwing; leakage is returned through the second argument.
    double evaluate(cplx alpha, double& leakage) const;

    int internal_cutoff() const { return cutoff_; }
    int rank() const { return static_cast<int>(weights_.size()); }

private:
    int n_;
    int cutoff_;
    double max_radius_;
    WignerOptions options_;
    std::vector<double> weights_;
    Matrix vectors_; // (N+1) x rank
};

WignerGrid wigner_general(const CavityDensityMatrix& rho_c, const GridSpec& grid, const WignerOptions& options = {},
                          Execution exec = Execution::parallel);

enum class RegionKind { empty, simply_connected, ring, multiple };
std::string to_string(RegionKind kind);

struct NegativityRegion {
    RegionKind kind = RegionKind::empty;
    int components = 0; // connected negative patches
    int holes = 0;      // non-negative islands enclosed by them
    std::vector<std::vector<std::array<double, 2>>> contours; // zero-level polylines
    double min_value = 0.0;
    double min_x = 0.0;
    double min_y = 0.0;
};

NegativityRegion negativity_region(const WignerGrid& grid);

} // namespace jcbeat
