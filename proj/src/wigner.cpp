#include "jcbeat/wigner.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <istream>
#include <limits>
#include <numbers>
#include <ostream>
#include <sstream>
#include <unordered_map>

#include <Eigen/Eigenvalues>

#include "jcbeat/error.hpp"

namespace jcbeat {

namespace {

constexpr double two_over_pi = 2.0 / std::numbers::pi;
constexpr double golden = 0.6180339887498949;

template <class F>
void fill_rows(WignerGrid& out, Execution exec, const F& f) {
    const GridSpec& g = out.spec;
    out.values.assign(static_cast<std::size_t>(g.nx) * g.ny, 0.0);
    double* v = out.values.data();
    if (exec == Execution::serial) {
        for (int j = 0; j < g.ny; ++j)
            for (int i = 0; i < g.nx; ++i) v[static_cast<std::size_t>(j) * g.nx + i] = f(i, j);
        return;
    }
#pragma omp parallel for schedule(static)
    for (int j = 0; j < g.ny; ++j)
        for (int i = 0; i < g.nx; ++i) v[static_cast<std::size_t>(j) * g.nx + i] = f(i, j);
}

Extremum golden_section(const std::function<double(double)>& f, double a, double b, bool minimize) {
    const double sign = minimize ? 1.0 : -1.0;
    double c = b - golden * (b - a);
    double d = a + golden * (b - a);
    double fc = sign * f(c);
    double fd = sign * f(d);
    while (b - a > 1e-12) {
        if (fc < fd) {
            b = d;
            d = c;
            fd = fc;
            c = b - golden * (b - a);
            fc = sign * f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + golden * (b - a);
            fd = sign * f(d);
        }
    }
    const double t = 0.5 * (a + b);
    return {t, f(t)};
}

std::optional<Extremum> next_extremum(const std::function<double(double)>& f, double t_start, double t1, double dt,
                                      bool maximum) {
    if (!(dt > 0.0) || !(t1 > t_start)) throw InvalidArgument("extremum search needs dt > 0 and a non-empty window");
    const double sign = maximum ? 1.0 : -1.0;
    double t_prev = t_start;
    double f_prev = sign * f(t_start);
    double t_cur = t_start + dt;
    double f_cur = sign * f(t_cur);
    // Leave the starting point if it sits on the opposite kind of extremum.
    for (double t_next = t_cur + dt; t_next <= t1 + 1e-15; t_next += dt) {
        const double f_next = sign * f(t_next);
        if (f_cur > f_prev && f_cur >= f_next) return golden_section(f, t_prev, t_next, !maximum);
        t_prev = t_cur;
        f_prev = f_cur;
        t_cur = t_next;
        f_cur = f_next;
    }
    return std::nullopt;
}

void put_u32(std::ostream& out, std::uint32_t v) {
    char b[4];
    for (int k = 0; k < 4; ++k) b[k] = static_cast<char>((v >> (8 * k)) & 0xff);
    out.write(b, 4);
}

std::uint32_t get_u32(std::istream& in) {
    unsigned char b[4];
    in.read(reinterpret_cast<char*>(b), 4);
    std::uint32_t v = 0;
    for (int k = 0; k < 4; ++k) v |= static_cast<std::uint32_t>(b[k]) << (8 * k);
    return v;
}

template <class T>
void put_le(std::ostream& out, T value) {
    static_assert(std::endian::native == std::endian::little, "binary Wigner format assumes a little-endian host");
    out.write(reinterpret_cast<const char*>(&value), sizeof(T));
}

template <class T>
T get_le(std::istream& in) {
    T value;
    in.read(reinterpret_cast<char*>(&value), sizeof(T));
    return value;
}

} // namespace

double wigner_point(const FockCoefficients& c, cplx alpha) {
    const double x = alpha.real();
    const double y = alpha.imag();
    const double r2 = x * x + y * y;
    const double bracket = c.d0 - c.d1 * (1.0 - 4.0 * r2) + c.d2 * (1.0 - 8.0 * r2 + 8.0 * r2 * r2) -
                           8.0 * std::numbers::sqrt2 * c.d3 * x * y;
    return two_over_pi * std::exp(-2.0 * r2) * bracket;
}

double wigner_ss_point(double p3, double gamma_over_omega, cplx alpha) {
    if (!(p3 >= 0.0 && p3 < 0.25)) throw InvalidArgument("p3 must lie in [0, 0.25)");
    const double x = alpha.real();
    const double y = alpha.imag();
    const double r2 = x * x + y * y;
    const double bracket = (1.0 - 2.0 * p3) - 1.5 * p3 * (1.0 - 4.0 * r2) +
                           0.5 * p3 * (1.0 - 8.0 * r2 + 8.0 * r2 * r2) - 8.0 * gamma_over_omega * p3 * x * y;
    return two_over_pi * std::exp(-2.0 * r2) * bracket;
}

double wigner_origin(const FourLevelState& s) {
    const auto c = cavity_coefficients(s);
    return two_over_pi * (c.d0 - c.d1 + c.d2);
}

std::vector<double> wigner_origin_series(std::span<const FourLevelState> states) {
    std::vector<double> out;
    out.reserve(states.size());
    for (const auto& s : states) out.push_back(wigner_origin(s));
    return out;
}

Extremum locate_global_minimum(const std::function<double(double)>& f, double t0, double t1, double dt) {
    if (!(dt > 0.0) || !(t1 > t0)) throw InvalidArgument("extremum search needs dt > 0 and a non-empty window");
    const long n = static_cast<long>(std::floor((t1 - t0) / dt + 1e-9));
    long best = 0;
    double best_value = f(t0);
    for (long k = 1; k <= n; ++k) {
        const double v = f(t0 + k * dt);
        if (v < best_value) {
            best_value = v;
            best = k;
        }
    }
    const double a = t0 + std::max(0L, best - 1) * dt;
    const double b = t0 + std::min(n, best + 1) * dt;
    auto refined = golden_section(f, a, b, true);
    if (refined.value > best_value) return {t0 + best * dt, best_value};
    return refined;
}

std::optional<Extremum> locate_next_local_maximum(const std::function<double(double)>& f, double t_start, double t1,
                                                  double dt) {
    return next_extremum(f, t_start, t1, dt, true);
}

std::optional<Extremum> locate_next_local_minimum(const std::function<double(double)>& f, double t_start, double t1,
                                                  double dt) {
    return next_extremum(f, t_start, t1, dt, false);
}

GridSpec GridSpec::square(double half_width, double step) {
    if (!(half_width > 0.0) || !(step > 0.0)) throw InvalidArgument("grid half-width and step must be positive");
    GridSpec g;
    const int n = static_cast<int>(std::lround(2.0 * half_width / step)) + 1;
    g.x0 = g.y0 = -half_width;
    g.x1 = g.y1 = half_width;
    g.nx = g.ny = n;
    return g;
}

void GridSpec::validate() const {
    if (nx < 2 || ny < 2) throw InvalidArgument("grid needs at least 2 points per axis");
    if (!(x1 > x0) || !(y1 > y0)) throw InvalidArgument("grid extents must be increasing");
    if (!std::isfinite(x0) || !std::isfinite(x1) || !std::isfinite(y0) || !std::isfinite(y1)) {
        throw InvalidArgument("grid extents must be finite");
    }
}

double WignerGrid::integral() const {
    double sum = 0.0;
    for (double v : values) sum += v;
    return sum * spec.dx() * spec.dy();
}

double WignerGrid::truncation_bound() const {
    const double r = std::min({std::abs(spec.x0), std::abs(spec.x1), std::abs(spec.y0), std::abs(spec.y1)});
    const double s = 2.0 * r * r;
    return std::exp(-s) * (7.0 + 6.0 * s + 2.0 * s * s);
}

void WignerGrid::write_csv(std::ostream& out) const {
    out << "x,y,w\n";
    char line[96];
    for (int j = 0; j < spec.ny; ++j)
        for (int i = 0; i < spec.nx; ++i) {
            std::snprintf(line, sizeof line, "%.17g,%.17g,%.17g\n", spec.x(i), spec.y(j), at(i, j));
            out << line;
        }
}

void WignerGrid::write_binary(std::ostream& out) const {
    out.write("WIGR", 4);
    put_u32(out, static_cast<std::uint32_t>(spec.nx));
    put_u32(out, static_cast<std::uint32_t>(spec.ny));
    put_u32(out, 1u);
    put_le(out, static_cast<float>(spec.x0));
    put_le(out, static_cast<float>(spec.x1));
    put_le(out, static_cast<float>(spec.y0));
    put_le(out, static_cast<float>(spec.y1));
    for (double v : values) put_le(out, v);
}

WignerGrid WignerGrid::read_binary(std::istream& in) {
    char magic[4];
    in.read(magic, 4);
    if (!in || std::memcmp(magic, "WIGR", 4) != 0) throw InvalidArgument("not a WIGR file");
    WignerGrid g;
    g.spec.nx = static_cast<int>(get_u32(in));
    g.spec.ny = static_cast<int>(get_u32(in));
    const auto version = get_u32(in);
    if (version != 1u) throw InvalidArgument("unsupported WIGR version " + std::to_string(version));
    g.spec.x0 = get_le<float>(in);
    g.spec.x1 = get_le<float>(in);
    g.spec.y0 = get_le<float>(in);
    g.spec.y1 = get_le<float>(in);
    g.values.resize(static_cast<std::size_t>(g.spec.nx) * g.spec.ny);
    for (double& v : g.values) v = get_le<double>(in);
    if (!in) throw InvalidArgument("truncated WIGR file");
    return g;
}

WignerGrid wigner_grid(const FockCoefficients& c, const GridSpec& grid, Execution exec) {
    grid.validate();
    WignerGrid out;
    out.spec = grid;
    fill_rows(out, exec, [&](int i, int j) { return wigner_point(c, cplx(grid.x(i), grid.y(j))); });
    return out;
}

DisplacedParity::DisplacedParity(const CavityDensityMatrix& rho_c, double max_radius, const WignerOptions& options)
    : n_(static_cast<int>(rho_c.dim()) - 1), max_radius_(max_radius), options_(options) {
    const Matrix& m = rho_c.matrix();
    if (hermiticity_defect(m) > 1e-12) throw InvalidArgument("cavity state is not Hermitian");
    const double r = std::max(0.0, max_radius);
    cutoff_ = n_ + options.extra_cutoff + static_cast<int>(std::ceil(r * r + 8.0 * r));

    Eigen::SelfAdjointEigenSolver<Matrix> es(0.5 * (m + m.adjoint()));
    std::vector<int> keep;
    for (int k = 0; k <= n_; ++k)
        if (std::abs(es.eigenvalues()(k)) > options.rank_tol) keep.push_back(k);
    vectors_.resize(n_ + 1, static_cast<Eigen::Index>(keep.size()));
    for (std::size_t j = 0; j < keep.size(); ++j) {
        weights_.push_back(es.eigenvalues()(keep[j]));
        vectors_.col(static_cast<Eigen::Index>(j)) = es.eigenvectors().col(keep[j]);
    }
}

double DisplacedParity::evaluate(cplx alpha, double& leakage) const {
    if (std::abs(alpha) > max_radius_ + 1e-12) {
        throw InvalidArgument("point lies outside the radius the cutoff was sized for");
    }
    const int m = cutoff_ + 1;
    thread_local Matrix columns;
    thread_local Matrix displaced;
    columns.resize(m, n_ + 1);

    // Column k holds D(beta)|k> with beta = -alpha.
    const cplx beta = -alpha;
    const cplx beta_c = std::conj(beta);
    columns(0, 0) = std::exp(-0.5 * std::norm(beta));
    for (int i = 1; i < m; ++i) columns(i, 0) = columns(i - 1, 0) * beta / std::sqrt(static_cast<double>(i));
    for (int k = 1; k <= n_; ++k) {
        const double inv = 1.0 / std::sqrt(static_cast<double>(k));
        columns(0, k) = -beta_c * columns(0, k - 1) * inv;
        for (int i = 1; i < m; ++i) {
            columns(i, k) = (std::sqrt(static_cast<double>(i)) * columns(i - 1, k - 1) - beta_c * columns(i, k - 1)) * inv;
        }
    }
    displaced.noalias() = columns * vectors_;

    double w = 0.0;
    double kept = 0.0;
    double total = 0.0;
    for (Eigen::Index j = 0; j < displaced.cols(); ++j) {
        double parity = 0.0;
        double norm = 0.0;
        for (int i = 0; i < m; ++i) {
            const double p = std::norm(displaced(i, j));
            parity += (i % 2 == 0) ? p : -p;
            norm += p;
        }
        w += weights_[j] * parity;
        kept += weights_[j] * norm;
        total += weights_[j];
    }
    leakage = std::abs(total - kept);
    return two_over_pi * w;
}

double DisplacedParity::operator()(cplx alpha) const {
    double leakage = 0.0;
    const double w = evaluate(alpha, leakage);
    if (leakage > options_.leakage_tol) {
        std::ostringstream msg;
        msg << "Wigner cutoff N' = " << cutoff_ << " too small at alpha = " << alpha << " (trace leakage " << leakage
            << ")";
        throw NumericalError(msg.str());
    }
    return w;
}

WignerGrid wigner_general(const CavityDensityMatrix& rho_c, const GridSpec& grid, const WignerOptions& options,
                          Execution exec) {
    grid.validate();
    const double rx = std::max(std::abs(grid.x0), std::abs(grid.x1));
    const double ry = std::max(std::abs(grid.y0), std::abs(grid.y1));
    const DisplacedParity evaluator(rho_c, std::hypot(rx, ry), options);

    WignerGrid out;
    out.spec = grid;
    std::vector<double> leak(static_cast<std::size_t>(grid.nx) * grid.ny, 0.0);
    fill_rows(out, exec, [&](int i, int j) {
        return evaluator.evaluate(cplx(grid.x(i), grid.y(j)), leak[static_cast<std::size_t>(j) * grid.nx + i]);
    });
    const auto worst = std::max_element(leak.begin(), leak.end());
    if (*worst > options.leakage_tol) {
        const auto idx = static_cast<std::size_t>(worst - leak.begin());
        std::ostringstream msg;
        msg << "Wigner cutoff N' = " << evaluator.internal_cutoff() << " too small at alpha = ("
            << grid.x(static_cast<int>(idx % grid.nx)) << ", " << grid.y(static_cast<int>(idx / grid.nx))
            << ") (trace leakage " << *worst << ")";
        throw NumericalError(msg.str());
    }
    return out;
}

std::string to_string(RegionKind kind) {
    switch (kind) {
    case RegionKind::empty: return "empty";
    case RegionKind::simply_connected: return "simply_connected";
    case RegionKind::ring: return "ring";
    case RegionKind::multiple: return "multiple";
    }
    return "unknown";
}

namespace {

// Connected components of cells where mask == want. With eight = false uses
// 4-connectivity. Returns the component count and, via touches_border, how many
// of them reach the edge of the grid.
int count_components(const std::vector<char>& mask, int nx, int ny, char want, bool eight, int* touching) {
    std::vector<char> seen(mask.size(), 0);
    std::vector<int> stack;
    int count = 0;
    int border = 0;
    for (int start = 0; start < nx * ny; ++start) {
        if (mask[start] != want || seen[start]) continue;
        ++count;
        bool edge = false;
        stack.push_back(start);
        seen[start] = 1;
        while (!stack.empty()) {
            const int c = stack.back();
            stack.pop_back();
            const int i = c % nx, j = c / nx;
            if (i == 0 || j == 0 || i == nx - 1 || j == ny - 1) edge = true;
            for (int dj = -1; dj <= 1; ++dj)
                for (int di = -1; di <= 1; ++di) {
                    if ((di == 0 && dj == 0) || (!eight && di != 0 && dj != 0)) continue;
                    const int ii = i + di, jj = j + dj;
                    if (ii < 0 || jj < 0 || ii >= nx || jj >= ny) continue;
                    const int n = jj * nx + ii;
                    if (mask[n] == want && !seen[n]) {
                        seen[n] = 1;
                        stack.push_back(n);
                    }
                }
        }
        if (edge) ++border;
    }
    if (touching) *touching = border;
    return count;
}

} // namespace

NegativityRegion negativity_region(const WignerGrid& grid) {
    const GridSpec& g = grid.spec;
    const int nx = g.nx, ny = g.ny;
    NegativityRegion out;

    const auto it = std::min_element(grid.values.begin(), grid.values.end());
    const auto idx = static_cast<int>(it - grid.values.begin());
    out.min_value = *it;
    out.min_x = g.x(idx % nx);
    out.min_y = g.y(idx / nx);

    std::vector<char> mask(grid.values.size());
    for (std::size_t k = 0; k < mask.size(); ++k) mask[k] = grid.values[k] < 0.0 ? 1 : 0;
    out.components = count_components(mask, nx, ny, 1, false, nullptr);
    int open = 0;
    const int outside = count_components(mask, nx, ny, 0, true, &open);
    out.holes = outside - open;
    if (out.components == 0) {
        out.kind = RegionKind::empty;
    } else if (out.components == 1 && out.holes == 0) {
        out.kind = RegionKind::simply_connected;
    } else if (out.components == 1 && out.holes == 1) {
        out.kind = RegionKind::ring;
    } else {
        out.kind = RegionKind::multiple;
    }
    if (out.components == 0) return out;

    // Marching squares. Edge ids: 2*(j*nx+i) horizontal from (i,j), +1 vertical from (i,j).
    using Point = std::array<double, 2>;
    std::unordered_map<long, Point> crossing;
    auto edge_point = [&](int i0, int j0, int i1, int j1) -> long {
        const long id = 2L * (static_cast<long>(j0) * nx + i0) + (j1 != j0 ? 1 : 0);
        if (!crossing.count(id)) {
            const double a = grid.at(i0, j0), b = grid.at(i1, j1);
            const double t = a / (a - b);
            crossing[id] = {g.x(i0) + t * (g.x(i1) - g.x(i0)), g.y(j0) + t * (g.y(j1) - g.y(j0))};
        }
        return id;
    };
    std::vector<std::array<long, 2>> segments;
    for (int j = 0; j + 1 < ny; ++j)
        for (int i = 0; i + 1 < nx; ++i) {
            const double v0 = grid.at(i, j), v1 = grid.at(i + 1, j), v2 = grid.at(i + 1, j + 1), v3 = grid.at(i, j + 1);
            const int code = (v0 < 0) | ((v1 < 0) << 1) | ((v2 < 0) << 2) | ((v3 < 0) << 3);
            if (code == 0 || code == 15) continue;
            auto e0 = [&] { return edge_point(i, j, i + 1, j); };
            auto e1 = [&] { return edge_point(i + 1, j, i + 1, j + 1); };
            auto e2 = [&] { return edge_point(i, j + 1, i + 1, j + 1); };
            auto e3 = [&] { return edge_point(i, j, i, j + 1); };
            const bool center_in = 0.25 * (v0 + v1 + v2 + v3) < 0.0;
            switch (code) {
            case 1: case 14: segments.push_back({e3(), e0()}); break;
            case 2: case 13: segments.push_back({e0(), e1()}); break;
            case 3: case 12: segments.push_back({e3(), e1()}); break;
            case 4: case 11: segments.push_back({e1(), e2()}); break;
            case 6: case 9: segments.push_back({e0(), e2()}); break;
            case 7: case 8: segments.push_back({e3(), e2()}); break;
            case 5:
                if (center_in) {
                    segments.push_back({e0(), e1()});
                    segments.push_back({e2(), e3()});
                } else {
                    segments.push_back({e3(), e0()});
                    segments.push_back({e1(), e2()});
                }
                break;
            case 10:
                if (center_in) {
                    segments.push_back({e3(), e0()});
                    segments.push_back({e1(), e2()});
                } else {
                    segments.push_back({e0(), e1()});
                    segments.push_back({e2(), e3()});
                }
                break;
            default: break;
            }
        }

    std::unordered_map<long, std::vector<int>> by_edge;
    for (int s = 0; s < static_cast<int>(segments.size()); ++s)
        for (long e : segments[s]) by_edge[e].push_back(s);
    std::vector<char> used(segments.size(), 0);
    auto next_segment = [&](long edge, int from) {
        for (int s : by_edge[edge])
            if (s != from && !used[s]) return s;
        return -1;
    };
    for (int s0 = 0; s0 < static_cast<int>(segments.size()); ++s0) {
        if (used[s0]) continue;
        used[s0] = 1;
        std::vector<long> chain{segments[s0][0], segments[s0][1]};
        for (int dir = 0; dir < 2; ++dir) {
            int cur = s0;
            while (true) {
                const long tip = chain.back();
                const int s = next_segment(tip, cur);
                if (s < 0) break;
                used[s] = 1;
                chain.push_back(segments[s][0] == tip ? segments[s][1] : segments[s][0]);
                cur = s;
                if (chain.back() == chain.front()) break;
            }
            if (chain.back() == chain.front()) break;
            std::reverse(chain.begin(), chain.end());
        }
        std::vector<Point> line;
        line.reserve(chain.size());
        for (long e : chain) line.push_back(crossing.at(e));
        out.contours.push_back(std::move(line));
    }
    return out;
}

} // namespace jcbeat
