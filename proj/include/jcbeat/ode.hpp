#pragma once

// Embedded Runge-Kutta integration with the Cash-Karp 5(4) pair.
//
// States are Eigen dense objects. The local error of a step is the maximum
// absolute entry of the difference between the 5th- and 4th-order solutions;
// a step is accepted when it does not exceed the absolute tolerance.

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <sstream>

#include "jcbeat/error.hpp"

namespace jcbeat::ode {

struct CashKarp {
    static constexpr int stages = 6;
    static constexpr std::array<double, 6> c{0.0, 1.0 / 5.0, 3.0 / 10.0, 3.0 / 5.0, 1.0, 7.0 / 8.0};
    static constexpr std::array<std::array<double, 5>, 6> a{{
        {0.0, 0.0, 0.0, 0.0, 0.0},
        {1.0 / 5.0, 0.0, 0.0, 0.0, 0.0},
        {3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0},
        {3.0 / 10.0, -9.0 / 10.0, 6.0 / 5.0, 0.0, 0.0},
        {-11.0 / 54.0, 5.0 / 2.0, -70.0 / 27.0, 35.0 / 27.0, 0.0},
        {1631.0 / 55296.0, 175.0 / 512.0, 575.0 / 13824.0, 44275.0 / 110592.0, 253.0 / 4096.0},
    }};
    static constexpr std::array<double, 6> b5{37.0 / 378.0, 0.0, 250.0 / 621.0, 125.0 / 594.0, 0.0,
                                              512.0 / 1771.0};
    static constexpr std::array<double, 6> b4{2825.0 / 27648.0, 0.0,         18575.0 / 48384.0,
                                              13525.0 / 55296.0, 277.0 / 14336.0, 1.0 / 4.0};
};

template <class State>
struct StepOutcome {
    State y;
    double error;
};

// One Cash-Karp step of size h from (t, y). f(t, y) returns dy/dt.
template <class State, class Rhs>
StepOutcome<State> cash_karp_step(Rhs&& f, double t, const State& y, double h) {
    using T = CashKarp;
    std::array<State, T::stages> k;
    k[0] = f(t, y);
    for (int s = 1; s < T::stages; ++s) {
        State ys = y;
        for (int j = 0; j < s; ++j) {
            if (T::a[s][j] != 0.0) ys += (h * T::a[s][j]) * k[j];
        }
        k[s] = f(t + T::c[s] * h, ys);
    }
    State y5 = y;
    State diff = (T::b5[0] - T::b4[0]) * k[0];
    for (int s = 0; s < T::stages; ++s) {
        if (T::b5[s] != 0.0) y5 += (h * T::b5[s]) * k[s];
        if (s > 0) diff += (T::b5[s] - T::b4[s]) * k[s];
    }
    const double err = std::abs(h) * diff.cwiseAbs().maxCoeff();
    return {std::move(y5), err};
}

struct AdaptiveOptions {
    double abs_tol = 1e-9;
    double initial_step = 1e-4;
    double max_step = std::numeric_limits<double>::infinity();
    double min_step = 1e-14; // relative to max(1, |t|)
};

// Adaptive driver that keeps its step-size estimate across calls.
template <class State>
class AdaptiveIntegrator {
public:
    explicit AdaptiveIntegrator(AdaptiveOptions options = {})
        : opt_(options), h_(std::min(options.initial_step, options.max_step)) {}

    // One accepted step from (t, y), never past t_limit. Returns the step taken.
    template <class Rhs>
    double step(Rhs&& f, double& t, State& y, double t_limit) {
        double h = std::min(h_, opt_.max_step);
        bool clipped = false;
        if (t + h >= t_limit) {
            h = t_limit - t;
            clipped = true;
        }
        for (;;) {
            if (!(h > opt_.min_step * std::max(1.0, std::abs(t)))) {
                std::ostringstream msg;
                msg << "step size underflow at tau = " << t << " (h = " << h << ")";
                throw NumericalError(msg.str());
            }
            auto out = cash_karp_step(f, t, y, h);
            if (!std::isfinite(out.error)) {
                h *= 0.2;
                clipped = false;
                continue;
            }
            if (out.error <= opt_.abs_tol) {
                const double grow =
                    out.error == 0.0 ? 5.0 : std::clamp(0.9 * std::pow(opt_.abs_tol / out.error, 0.2), 0.2, 5.0);
                // A step shortened to hit t_limit says nothing about the natural size.
                if (!clipped || h * grow > h_) h_ = h * grow;
                t = clipped ? t_limit : t + h;
                y = std::move(out.y);
                ++accepted_;
                return h;
            }
            ++rejected_;
            h *= std::clamp(0.9 * std::pow(opt_.abs_tol / out.error, 0.25), 0.1, 0.9);
            clipped = false;
        }
    }

    template <class Rhs>
    void advance(Rhs&& f, double& t, State& y, double t_target) {
        while (t < t_target) step(f, t, y, t_target);
    }

    double step_estimate() const { return h_; }
    long accepted() const { return accepted_; }
    long rejected() const { return rejected_; }

private:
    AdaptiveOptions opt_;
    double h_;
    long accepted_ = 0;
    long rejected_ = 0;
};

} // namespace jcbeat::ode
