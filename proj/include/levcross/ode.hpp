#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <vector>

#include "levcross/errors.hpp"

namespace levcross::ode {

// Adaptive Cash-Karp RK45 for 2-component systems. Integrates from x0 to x1
// in either direction with error-per-step control on the relative scale of
// the state. Solutions of Au = lambda*u can grow like exp(q|x|); when the
// state magnitude passes 1e100 it is rescaled by 1e-100 (the system must be
// linear for this to be valid) and the event is counted, so ratios can be
// reconstructed across epochs.

struct Point {
    double x;
    double y0, y1;
    int scale_count;  // number of 1e-100 rescales applied before this point
};

struct Trajectory {
    std::vector<Point> pts;  // in integration order; x monotone
    int final_scale = 0;
};

struct Options {
    double rel_tol = 1e-10;
    bool rescale_guard = false;   // linear systems only
    std::int64_t max_steps = 40'000'000;
    bool store = true;
};

namespace detail {

// Cash-Karp tableau
constexpr double a2 = 1.0 / 5, a3 = 3.0 / 10, a4 = 3.0 / 5, a5 = 1.0, a6 = 7.0 / 8;
constexpr double b21 = 1.0 / 5;
constexpr double b31 = 3.0 / 40, b32 = 9.0 / 40;
constexpr double b41 = 3.0 / 10, b42 = -9.0 / 10, b43 = 6.0 / 5;
constexpr double b51 = -11.0 / 54, b52 = 5.0 / 2, b53 = -70.0 / 27, b54 = 35.0 / 27;
constexpr double b61 = 1631.0 / 55296, b62 = 175.0 / 512, b63 = 575.0 / 13824,
                 b64 = 44275.0 / 110592, b65 = 253.0 / 4096;
constexpr double c1 = 37.0 / 378, c3 = 250.0 / 621, c4 = 125.0 / 594, c6 = 512.0 / 1771;
constexpr double d1 = c1 - 2825.0 / 27648, d3 = c3 - 18575.0 / 48384,
                 d4 = c4 - 13525.0 / 55296, d5 = -277.0 / 14336, d6 = c6 - 1.0 / 4;

}  // namespace detail

// F: void(double x, const double y[2], double dydx[2])
template <class F>
Trajectory integrate(const F& f, double x0, double x1, double y0, double y1,
                     const Options& opt, const char* where) {
    using namespace detail;
    Trajectory out;
    if (x0 == x1) {
        out.pts.push_back({x0, y0, y1, 0});
        return out;
    }
    const double dir = (x1 > x0) ? 1.0 : -1.0;
    const double span = std::fabs(x1 - x0);
    double x = x0;
    double y[2] = {y0, y1};
    int scales = 0;
    double h = dir * span / 100.0;

    if (opt.store) out.pts.push_back({x, y[0], y[1], 0});

    double k1[2], k2[2], k3[2], k4[2], k5[2], k6[2], yt[2], ynew[2], yerr[2];
    std::int64_t steps = 0;

    while (dir * (x1 - x) > 0.0) {
        if (++steps > opt.max_steps)
            raise(errc::numerical, where, "ODE step limit exceeded (stiff or divergent problem)");
        if (dir * (x + h - x1) > 0.0) h = x1 - x;

        f(x, y, k1);
        yt[0] = y[0] + h * b21 * k1[0];
        yt[1] = y[1] + h * b21 * k1[1];
        f(x + a2 * h, yt, k2);
        yt[0] = y[0] + h * (b31 * k1[0] + b32 * k2[0]);
        yt[1] = y[1] + h * (b31 * k1[1] + b32 * k2[1]);
        f(x + a3 * h, yt, k3);
        yt[0] = y[0] + h * (b41 * k1[0] + b42 * k2[0] + b43 * k3[0]);
        yt[1] = y[1] + h * (b41 * k1[1] + b42 * k2[1] + b43 * k3[1]);
        f(x + a4 * h, yt, k4);
        yt[0] = y[0] + h * (b51 * k1[0] + b52 * k2[0] + b53 * k3[0] + b54 * k4[0]);
        yt[1] = y[1] + h * (b51 * k1[1] + b52 * k2[1] + b53 * k3[1] + b54 * k4[1]);
        f(x + a5 * h, yt, k5);
        yt[0] = y[0] + h * (b61 * k1[0] + b62 * k2[0] + b63 * k3[0] + b64 * k4[0] + b65 * k5[0]);
        yt[1] = y[1] + h * (b61 * k1[1] + b62 * k2[1] + b63 * k3[1] + b64 * k4[1] + b65 * k5[1]);
        f(x + a6 * h, yt, k6);

        for (int i = 0; i < 2; ++i) {
            ynew[i] = y[i] + h * (c1 * k1[i] + c3 * k3[i] + c4 * k4[i] + c6 * k6[i]);
            yerr[i] = h * (d1 * k1[i] + d3 * k3[i] + d4 * k4[i] + d5 * k5[i] + d6 * k6[i]);
        }

        double err = 0.0;
        for (int i = 0; i < 2; ++i) {
            double sc = opt.rel_tol * std::max({std::fabs(y[i]), std::fabs(ynew[i]), 1e-290});
            err = std::max(err, std::fabs(yerr[i]) / sc);
        }

        if (!std::isfinite(err)) {
            h *= 0.25;
            if (std::fabs(h) < span * 1e-15)
                raise(errc::numerical, where, "ODE step size underflow");
            continue;
        }

        if (err <= 1.0) {
            x += h;
            y[0] = ynew[0];
            y[1] = ynew[1];
            if (opt.rescale_guard &&
                std::max(std::fabs(y[0]), std::fabs(y[1])) > 1e100) {
                y[0] *= 1e-100;
                y[1] *= 1e-100;
                ++scales;
            }
            if (opt.store) out.pts.push_back({x, y[0], y[1], scales});
            double grow = 0.9 * std::pow(std::max(err, 1e-10), -0.2);
            h *= std::clamp(grow, 0.2, 5.0);
        } else {
            h *= std::max(0.9 * std::pow(err, -0.25), 0.1);
            if (std::fabs(h) < span * 1e-15)
                raise(errc::numerical, where, "ODE step size underflow");
        }
    }

    if (!opt.store) out.pts.push_back({x, y[0], y[1], scales});
    out.final_scale = scales;
    return out;
}

}  // namespace levcross::ode
