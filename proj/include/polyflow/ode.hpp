#pragma once

// Adaptive embedded Runge-Kutta integration (Dormand-Prince 5(4)) for the
// flow tracer and the curvature flow. Step control follows the usual mixed
// absolute/relative error norm.

#include <algorithm>
#include <cmath>
#include <functional>

#include "polyflow/core.hpp"
#include "polyflow/errors.hpp"

namespace polyflow {

struct OdeOptions {
    double rtol = 1e-10;
    double atol = 1e-12;
    double h_init = 1e-3;
    double h_min = 1e-15;
    long max_steps = 10'000'000;
};

struct AcceptedStep {
    double h_used = 0.0;
    Vec x;
    double h_next = 0.0;
};

namespace detail {

// Dormand-Prince tableau.
inline constexpr double DP_A[7][6] = {
    {},
    {1.0 / 5},
    {3.0 / 40, 9.0 / 40},
    {44.0 / 45, -56.0 / 15, 32.0 / 9},
    {19372.0 / 6561, -25360.0 / 2187, 64448.0 / 6561, -212.0 / 729},
    {9017.0 / 3168, -355.0 / 33, 46732.0 / 5247, 49.0 / 176, -5103.0 / 18656},
    {35.0 / 384, 0.0, 500.0 / 1113, 125.0 / 192, -2187.0 / 6784, 11.0 / 84},
};
inline constexpr double DP_C[7] = {0.0, 1.0 / 5, 3.0 / 10, 4.0 / 5, 8.0 / 9, 1.0, 1.0};
inline constexpr double DP_B4[7] = {5179.0 / 57600, 0.0,           7571.0 / 16695, 393.0 / 640,
                                    -92097.0 / 339200, 187.0 / 2100, 1.0 / 40};

template <class F>
void dp45_stage(F& f, double t, const Vec& x, double h, Vec& x5, double& err_norm,
                const OdeOptions& opt) {
    const std::size_t n = x.size();
    Vec k[7];
    k[0] = f(t, x);
    for (int s = 1; s < 7; ++s) {
        Vec y = x;
        for (int j = 0; j < s; ++j)
            if (DP_A[s][j] != 0.0) axpy(y, h * DP_A[s][j], k[j]);
        k[s] = f(t + DP_C[s] * h, y);
    }
    // 5th-order solution uses the row a[6][.] plus k[6] with weight 0.
    x5 = x;
    for (int j = 0; j < 6; ++j)
        if (DP_A[6][j] != 0.0) axpy(x5, h * DP_A[6][j], k[j]);
    Vec x4 = x;
    for (int j = 0; j < 7; ++j)
        if (DP_B4[j] != 0.0) axpy(x4, h * DP_B4[j], k[j]);

    double sum = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double scale = opt.atol + opt.rtol * std::max(std::abs(x[i]), std::abs(x5[i]));
        const double e = (x5[i] - x4[i]) / scale;
        sum += e * e;
    }
    err_norm = n == 0 ? 0.0 : std::sqrt(sum / static_cast<double>(n));
}

}  // namespace detail

/// One accepted adaptive step from (t, x) of size at most h_cap.
template <class F>
AcceptedStep rk45_accepted_step(F&& f, double t, const Vec& x, double h_try, double h_cap,
                                const OdeOptions& opt) {
    double h = std::min(h_try, h_cap);
    for (int attempt = 0; attempt < 200; ++attempt) {
        Vec x5;
        double err = 0.0;
        detail::dp45_stage(f, t, x, h, x5, err, opt);
        if (err <= 1.0 || h <= opt.h_min) {
            const double factor =
                err > 1e-300 ? std::clamp(0.9 * std::pow(err, -0.2), 0.2, 5.0) : 5.0;
            return {h, std::move(x5), h * factor};
        }
        h *= std::max(0.2, 0.9 * std::pow(err, -0.2));
        if (h < opt.h_min) h = opt.h_min;
    }
    throw Error("rk45_accepted_step: step size control failed");
}

/// Integrates x' = f(t, x) over [t0, t1]; the observer (if any) is called
/// after every accepted step and may stop the run by returning false.
template <class F, class Observer>
Vec integrate(F&& f, Vec x, double t0, double t1, const OdeOptions& opt, Observer&& observe) {
    double t = t0;
    double h = opt.h_init;
    long steps = 0;
    while (t < t1 - 1e-15 * std::max(1.0, std::abs(t1))) {
        if (++steps > opt.max_steps) throw Error("integrate: step limit exceeded");
        auto st = rk45_accepted_step(f, t, x, h, t1 - t, opt);
        t += st.h_used;
        x = std::move(st.x);
        h = std::min(st.h_next, t1 - t > 0 ? t1 - t : st.h_next);
        if (h <= 0.0) h = opt.h_min;
        if (!observe(t, x)) break;
    }
    return x;
}

template <class F>
Vec integrate(F&& f, Vec x, double t0, double t1, const OdeOptions& opt) {
    return integrate(std::forward<F>(f), std::move(x), t0, t1, opt,
                     [](double, const Vec&) { return true; });
}

}  // namespace polyflow
