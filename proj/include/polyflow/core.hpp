#pragma once

// Small dense-vector helpers. Every dimension in this library is tiny
// (ambient dims <= 8, mesh sizes <= a few dozen), so the vector type is a
// plain std::vector<double>.

#include <cmath>
#include <cstddef>
#include <span>
#include <vector>

namespace polyflow {

using Vec = std::vector<double>;

inline double dot(std::span<const double> a, std::span<const double> b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

inline double norm2(std::span<const double> a) {
    return std::sqrt(dot(a, a));
}

inline double norm_inf(std::span<const double> a) {
    double s = 0.0;
    for (double v : a) s = std::max(s, std::abs(v));
    return s;
}

inline Vec add(std::span<const double> a, std::span<const double> b) {
    Vec r(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) r[i] = a[i] + b[i];
    return r;
}

inline Vec sub(std::span<const double> a, std::span<const double> b) {
    Vec r(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) r[i] = a[i] - b[i];
    return r;
}

inline Vec scaled(std::span<const double> a, double s) {
    Vec r(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) r[i] = a[i] * s;
    return r;
}

/// r += s * a
inline void axpy(Vec& r, double s, std::span<const double> a) {
    for (std::size_t i = 0; i < a.size(); ++i) r[i] += s * a[i];
}

}  // namespace polyflow
