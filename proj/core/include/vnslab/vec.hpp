#pragma once

#include <array>
#include <cmath>

namespace vnslab {

// Fixed-capacity spatial vector for runtime dimension d in {2,3}.
// Unused trailing components are kept exactly zero so that norms, dot
// products and componentwise loops can always run over all three slots.
struct Vec {
    double c[3] = {0.0, 0.0, 0.0};

    Vec() = default;
    Vec(double x, double y) : c{x, y, 0.0} {}
    Vec(double x, double y, double z) : c{x, y, z} {}

    double& operator[](int i) { return c[i]; }
    double operator[](int i) const { return c[i]; }

    friend Vec operator+(const Vec& a, const Vec& b) {
        return {a.c[0] + b.c[0], a.c[1] + b.c[1], a.c[2] + b.c[2]};
    }
    friend Vec operator-(const Vec& a, const Vec& b) {
        return {a.c[0] - b.c[0], a.c[1] - b.c[1], a.c[2] - b.c[2]};
    }
    friend Vec operator*(double s, const Vec& a) {
        return {s * a.c[0], s * a.c[1], s * a.c[2]};
    }
    friend Vec operator*(const Vec& a, double s) { return s * a; }
    Vec& operator+=(const Vec& b) {
        c[0] += b.c[0];
        c[1] += b.c[1];
        c[2] += b.c[2];
        return *this;
    }
    Vec& operator-=(const Vec& b) {
        c[0] -= b.c[0];
        c[1] -= b.c[1];
        c[2] -= b.c[2];
        return *this;
    }
};

inline double dot(const Vec& a, const Vec& b) {
    return a.c[0] * b.c[0] + a.c[1] * b.c[1] + a.c[2] * b.c[2];
}

inline double norm(const Vec& a) { return std::sqrt(dot(a, a)); }

inline double norm_sq(const Vec& a) { return dot(a, a); }

inline bool finite(const Vec& a) {
    return std::isfinite(a.c[0]) && std::isfinite(a.c[1]) && std::isfinite(a.c[2]);
}

}  // namespace vnslab
