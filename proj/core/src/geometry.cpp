#include "vnslab/geometry.hpp"

#include <algorithm>
#include <cmath>

#include "vnslab/errors.hpp"
#include "vnslab/grid.hpp"

namespace vnslab {

const char* to_string(PhaseBoundaryClass c) {
    switch (c) {
        case PhaseBoundaryClass::outgoing: return "outgoing";
        case PhaseBoundaryClass::incoming: return "incoming";
        case PhaseBoundaryClass::grazing: return "grazing";
    }
    return "?";
}

Domain Domain::box(int dim, const Vec& lo, const Vec& hi, const Vec& ref_point) {
    if (dim != 2 && dim != 3) throw ValidationError("domain dimension must be 2 or 3");
    Domain d;
    d.dim = dim;
    d.lo = lo;
    d.hi = hi;
    d.ref_point = ref_point;
    for (int a = 0; a < dim; ++a) {
        if (!(lo[a] < hi[a])) throw ValidationError("domain requires lo < hi per axis");
    }
    for (int a = dim; a < 3; ++a) {
        d.lo[a] = 0.0;
        d.hi[a] = 0.0;
        d.ref_point[a] = 0.0;
    }
    if (!finite(ref_point)) throw ValidationError("domain reference point must be finite");
    // Circumradius about the reference point: the farthest corner attains it.
    double r2 = 0.0;
    for (int a = 0; a < dim; ++a) {
        double m = std::max(std::abs(hi[a] - ref_point[a]), std::abs(lo[a] - ref_point[a]));
        r2 += m * m;
    }
    d.circumradius = std::sqrt(r2);
    return d;
}

double Domain::min_extent() const {
    double m = extent(0);
    for (int a = 1; a < dim; ++a) m = std::min(m, extent(a));
    return m;
}

double Domain::diameter() const {
    double s = 0.0;
    for (int a = 0; a < dim; ++a) s += extent(a) * extent(a);
    return std::sqrt(s);
}

double Domain::volume() const {
    double v = 1.0;
    for (int a = 0; a < dim; ++a) v *= extent(a);
    return v;
}

bool inside(const Domain& d, const Vec& x) {
    for (int a = 0; a < d.dim; ++a) {
        if (!(x[a] > d.lo[a] && x[a] < d.hi[a])) return false;
    }
    return true;
}

double distance_to_boundary(const Domain& d, const Vec& x) {
    double inside_min = std::numeric_limits<double>::infinity();
    double out2 = 0.0;
    bool outside = false;
    for (int a = 0; a < d.dim; ++a) {
        double dl = x[a] - d.lo[a];
        double dh = d.hi[a] - x[a];
        if (dl < 0.0) {
            outside = true;
            out2 += dl * dl;
        } else if (dh < 0.0) {
            outside = true;
            out2 += dh * dh;
        } else {
            inside_min = std::min(inside_min, std::min(dl, dh));
        }
    }
    if (outside) return -std::sqrt(out2);
    return inside_min;
}

Vec boundary_normal(const Domain& d, const Vec& x, double tol) {
    double dist = std::abs(distance_to_boundary(d, x));
    if (dist > tol * (1.0 + d.diameter())) {
        throw ValidationError("boundary_normal: point is not on the boundary");
    }
    // Nearest face over all 2d faces; ties go to the lowest axis index.
    int best_axis = 0;
    double best_sign = -1.0;
    double best = std::numeric_limits<double>::infinity();
    for (int a = 0; a < d.dim; ++a) {
        double dl = std::abs(x[a] - d.lo[a]);
        double dh = std::abs(d.hi[a] - x[a]);
        if (dl < best) {
            best = dl;
            best_axis = a;
            best_sign = -1.0;
        }
        if (dh < best) {
            best = dh;
            best_axis = a;
            best_sign = 1.0;
        }
    }
    Vec n;
    n[best_axis] = best_sign;
    return n;
}

PhaseBoundaryClass classify_phase(const Domain& d, const Vec& x, const Vec& v,
                                  double tol) {
    Vec n = boundary_normal(d, x, tol);
    double vn = dot(v, n);
    if (std::abs(vn) <= kGrazingTol * (1.0 + norm(v))) return PhaseBoundaryClass::grazing;
    return vn > 0.0 ? PhaseBoundaryClass::outgoing : PhaseBoundaryClass::incoming;
}

Vec extend_field(const Domain& d, const MacField& u, const Vec& x) {
    for (int a = 0; a < d.dim; ++a) {
        if (x[a] < d.lo[a] || x[a] > d.hi[a]) return Vec();
    }
    return interp_mac(u, x);
}

}  // namespace vnslab
