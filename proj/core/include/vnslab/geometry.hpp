#pragma once

#include <limits>

#include "vnslab/vec.hpp"

namespace vnslab {

struct MacField;  // grid.hpp

// Phase-space boundary class of (x,v) with x on the wall: sign of v.n(x).
enum class PhaseBoundaryClass {
    outgoing,  // Sigma+ : v.n > 0
    incoming,  // Sigma- : v.n < 0
    grazing,   // Sigma0 : v.n = 0 (within grazing tolerance)
};

const char* to_string(PhaseBoundaryClass c);

// Axis-aligned box domain. All geometry queries are exact for the box.
struct Domain {
    int dim = 2;
    Vec lo;
    Vec hi;
    Vec ref_point;              // the point `a` the scenario geometry is built around
    double circumradius = 0.0;  // max |corner - ref_point|, cached at construction

    // Validates lo < hi componentwise, ref_point finite, caches circumradius.
    static Domain box(int dim, const Vec& lo, const Vec& hi, const Vec& ref_point);
    static Domain unit_square() { return box(2, Vec(0, 0), Vec(1, 1), Vec(0.5, 0.5)); }
    static Domain unit_cube() {
        return box(3, Vec(0, 0, 0), Vec(1, 1, 1), Vec(0.5, 0.5, 0.5));
    }

    double extent(int axis) const { return hi[axis] - lo[axis]; }
    double min_extent() const;
    double diameter() const;
    double volume() const;
};

// Grazing tolerance: |v.n| <= grazing_tol_abs * (1 + |v|).
inline constexpr double kGrazingTol = 1e-12;

// True iff x is strictly interior to the box.
bool inside(const Domain& d, const Vec& x);

// Exact signed distance to the box boundary: positive inside, negative outside.
double distance_to_boundary(const Domain& d, const Vec& x);

// Outward unit normal of the nearest face. At edges/corners the face with the
// smallest distance wins, ties broken by lowest axis index. Throws
// ValidationError if x is farther than tol from the boundary.
Vec boundary_normal(const Domain& d, const Vec& x, double tol = 1e-9);

PhaseBoundaryClass classify_phase(const Domain& d, const Vec& x, const Vec& v,
                                  double tol = 1e-9);

// Zero extension P of a boundary-vanishing staggered field: multilinear
// interpolation of u inside the box, exactly zero outside.
Vec extend_field(const Domain& d, const MacField& u, const Vec& x);

}  // namespace vnslab
