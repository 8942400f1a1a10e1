#pragma once

#include <cstdint>
#include <vector>

#include "vnslab/geometry.hpp"
#include "vnslab/vec.hpp"

namespace vnslab {

// Uniform cell grid over a box domain. Cell centers sit at lo + (i+1/2)h.
struct GridSpec {
    int dim = 2;
    int n[3] = {1, 1, 1};  // cells per axis (1 for unused axes)
    double h[3] = {1.0, 1.0, 1.0};
    Vec lo;

    static GridSpec make(const Domain& d, const int res[3]);
    static GridSpec make(const Domain& d, int res);  // same resolution per axis

    std::int64_t cells() const {
        return std::int64_t(n[0]) * n[1] * n[2];
    }
    double cell_volume() const;
    double min_h() const;
    bool same_as(const GridSpec& o) const;
    Vec cell_center(int i, int j, int k) const;
};

// Cell-centered scalar field, row-major with the last used axis fastest.
struct ScalarField {
    GridSpec g;
    std::vector<double> v;

    ScalarField() = default;
    explicit ScalarField(const GridSpec& spec) : g(spec), v(spec.cells(), 0.0) {}

    std::int64_t idx(int i, int j, int k) const {
        return (std::int64_t(i) * g.n[1] + j) * g.n[2] + k;
    }
    double& at(int i, int j, int k) { return v[idx(i, j, k)]; }
    double at(int i, int j, int k) const { return v[idx(i, j, k)]; }
    void fill(double x) { v.assign(v.size(), x); }
};

// Marker-and-cell staggered vector field: component a lives on faces normal
// to axis a, i.e. its own axis has n[a]+1 sample planes (the first and last
// lie on the wall and are held at exactly zero for boundary-vanishing
// fields); transverse axes are cell-centered.
struct MacField {
    GridSpec g;
    std::vector<double> comp[3];

    MacField() = default;
    explicit MacField(const GridSpec& spec);

    int size(int a, int axis) const { return g.n[axis] + (axis == a ? 1 : 0); }
    std::int64_t count(int a) const;
    std::int64_t idx(int a, int i, int j, int k) const {
        return (std::int64_t(i) * size(a, 1) + j) * size(a, 2) + k;
    }
    double& at(int a, int i, int j, int k) { return comp[a][idx(a, i, j, k)]; }
    double at(int a, int i, int j, int k) const { return comp[a][idx(a, i, j, k)]; }

    // Physical position of sample (i,j,k) of component a.
    Vec pos(int a, int i, int j, int k) const;

    void fill(double x);
    // Force the normal components on all boundary faces to exactly zero.
    void zero_boundary_normals();
    double max_abs() const;
};

// Multilinear interpolation of component a at point p, using the
// antisymmetric ghost convention for transverse axes (tangential velocity
// vanishes on the wall) and hard zero for the stored boundary planes.
// The caller guarantees p is inside the closed box.
double interp_component(const MacField& u, int a, const Vec& p);

Vec interp_mac(const MacField& u, const Vec& p);

// Cloud-in-cell deposition of amount w at p onto component a of dst.
// Weights falling on ghost slots fold back with negative sign (adjoint of
// interp_component), so deposit followed by interpolation is a symmetric
// pairing.
void deposit_component(MacField& dst, int a, const Vec& p, double w);

// Same stencil but ghost weights clamp positively to the wall sample; used
// for nonnegative densities co-located with the staggered components.
void deposit_component_clamped(MacField& dst, int a, const Vec& p, double w);

// Cloud-in-cell deposition onto a cell-centered field; ghost weights clamp
// to the nearest interior cell so total deposited mass is conserved.
void deposit_cell(ScalarField& dst, const Vec& p, double w);

// Multilinear interpolation of a cell-centered field (clamped at the walls).
double interp_cell(const ScalarField& f, const Vec& p);

// Discrete MAC divergence: (sum_a du_a/dx_a) at cell centers.
void divergence(const MacField& u, ScalarField& out);

// Subtract the cell-centered gradient of p (scaled by s) from the interior
// faces of u. Boundary normal faces are left untouched (Neumann pressure).
void subtract_gradient(MacField& u, const ScalarField& p, double s);

// 2nd order 5/7-point Laplacian of a cell-centered field with homogeneous
// Dirichlet walls (antisymmetric ghosts).
void laplacian_dirichlet(const ScalarField& f, ScalarField& out);

// Same with homogeneous Neumann walls (symmetric ghosts).
void laplacian_neumann(const ScalarField& f, ScalarField& out);

// Component Laplacian with the velocity boundary conventions: hard zero on
// the stored wall planes of the component's own axis, antisymmetric ghosts
// transversally. Wall-plane entries of out are set to zero.
void laplacian_component(const MacField& u, int a, std::vector<double>& out);

// Discrete Dirichlet energy sum_a <u_a, -Lap u_a> * cellvol; equals the
// L2 norm squared of the discrete gradient under the conventions above.
double dirichlet_energy(const MacField& u);

double mean(const ScalarField& f);

}  // namespace vnslab
