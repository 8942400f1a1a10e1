#include "vnslab/grid.hpp"

#include <algorithm>
#include <cmath>

#include "vnslab/errors.hpp"

namespace vnslab {

GridSpec GridSpec::make(const Domain& d, const int res[3]) {
    GridSpec g;
    g.dim = d.dim;
    g.lo = d.lo;
    for (int a = 0; a < 3; ++a) {
        if (a < d.dim) {
            if (res[a] < 4) throw ValidationError("grid resolution must be >= 4 per axis");
            g.n[a] = res[a];
            g.h[a] = d.extent(a) / res[a];
        } else {
            g.n[a] = 1;
            g.h[a] = 1.0;
        }
    }
    return g;
}

GridSpec GridSpec::make(const Domain& d, int res) {
    int r[3] = {res, res, res};
    return make(d, r);
}

double GridSpec::cell_volume() const {
    double v = 1.0;
    for (int a = 0; a < dim; ++a) v *= h[a];
    return v;
}

double GridSpec::min_h() const {
    double m = h[0];
    for (int a = 1; a < dim; ++a) m = std::min(m, h[a]);
    return m;
}

bool GridSpec::same_as(const GridSpec& o) const {
    if (dim != o.dim) return false;
    for (int a = 0; a < 3; ++a) {
        if (n[a] != o.n[a] || h[a] != o.h[a] || lo[a] != o.lo[a]) return false;
    }
    return true;
}

Vec GridSpec::cell_center(int i, int j, int k) const {
    Vec p;
    int idx[3] = {i, j, k};
    for (int a = 0; a < dim; ++a) p[a] = lo[a] + (idx[a] + 0.5) * h[a];
    return p;
}

MacField::MacField(const GridSpec& spec) : g(spec) {
    for (int a = 0; a < g.dim; ++a) comp[a].assign(count(a), 0.0);
}

std::int64_t MacField::count(int a) const {
    return std::int64_t(size(a, 0)) * size(a, 1) * size(a, 2);
}

Vec MacField::pos(int a, int i, int j, int k) const {
    Vec p;
    int idx[3] = {i, j, k};
    for (int axis = 0; axis < g.dim; ++axis) {
        double off = (axis == a) ? 0.0 : 0.5;
        p[axis] = g.lo[axis] + (idx[axis] + off) * g.h[axis];
    }
    return p;
}

void MacField::fill(double x) {
    for (int a = 0; a < g.dim; ++a) comp[a].assign(comp[a].size(), x);
}

void MacField::zero_boundary_normals() {
    for (int a = 0; a < g.dim; ++a) {
        int na = size(a, 0), nb = size(a, 1), nc = size(a, 2);
        for (int i = 0; i < na; ++i) {
            bool wall_i = (a == 0) && (i == 0 || i == na - 1);
            for (int j = 0; j < nb; ++j) {
                bool wall_j = (a == 1) && (j == 0 || j == nb - 1);
                for (int k = 0; k < nc; ++k) {
                    bool wall_k = (a == 2) && (k == 0 || k == nc - 1);
                    if (wall_i || wall_j || wall_k) at(a, i, j, k) = 0.0;
                }
            }
        }
    }
}

double MacField::max_abs() const {
    double m = 0.0;
    for (int a = 0; a < g.dim; ++a) {
        for (double x : comp[a]) m = std::max(m, std::abs(x));
    }
    return m;
}

namespace {

// Per-axis interpolation stencil: two nodes with weights; `sign` carries the
// antisymmetric ghost reflection for transverse axes.
struct AxisStencil {
    int i[2];
    double w[2];
    double sign[2];
    int np;  // 1 or 2
};

// Own axis of the component: node planes at integer coordinates 0..n.
inline AxisStencil own_axis(double coord, double lo, double h, int n) {
    AxisStencil s;
    double t = (coord - lo) / h;
    int i0 = static_cast<int>(std::floor(t));
    double f = t - i0;
    if (i0 < 0) {
        i0 = 0;
        f = 0.0;
    }
    if (i0 >= n) {
        i0 = n - 1;
        f = 1.0;
    }
    s.np = 2;
    s.i[0] = i0;
    s.i[1] = i0 + 1;
    s.w[0] = 1.0 - f;
    s.w[1] = f;
    s.sign[0] = s.sign[1] = 1.0;
    return s;
}

// Transverse axis: cell-centered samples; ghosts reflect with negative sign
// so the interpolated value vanishes exactly on the wall.
inline AxisStencil transverse_axis(double coord, double lo, double h, int n) {
    AxisStencil s;
    double t = (coord - lo) / h - 0.5;
    int j0 = static_cast<int>(std::floor(t));
    double f = t - j0;
    if (j0 < -1) {
        j0 = -1;
        f = 1.0;
    }
    if (j0 > n - 1) {
        j0 = n - 1;
        f = 0.0;
    }
    s.np = 2;
    for (int q = 0; q < 2; ++q) {
        int j = j0 + q;
        double sign = 1.0;
        if (j < 0) {
            j = 0;
            sign = -1.0;
        } else if (j > n - 1) {
            j = n - 1;
            sign = -1.0;
        }
        s.i[q] = j;
        s.sign[q] = sign;
    }
    s.w[0] = 1.0 - f;
    s.w[1] = f;
    return s;
}

inline AxisStencil unused_axis() {
    AxisStencil s;
    s.np = 1;
    s.i[0] = 0;
    s.w[0] = 1.0;
    s.sign[0] = 1.0;
    return s;
}

inline void component_stencils(const GridSpec& g, int a, const Vec& p, AxisStencil st[3]) {
    for (int axis = 0; axis < 3; ++axis) {
        if (axis >= g.dim) {
            st[axis] = unused_axis();
        } else if (axis == a) {
            st[axis] = own_axis(p[axis], g.lo[axis], g.h[axis], g.n[axis]);
        } else {
            st[axis] = transverse_axis(p[axis], g.lo[axis], g.h[axis], g.n[axis]);
        }
    }
}

}  // namespace

double interp_component(const MacField& u, int a, const Vec& p) {
    AxisStencil st[3];
    component_stencils(u.g, a, p, st);
    double acc = 0.0;
    for (int i = 0; i < st[0].np; ++i) {
        for (int j = 0; j < st[1].np; ++j) {
            for (int k = 0; k < st[2].np; ++k) {
                double w = st[0].w[i] * st[1].w[j] * st[2].w[k];
                if (w == 0.0) continue;
                double sgn = st[0].sign[i] * st[1].sign[j] * st[2].sign[k];
                acc += w * sgn * u.at(a, st[0].i[i], st[1].i[j], st[2].i[k]);
            }
        }
    }
    return acc;
}

Vec interp_mac(const MacField& u, const Vec& p) {
    Vec out;
    for (int a = 0; a < u.g.dim; ++a) out[a] = interp_component(u, a, p);
    return out;
}

void deposit_component(MacField& dst, int a, const Vec& p, double w) {
    AxisStencil st[3];
    component_stencils(dst.g, a, p, st);
    for (int i = 0; i < st[0].np; ++i) {
        for (int j = 0; j < st[1].np; ++j) {
            for (int k = 0; k < st[2].np; ++k) {
                double ww = st[0].w[i] * st[1].w[j] * st[2].w[k];
                if (ww == 0.0) continue;
                double sgn = st[0].sign[i] * st[1].sign[j] * st[2].sign[k];
                dst.at(a, st[0].i[i], st[1].i[j], st[2].i[k]) += sgn * ww * w;
            }
        }
    }
}

namespace {

inline AxisStencil cell_axis_clamped(double coord, double lo, double h, int n) {
    AxisStencil s = transverse_axis(coord, lo, h, n);
    s.sign[0] = s.sign[1] = 1.0;  // clamp instead of reflect
    return s;
}

}  // namespace

void deposit_component_clamped(MacField& dst, int a, const Vec& p, double w) {
    AxisStencil st[3];
    component_stencils(dst.g, a, p, st);
    for (int axis = 0; axis < 3; ++axis) {
        st[axis].sign[0] = 1.0;
        if (st[axis].np > 1) st[axis].sign[1] = 1.0;
    }
    for (int i = 0; i < st[0].np; ++i) {
        for (int j = 0; j < st[1].np; ++j) {
            for (int k = 0; k < st[2].np; ++k) {
                double ww = st[0].w[i] * st[1].w[j] * st[2].w[k];
                if (ww != 0.0) dst.at(a, st[0].i[i], st[1].i[j], st[2].i[k]) += ww * w;
            }
        }
    }
}

void deposit_cell(ScalarField& dst, const Vec& p, double w) {
    AxisStencil st[3];
    for (int axis = 0; axis < 3; ++axis) {
        st[axis] = axis < dst.g.dim
                       ? cell_axis_clamped(p[axis], dst.g.lo[axis], dst.g.h[axis], dst.g.n[axis])
                       : unused_axis();
    }
    for (int i = 0; i < st[0].np; ++i) {
        for (int j = 0; j < st[1].np; ++j) {
            for (int k = 0; k < st[2].np; ++k) {
                double ww = st[0].w[i] * st[1].w[j] * st[2].w[k];
                if (ww != 0.0) dst.at(st[0].i[i], st[1].i[j], st[2].i[k]) += ww * w;
            }
        }
    }
}

double interp_cell(const ScalarField& f, const Vec& p) {
    AxisStencil st[3];
    for (int axis = 0; axis < 3; ++axis) {
        st[axis] = axis < f.g.dim
                       ? cell_axis_clamped(p[axis], f.g.lo[axis], f.g.h[axis], f.g.n[axis])
                       : unused_axis();
    }
    double acc = 0.0;
    for (int i = 0; i < st[0].np; ++i) {
        for (int j = 0; j < st[1].np; ++j) {
            for (int k = 0; k < st[2].np; ++k) {
                double w = st[0].w[i] * st[1].w[j] * st[2].w[k];
                if (w != 0.0) acc += w * f.at(st[0].i[i], st[1].i[j], st[2].i[k]);
            }
        }
    }
    return acc;
}

void divergence(const MacField& u, ScalarField& out) {
    const GridSpec& g = u.g;
    out.fill(0.0);
    for (int i = 0; i < g.n[0]; ++i) {
        for (int j = 0; j < g.n[1]; ++j) {
            for (int k = 0; k < g.n[2]; ++k) {
                double div = (u.at(0, i + 1, j, k) - u.at(0, i, j, k)) / g.h[0];
                if (g.dim > 1) div += (u.at(1, i, j + 1, k) - u.at(1, i, j, k)) / g.h[1];
                if (g.dim > 2) div += (u.at(2, i, j, k + 1) - u.at(2, i, j, k)) / g.h[2];
                out.at(i, j, k) = div;
            }
        }
    }
}

void subtract_gradient(MacField& u, const ScalarField& p, double s) {
    const GridSpec& g = u.g;
    for (int a = 0; a < g.dim; ++a) {
        int na = u.size(a, 0), nb = u.size(a, 1), nc = u.size(a, 2);
        for (int i = 0; i < na; ++i) {
            for (int j = 0; j < nb; ++j) {
                for (int k = 0; k < nc; ++k) {
                    int idx[3] = {i, j, k};
                    if (idx[a] == 0 || idx[a] == g.n[a]) continue;  // wall faces stay put
                    int left[3] = {i, j, k};
                    left[a] -= 1;
                    double grad = p.at(idx[0], idx[1], idx[2]) - p.at(left[0], left[1], left[2]);
                    u.at(a, i, j, k) -= s * grad / g.h[a];
                }
            }
        }
    }
}

namespace {

// Cell-centered Laplacian with ghost sign: -1 antisymmetric (Dirichlet wall),
// +1 symmetric (Neumann wall).
void laplacian_cell(const ScalarField& f, ScalarField& out, double ghost_sign) {
    const GridSpec& g = f.g;
    for (int i = 0; i < g.n[0]; ++i) {
        for (int j = 0; j < g.n[1]; ++j) {
            for (int k = 0; k < g.n[2]; ++k) {
                double c = f.at(i, j, k);
                double acc = 0.0;
                int idx[3] = {i, j, k};
                for (int a = 0; a < g.dim; ++a) {
                    double lft, rgt;
                    int t = idx[a];
                    int ii[3] = {i, j, k};
                    ii[a] = t - 1;
                    lft = (t == 0) ? ghost_sign * c : f.at(ii[0], ii[1], ii[2]);
                    ii[a] = t + 1;
                    rgt = (t == g.n[a] - 1) ? ghost_sign * c : f.at(ii[0], ii[1], ii[2]);
                    acc += (lft - 2.0 * c + rgt) / (g.h[a] * g.h[a]);
                }
                out.at(i, j, k) = acc;
            }
        }
    }
}

}  // namespace

void laplacian_dirichlet(const ScalarField& f, ScalarField& out) {
    laplacian_cell(f, out, -1.0);
}

void laplacian_neumann(const ScalarField& f, ScalarField& out) {
    laplacian_cell(f, out, 1.0);
}

void laplacian_component(const MacField& u, int a, std::vector<double>& out) {
    const GridSpec& g = u.g;
    int na = u.size(a, 0), nb = u.size(a, 1), nc = u.size(a, 2);
    out.assign(u.count(a), 0.0);
    for (int i = 0; i < na; ++i) {
        for (int j = 0; j < nb; ++j) {
            for (int k = 0; k < nc; ++k) {
                int idx[3] = {i, j, k};
                int sizes[3] = {na, nb, nc};
                bool wall = false;
                for (int axis = 0; axis < g.dim; ++axis) {
                    if (axis == a && (idx[axis] == 0 || idx[axis] == sizes[axis] - 1)) wall = true;
                }
                std::int64_t lin = u.idx(a, i, j, k);
                if (wall) {
                    out[lin] = 0.0;
                    continue;
                }
                double c = u.comp[a][lin];
                double acc = 0.0;
                for (int axis = 0; axis < g.dim; ++axis) {
                    int ii[3] = {i, j, k};
                    double lft, rgt;
                    ii[axis] = idx[axis] - 1;
                    if (ii[axis] < 0) {
                        lft = -c;  // transverse wall ghost (own axis never hits this)
                    } else {
                        lft = u.at(a, ii[0], ii[1], ii[2]);
                    }
                    ii[axis] = idx[axis] + 1;
                    if (ii[axis] > sizes[axis] - 1) {
                        rgt = -c;
                    } else {
                        rgt = u.at(a, ii[0], ii[1], ii[2]);
                    }
                    acc += (lft - 2.0 * c + rgt) / (g.h[axis] * g.h[axis]);
                }
                out[lin] = acc;
            }
        }
    }
}

double dirichlet_energy(const MacField& u) {
    double vol = u.g.cell_volume();
    double total = 0.0;
    std::vector<double> lap;
    for (int a = 0; a < u.g.dim; ++a) {
        laplacian_component(u, a, lap);
        const auto& c = u.comp[a];
        double acc = 0.0;
        for (std::size_t i = 0; i < c.size(); ++i) acc -= c[i] * lap[i];
        total += acc * vol;
    }
    return total;
}

double mean(const ScalarField& f) {
    double s = 0.0;
    for (double x : f.v) s += x;
    return s / static_cast<double>(f.v.size());
}

}  // namespace vnslab
