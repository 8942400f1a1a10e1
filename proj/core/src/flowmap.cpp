#include "vnslab/flowmap.hpp"

#include <algorithm>
#include <cmath>

#include "vnslab/errors.hpp"
#include "vnslab/fluid.hpp"
#include "vnslab/kinetic.hpp"

namespace vnslab {

PhaseJacobian PhaseJacobian::identity() {
    PhaseJacobian j;
    for (int r = 0; r < 6; ++r) {
        for (int c = 0; c < 6; ++c) j.m[r][c] = (r == c) ? 1.0 : 0.0;
    }
    return j;
}

double PhaseJacobian::determinant(int dim) const {
    // Active rows/cols: X components 0..dim-1 and V components 3..3+dim-1.
    int act[6];
    int n = 0;
    for (int a = 0; a < dim; ++a) act[n++] = a;
    for (int a = 0; a < dim; ++a) act[n++] = 3 + a;
    double a[6][6];
    for (int r = 0; r < n; ++r) {
        for (int c = 0; c < n; ++c) a[r][c] = m[act[r]][act[c]];
    }
    // LU with partial pivoting.
    double det = 1.0;
    for (int col = 0; col < n; ++col) {
        int piv = col;
        for (int r = col + 1; r < n; ++r) {
            if (std::abs(a[r][col]) > std::abs(a[piv][col])) piv = r;
        }
        if (piv != col) {
            for (int c = 0; c < n; ++c) std::swap(a[piv][c], a[col][c]);
            det = -det;
        }
        if (a[col][col] == 0.0) return 0.0;
        det *= a[col][col];
        for (int r = col + 1; r < n; ++r) {
            double f = a[r][col] / a[col][col];
            for (int c = col; c < n; ++c) a[r][c] -= f * a[col][c];
        }
    }
    return det;
}

FlowSnapshotSeries::FlowSnapshotSeries(const Domain& d, int substeps)
    : domain_(d), substeps_(std::max(1, substeps)) {}

void FlowSnapshotSeries::push_back(double t, const MacField& u) {
    if (!times_.empty() && !(t > times_.back())) {
        throw ValidationError("snapshot series: times must be strictly increasing");
    }
    if (!fields_.empty() && !u.g.same_as(fields_.front().g)) {
        throw ValidationError("snapshot series: fields must share one grid");
    }
    times_.push_back(t);
    fields_.push_back(u);
}

void FlowSnapshotSeries::push_back(double t, MacField&& u) {
    if (!times_.empty() && !(t > times_.back())) {
        throw ValidationError("snapshot series: times must be strictly increasing");
    }
    if (!fields_.empty() && !u.g.same_as(fields_.front().g)) {
        throw ValidationError("snapshot series: fields must share one grid");
    }
    times_.push_back(t);
    fields_.push_back(std::move(u));
}

FlowSnapshotSeries FlowSnapshotSeries::constant_field(const Domain& d, const MacField& u,
                                                      double t0, double t1, int substeps) {
    FlowSnapshotSeries s(d, substeps);
    s.push_back(t0, u);
    s.push_back(t1, u);
    return s;
}

bool FlowSnapshotSeries::covers(double a, double b) const {
    if (times_.size() < 2) return false;
    double eps = 1e-9 * (1.0 + std::abs(times_.back()));
    return times_.front() <= std::min(a, b) + eps && std::max(a, b) <= times_.back() + eps;
}

void FlowSnapshotSeries::ensure_norms() const {
    if (u_linf_cache_.size() == times_.size()) return;
    u_linf_cache_.resize(times_.size());
    grad_linf_cache_.resize(times_.size());
    for (std::size_t k = 0; k < times_.size(); ++k) {
        FluidNorms n = fluid_norms(domain_, fields_[k]);
        u_linf_cache_[k] = n.u_linf;
        grad_linf_cache_[k] = n.grad_u_linf;
    }
}

double FlowSnapshotSeries::u_linf(std::size_t k) const {
    ensure_norms();
    return u_linf_cache_[k];
}

double FlowSnapshotSeries::grad_u_linf(std::size_t k) const {
    ensure_norms();
    return grad_linf_cache_[k];
}

namespace {

double trapezoid_clipped(const std::vector<double>& t, const std::vector<double>& y,
                         double a, double b) {
    if (t.size() < 2 || !(b > a)) return 0.0;
    double acc = 0.0;
    for (std::size_t k = 0; k + 1 < t.size(); ++k) {
        double lo = std::max(t[k], a), hi = std::min(t[k + 1], b);
        if (hi <= lo) continue;
        double span = t[k + 1] - t[k];
        auto lerp = [&](double tau) {
            double w = span > 0.0 ? (tau - t[k]) / span : 0.0;
            return (1.0 - w) * y[k] + w * y[k + 1];
        };
        acc += 0.5 * (lerp(lo) + lerp(hi)) * (hi - lo);
    }
    return acc;
}

}  // namespace

double FlowSnapshotSeries::integral_u_linf(double a, double b) const {
    ensure_norms();
    return trapezoid_clipped(times_, u_linf_cache_, a, b);
}

double FlowSnapshotSeries::integral_grad_u_linf(double a, double b) const {
    ensure_norms();
    return trapezoid_clipped(times_, grad_linf_cache_, a, b);
}

namespace {

constexpr int kScanSamples = 8;
constexpr double kBisectTol = 1e-10;
constexpr int kInvertMaxIter = 200;

struct Walker {
    const FlowSnapshotSeries& s;
    const Domain& dom;

    explicit Walker(const FlowSnapshotSeries& series) : s(series), dom(series.domain()) {}

    std::size_t interval_of(double t) const {
        // Largest k with time(k) <= t, clamped to a valid interval index.
        std::size_t lo = 0, hi = s.size() - 1;
        while (lo + 1 < hi) {
            std::size_t mid = (lo + hi) / 2;
            if (s.time(mid) <= t) {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        return lo;
    }

    double substep_len(std::size_t k) const { return s.substep_duration(k); }

    Vec field_at(std::size_t k, const Vec& x) const {
        return extend_field(dom, s.field(k), x);
    }

    // Gradient of the extended field by centered differences (zero outside).
    void field_grad(std::size_t k, const Vec& x, double j[3][3]) const {
        double eta = 1e-5 * s.field(k).g.min_h();
        for (int b = 0; b < dom.dim; ++b) {
            Vec xp = x, xm = x;
            xp[b] += eta;
            xm[b] -= eta;
            Vec up = field_at(k, xp), um = field_at(k, xm);
            for (int a = 0; a < dom.dim; ++a) j[a][b] = (up[a] - um[a]) / (2.0 * eta);
        }
        for (int a = 0; a < 3; ++a) {
            for (int b = 0; b < 3; ++b) {
                if (a >= dom.dim || b >= dom.dim) j[a][b] = 0.0;
            }
        }
    }

    // Forward frozen step of duration dt from (x0,v0); ubar already sampled.
    static void forward(const Vec& x0, const Vec& v0, const Vec& ubar, double dt, Vec& x,
                        Vec& v) {
        const double em = std::exp(-dt);
        const double a = -std::expm1(-dt);
        const double b = dt - a;
        x = x0 + a * v0 + b * ubar;
        v = em * v0 + a * ubar;
    }

    // Solve forward(x0,v0,F(x0),dt) = (x,v) for the left-node state by the
    // perturbation-of-identity fixed point.
    void invert(std::size_t k, const Vec& x, const Vec& v, double dt, Vec& x0, Vec& v0,
                Vec& ubar) const {
        const double es = std::exp(dt);
        const double a = -std::expm1(-dt);
        const double b = dt - a;
        x0 = x;
        for (int it = 0; it < kInvertMaxIter; ++it) {
            ubar = field_at(k, x0);
            v0 = es * (v - a * ubar);
            Vec x0_new = x - a * v0 - b * ubar;
            double dx = norm(x0_new - x0);
            x0 = x0_new;
            if (dx <= 1e-14 * (1.0 + norm(x0))) {
                ubar = field_at(k, x0);
                v0 = es * (v - a * ubar);
                return;
            }
        }
        throw NumericError("flow: backward step fixed point did not converge");
    }
};

struct Cursor {
    std::size_t k;  // interval (k == size-1 with sub == 0 is the terminal node)
    int sub;        // substep index in [0, substeps)
    double node_time(const Walker& w) const {
        return sub == 0 ? w.s.time(k) : w.s.time(k) + sub * w.substep_len(k);
    }
};

// Locate the elementary substep containing t (clamped into coverage) and
// return the cursor of its left node plus the offset of t into the substep.
Cursor locate(const Walker& w, double t, double& offset) {
    const FlowSnapshotSeries& s = w.s;
    double eps = 1e-12 * (1.0 + std::abs(s.t_back()));
    Cursor c;
    if (t >= s.t_back() - eps) {
        c.k = s.size() - 2;
        c.sub = s.substeps() - 1;
        offset = w.substep_len(c.k);  // snaps onto the terminal node
        return c;
    }
    c.k = w.interval_of(t);
    double hk = w.substep_len(c.k);
    double rel = (t - s.time(c.k)) / hk;
    int sub = static_cast<int>(std::floor(rel + eps));
    sub = std::max(0, std::min(sub, w.s.substeps() - 1));
    c.sub = sub;
    offset = t - c.node_time(w);
    if (std::abs(offset) <= eps) offset = 0.0;
    return c;
}

void cursor_advance(const Walker& w, Cursor& c) {
    if (c.sub + 1 < w.s.substeps()) {
        c.sub += 1;
    } else {
        c.k += 1;
        c.sub = 0;
    }
}

void cursor_retreat(const Walker& w, Cursor& c) {
    if (c.sub > 0) {
        c.sub -= 1;
    } else {
        c.k -= 1;
        c.sub = w.s.substeps() - 1;
    }
}

// Move the state to the canonical left node of the substep containing t.
// Returns the cursor; state is updated in place.
Cursor snap_to_node(const Walker& w, double t, Vec& x, Vec& v) {
    double offset = 0.0;
    Cursor c = locate(w, t, offset);
    if (offset > 0.0) {
        double hk = w.substep_len(c.k);
        double eps = 1e-12 * (1.0 + std::abs(w.s.t_back()));
        if (std::abs(offset - hk) <= eps) {
            // exactly on the right node
            cursor_advance(w, c);
            return c;
        }
        Vec x0, v0, ub;
        w.invert(c.k, x, v, offset, x0, v0, ub);
        x = x0;
        v = v0;
    }
    return c;
}

}  // namespace

PhaseState flow(const FlowSnapshotSeries& s, double t_from, double t_to, const PhaseState& z) {
    if (s.size() < 2) throw NumericError("flow: series has fewer than two snapshots");
    if (!s.covers(t_from, t_to)) throw NumericError("flow: series does not cover the interval");
    t_from = std::clamp(t_from, s.t_front(), s.t_back());
    t_to = std::clamp(t_to, s.t_front(), s.t_back());
    Walker w(s);
    Vec x = z.x, v = z.v;
    if (t_from == t_to) return {x, v};
    Cursor c = snap_to_node(w, t_from, x, v);
    double eps = 1e-12 * (1.0 + std::abs(s.t_back()));

    if (t_to > t_from) {
        while (true) {
            double a_time = c.node_time(w);
            if (a_time >= t_to - eps) return {x, v};
            double hk = w.substep_len(c.k);
            double step = std::min(hk, t_to - a_time);
            Vec ub = w.field_at(c.k, x);
            Vec xn, vn;
            Walker::forward(x, v, ub, step, xn, vn);
            x = xn;
            v = vn;
            if (step < hk - eps) return {x, v};
            cursor_advance(w, c);
        }
    } else {
        // snap_to_node already handled any partial tail above t's node.
        while (true) {
            double a_time = c.node_time(w);
            if (a_time <= t_to + eps) {
                if (a_time < t_to - eps) {
                    // t_to lies inside the previous substep: integrate forward.
                    Vec ub = w.field_at(c.k, x);
                    Vec xn, vn;
                    Walker::forward(x, v, ub, t_to - a_time, xn, vn);
                    return {xn, vn};
                }
                return {x, v};
            }
            // Inversion always targets the substep's left node; when t_to
            // falls inside this substep the loop head integrates the
            // remainder forward on the next pass.
            cursor_retreat(w, c);
            double hk = w.substep_len(c.k);
            Vec x0, v0, ub;
            w.invert(c.k, x, v, hk, x0, v0, ub);
            x = x0;
            v = v0;
        }
    }
}

VariationalState flow_variational(const FlowSnapshotSeries& s, double t_from, double t_to,
                                  const PhaseState& z) {
    if (s.size() < 2) throw NumericError("flow: series has fewer than two snapshots");
    if (!s.covers(t_from, t_to)) throw NumericError("flow: series does not cover the interval");
    t_from = std::clamp(t_from, s.t_front(), s.t_back());
    t_to = std::clamp(t_to, s.t_front(), s.t_back());
    Walker w(s);
    const int dim = s.domain().dim;
    Vec x = z.x, v = z.v;
    PhaseJacobian jac = PhaseJacobian::identity();
    double eps = 1e-12 * (1.0 + std::abs(s.t_back()));

    auto accumulate = [&](std::size_t k, const Vec& x0, double dt, bool backward) {
        double ju[3][3];
        w.field_grad(k, x0, ju);
        const double em = std::exp(-dt);
        const double a = -std::expm1(-dt);
        const double b = dt - a;
        // dG = [[I + b J, a I], [a J, em I]] (differential of the frozen step).
        double g[6][6];
        for (int r = 0; r < 6; ++r) {
            for (int cc = 0; cc < 6; ++cc) g[r][cc] = 0.0;
        }
        for (int r = 0; r < dim; ++r) {
            for (int cc = 0; cc < dim; ++cc) {
                g[r][cc] = (r == cc ? 1.0 : 0.0) + b * ju[r][cc];
                g[3 + r][cc] = a * ju[r][cc];
            }
            g[r][3 + r] = a;
            g[3 + r][3 + r] = em;
        }
        for (int r = dim; r < 3; ++r) {
            g[r][r] = 1.0;
            g[3 + r][3 + r] = 1.0;
        }
        if (backward) {
            // invert the 2d x 2d active block by Gauss-Jordan
            int act[6];
            int n = 0;
            for (int r = 0; r < dim; ++r) act[n++] = r;
            for (int r = 0; r < dim; ++r) act[n++] = 3 + r;
            double mat[6][12];
            for (int r = 0; r < n; ++r) {
                for (int cc = 0; cc < n; ++cc) mat[r][cc] = g[act[r]][act[cc]];
                for (int cc = 0; cc < n; ++cc) mat[r][n + cc] = (r == cc) ? 1.0 : 0.0;
            }
            for (int col = 0; col < n; ++col) {
                int piv = col;
                for (int r = col + 1; r < n; ++r) {
                    if (std::abs(mat[r][col]) > std::abs(mat[piv][col])) piv = r;
                }
                for (int cc = 0; cc < 2 * n; ++cc) std::swap(mat[piv][cc], mat[col][cc]);
                double d = mat[col][col];
                if (d == 0.0) throw NumericError("flow: singular variational step");
                for (int cc = 0; cc < 2 * n; ++cc) mat[col][cc] /= d;
                for (int r = 0; r < n; ++r) {
                    if (r == col) continue;
                    double f = mat[r][col];
                    for (int cc = 0; cc < 2 * n; ++cc) mat[r][cc] -= f * mat[col][cc];
                }
            }
            for (int r = 0; r < 6; ++r) {
                for (int cc = 0; cc < 6; ++cc) g[r][cc] = (r == cc) ? 1.0 : 0.0;
            }
            for (int r = 0; r < n; ++r) {
                for (int cc = 0; cc < n; ++cc) g[act[r]][act[cc]] = mat[r][n + cc];
            }
        }
        PhaseJacobian out;
        for (int r = 0; r < 6; ++r) {
            for (int cc = 0; cc < 6; ++cc) {
                double acc = 0.0;
                for (int q = 0; q < 6; ++q) acc += g[r][q] * jac.m[q][cc];
                out.m[r][cc] = acc;
            }
        }
        jac = out;
    };

    if (t_from == t_to) return {{x, v}, jac};
    Cursor c = snap_to_node(w, t_from, x, v);
    // Note: any partial lead-in/out uses the same frozen-step differentials.
    if (t_to > t_from) {
        double snapped = c.node_time(w);
        if (snapped < t_from - eps) {
            // partial re-trace from node to t_from contributes the inverse of
            // the partial differential; fold it in.
            accumulate(c.k, x, t_from - snapped, true);
        }
        while (true) {
            double a_time = c.node_time(w);
            if (a_time >= t_to - eps) return {{x, v}, jac};
            double hk = w.substep_len(c.k);
            double step = std::min(hk, t_to - a_time);
            Vec ub = w.field_at(c.k, x);
            accumulate(c.k, x, step, false);
            Vec xn, vn;
            Walker::forward(x, v, ub, step, xn, vn);
            x = xn;
            v = vn;
            if (step < hk - eps) return {{x, v}, jac};
            cursor_advance(w, c);
        }
    } else {
        double snapped = c.node_time(w);
        if (snapped < t_from - eps) accumulate(c.k, x, t_from - snapped, true);
        while (true) {
            double a_time = c.node_time(w);
            if (a_time <= t_to + eps) {
                if (a_time < t_to - eps) {
                    Vec ub = w.field_at(c.k, x);
                    accumulate(c.k, x, t_to - a_time, false);
                    Vec xn, vn;
                    Walker::forward(x, v, ub, t_to - a_time, xn, vn);
                    return {{xn, vn}, jac};
                }
                return {{x, v}, jac};
            }
            cursor_retreat(w, c);
            double hk = w.substep_len(c.k);
            Vec x0, v0, ub;
            w.invert(c.k, x, v, hk, x0, v0, ub);
            x = x0;
            v = v0;
            accumulate(c.k, x0, hk, true);
        }
    }
}

PhaseJacobian phase_jacobian(const FlowSnapshotSeries& s, double t_from, double t_to,
                             const PhaseState& z) {
    return flow_variational(s, t_from, t_to, z).jac;
}

PhaseState flow_backward_checked(const FlowSnapshotSeries& s, double t, const PhaseState& z,
                                 bool* stayed_inside) {
    if (!s.covers(0.0, t)) throw NumericError("flow: series does not cover [0,t]");
    t = std::clamp(t, s.t_front(), s.t_back());
    Walker w(s);
    const Domain& dom = s.domain();
    *stayed_inside = inside(dom, z.x);
    Vec x = z.x, v = z.v;
    Cursor c = snap_to_node(w, t, x, v);
    double eps = 1e-12 * (1.0 + std::abs(s.t_back()));
    if (*stayed_inside && c.node_time(w) < t - eps) {
        // scan the partial lead-in from the node to t
        double off = t - c.node_time(w);
        Vec ub = w.field_at(c.k, x);
        for (int q = 0; q <= kScanSamples; ++q) {
            Vec xs = substep_position(x, v, ub, off * q / kScanSamples);
            if (!inside(dom, xs)) {
                *stayed_inside = false;
                break;
            }
        }
    }
    while (c.node_time(w) > eps) {
        cursor_retreat(w, c);
        double hk = w.substep_len(c.k);
        Vec x0, v0, ub;
        w.invert(c.k, x, v, hk, x0, v0, ub);
        x = x0;
        v = v0;
        if (*stayed_inside) {
            for (int q = 0; q <= kScanSamples; ++q) {
                Vec xs = substep_position(x0, v0, ub, hk * q / kScanSamples);
                if (!inside(dom, xs)) {
                    *stayed_inside = false;
                    break;
                }
            }
        }
    }
    return {x, v};
}

std::optional<ExitEvent> exit_time_forward(const FlowSnapshotSeries& s, double t0,
                                           const PhaseState& z, double horizon) {
    const Domain& dom = s.domain();
    if (!inside(dom, z.x)) throw ValidationError("exit_time_forward: z must be interior");
    if (!s.covers(t0, horizon)) {
        throw NumericError("exit_time_forward: series does not cover the horizon");
    }
    t0 = std::clamp(t0, s.t_front(), s.t_back());
    horizon = std::clamp(horizon, s.t_front(), s.t_back());
    Walker w(s);
    Vec x = z.x, v = z.v;
    Cursor c = snap_to_node(w, t0, x, v);
    double eps = 1e-12 * (1.0 + std::abs(s.t_back()));
    while (true) {
        double a_time = c.node_time(w);
        if (a_time >= horizon - eps) return std::nullopt;
        double hk = w.substep_len(c.k);
        double step = std::min(hk, horizon - a_time);
        Vec ub = w.field_at(c.k, x);
        // scan + bisect on the frozen closed form
        double s_in = 0.0, s_out = -1.0;
        for (int q = 1; q <= kScanSamples; ++q) {
            double off = step * q / kScanSamples;
            if (inside(dom, substep_position(x, v, ub, off))) {
                s_in = off;
            } else {
                s_out = off;
                break;
            }
        }
        if (s_out >= 0.0) {
            while (s_out - s_in > kBisectTol) {
                double sm = 0.5 * (s_in + s_out);
                if (inside(dom, substep_position(x, v, ub, sm))) {
                    s_in = sm;
                } else {
                    s_out = sm;
                }
            }
            double se = 0.5 * (s_in + s_out);
            ExitEvent ev;
            ev.tau = a_time + se;
            ev.state.x = substep_position(x, v, ub, se);
            ev.state.v = substep_velocity(v, ub, se);
            ev.boundary_class = classify_phase(dom, ev.state.x, ev.state.v, 1e-6);
            return ev;
        }
        Vec xn, vn;
        Walker::forward(x, v, ub, step, xn, vn);
        x = xn;
        v = vn;
        if (step < hk - eps) return std::nullopt;
        cursor_advance(w, c);
    }
}

StraighteningResult straightening_map(const FlowSnapshotSeries& s, double t, const Vec& x,
                                      const Vec& v, double delta) {
    double budget = s.integral_grad_u_linf(0.0, t);
    if (!(budget < delta)) {
        throw NumericError("straightening_map: gradient budget " + std::to_string(budget) +
                           " violates delta " + std::to_string(delta));
    }
    VariationalState vs = flow_variational(s, t, 0.0, {x, v});
    const int dim = s.domain().dim;
    // det of the dV(0)/dv block
    double a[3][3] = {{0.0}};
    for (int r = 0; r < dim; ++r) {
        for (int c = 0; c < dim; ++c) a[r][c] = vs.jac.m[3 + r][3 + c];
    }
    double det;
    if (dim == 2) {
        det = a[0][0] * a[1][1] - a[0][1] * a[1][0];
    } else {
        det = a[0][0] * (a[1][1] * a[2][2] - a[1][2] * a[2][1]) -
              a[0][1] * (a[1][0] * a[2][2] - a[1][2] * a[2][0]) +
              a[0][2] * (a[1][0] * a[2][1] - a[1][1] * a[2][0]);
    }
    return {vs.z.v, det, budget};
}

}  // namespace vnslab
