#include "vnslab/asymptotics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <queue>

#include "vnslab/errors.hpp"

namespace vnslab {

EnergyDissipation energy_and_dissipation(const ParticleEnsemble& e, const Domain& d,
                                         const MacField& u) {
    EnergyDissipation out;
    double u2 = 0.0;
    for (int a = 0; a < u.g.dim; ++a) {
        for (double x : u.comp[a]) u2 += x * x;
    }
    out.fluid_energy = 0.5 * u2 * u.g.cell_volume();
    double m2 = 0.0, drag = 0.0;
    for (std::int64_t i = 0; i < e.size(); ++i) {
        if (e.status[i] != ParticleStatus::alive) continue;
        m2 += e.w[i] * norm_sq(e.v[i]);
        Vec du = extend_field(d, u, e.x[i]) - e.v[i];
        drag += e.w[i] * norm_sq(du);
    }
    out.kinetic_energy = 0.5 * m2;
    out.energy = out.fluid_energy + out.kinetic_energy;
    out.dissipation = drag + dirichlet_energy(u);
    return out;
}

double w1_monokinetic(const ParticleEnsemble& e) {
    // Equal-mass measures f and rho_f x delta_0 share the x marginal; any
    // plan must move the velocity marginal to zero at cost >= |v| per unit
    // mass and the keep-x plan achieves it, so W1 = M1 exactly.
    double m1 = 0.0;
    for (std::int64_t i = 0; i < e.size(); ++i) {
        if (e.status[i] == ParticleStatus::alive) m1 += e.w[i] * norm(e.v[i]);
    }
    return m1;
}

// ---------------------------------------------------------------------------
// Exact transport by successive shortest paths with node potentials.

TransportResult w1_empirical_full(const std::vector<WeightedPoint>& mu_in,
                                  const std::vector<WeightedPoint>& nu_in, double mass_tol) {
    std::vector<WeightedPoint> mu, nu;
    double ma = 0.0, mb = 0.0;
    for (const auto& p : mu_in) {
        if (p.w < 0.0) throw ValidationError("w1: negative weight");
        if (p.w > 0.0) mu.push_back(p);
    }
    for (const auto& p : nu_in) {
        if (p.w < 0.0) throw ValidationError("w1: negative weight");
        if (p.w > 0.0) nu.push_back(p);
    }
    for (const auto& p : mu) ma += p.w;
    for (const auto& p : nu) mb += p.w;
    if (std::abs(ma - mb) > mass_tol * std::max(1.0, ma)) {
        throw ValidationError("w1: mass mismatch " + std::to_string(ma) + " vs " +
                              std::to_string(mb));
    }
    TransportResult res;
    if (mu.empty() || nu.empty()) return res;
    double scale = ma / mb;
    for (auto& p : nu) p.w *= scale;

    const int m = static_cast<int>(mu.size());
    const int n = static_cast<int>(nu.size());
    std::vector<double> cost(static_cast<std::size_t>(m) * n);
    for (int i = 0; i < m; ++i) {
        for (int j = 0; j < n; ++j) cost[std::size_t(i) * n + j] = norm(mu[i].x - nu[j].x);
    }
    std::vector<double> flow(static_cast<std::size_t>(m) * n, 0.0);
    std::vector<double> supply(m), demand(n);
    for (int i = 0; i < m; ++i) supply[i] = mu[i].w;
    for (int j = 0; j < n; ++j) demand[j] = nu[j].w;
    std::vector<double> pot(m + n, 0.0);  // node potentials, sources then sinks
    const double inf = std::numeric_limits<double>::infinity();
    double remaining = ma;
    const double stop = 1e-13 * std::max(1.0, ma);

    std::vector<double> dist(m + n);
    std::vector<int> prev(m + n);
    std::vector<char> done(m + n);
    while (remaining > stop) {
        // Dijkstra over reduced costs from all sources with remaining supply.
        std::fill(dist.begin(), dist.end(), inf);
        std::fill(prev.begin(), prev.end(), -1);
        std::fill(done.begin(), done.end(), 0);
        using QE = std::pair<double, int>;
        std::priority_queue<QE, std::vector<QE>, std::greater<QE>> pq;
        for (int i = 0; i < m; ++i) {
            if (supply[i] > 0.0) {
                dist[i] = 0.0;
                pq.push({0.0, i});
            }
        }
        while (!pq.empty()) {
            auto [dv, v] = pq.top();
            pq.pop();
            if (done[v]) continue;
            done[v] = 1;
            if (v < m) {
                int i = v;
                for (int j = 0; j < n; ++j) {
                    double rc = cost[std::size_t(i) * n + j] + pot[i] - pot[m + j];
                    double nd = dv + std::max(0.0, rc);
                    if (nd < dist[m + j]) {
                        dist[m + j] = nd;
                        prev[m + j] = i;
                        pq.push({nd, m + j});
                    }
                }
            } else {
                int j = v - m;
                for (int i = 0; i < m; ++i) {
                    if (flow[std::size_t(i) * n + j] <= 0.0) continue;
                    double rc = -cost[std::size_t(i) * n + j] + pot[m + j] - pot[i];
                    double nd = dv + std::max(0.0, rc);
                    if (nd < dist[i]) {
                        dist[i] = nd;
                        prev[i] = m + j;
                        pq.push({nd, i});
                    }
                }
            }
        }
        // Closest sink with unmet demand.
        int best = -1;
        for (int j = 0; j < n; ++j) {
            if (demand[j] > 0.0 && dist[m + j] < inf) {
                if (best < 0 || dist[m + j] < dist[m + best]) best = j;
            }
        }
        if (best < 0) throw NumericError("w1: no augmenting path (should not happen)");
        // Potential update (Johnson).
        double dmax = dist[m + best];
        for (int v = 0; v < m + n; ++v) pot[v] += std::min(dist[v], dmax);
        // Trace path, find bottleneck.
        double push = demand[best];
        int v = m + best;
        while (prev[v] >= 0) {
            int u = prev[v];
            if (v >= m) {
                // u -> sink arc is forward; bottleneck is the source supply at
                // the path head, handled below.
            } else {
                push = std::min(push, flow[std::size_t(v) * n + (u - m)]);
            }
            v = u;
        }
        push = std::min(push, supply[v]);
        // Apply.
        int node = m + best;
        while (prev[node] >= 0) {
            int u = prev[node];
            if (node >= m) {
                flow[std::size_t(u) * n + (node - m)] += push;
            } else {
                flow[std::size_t(node) * n + (u - m)] -= push;
            }
            node = u;
        }
        supply[node] -= push;
        demand[best] -= push;
        remaining -= push;
    }

    double total = 0.0;
    for (int i = 0; i < m; ++i) {
        for (int j = 0; j < n; ++j) total += flow[std::size_t(i) * n + j] * cost[std::size_t(i) * n + j];
    }
    res.cost = total;
    // Dual certificate: psi(sink_j) - psi(source_i) <= c_ij with the
    // Kantorovich value sum_j b_j psi_j - sum_i a_i psi_i.
    double dual = 0.0;
    for (int j = 0; j < n; ++j) dual += nu[j].w * pot[m + j];
    for (int i = 0; i < m; ++i) dual -= mu[i].w * pot[i];
    res.dual_gap = total - dual;
    double viol = 0.0;
    for (int i = 0; i < m; ++i) {
        for (int j = 0; j < n; ++j) {
            viol = std::max(viol, (pot[m + j] - pot[i]) - cost[std::size_t(i) * n + j]);
        }
    }
    res.max_dual_violation = viol;
    return res;
}

double w1_empirical(const std::vector<WeightedPoint>& mu, const std::vector<WeightedPoint>& nu,
                    double mass_tol) {
    return w1_empirical_full(mu, nu, mass_tol).cost;
}

namespace {

std::vector<WeightedPoint> grid_support(const ScalarField& f) {
    std::vector<WeightedPoint> pts;
    double vol = f.g.cell_volume();
    for (int i = 0; i < f.g.n[0]; ++i) {
        for (int j = 0; j < f.g.n[1]; ++j) {
            for (int k = 0; k < f.g.n[2]; ++k) {
                double m = f.at(i, j, k) * vol;
                if (m > 0.0) pts.push_back({f.g.cell_center(i, j, k), m});
            }
        }
    }
    return pts;
}

ScalarField coarsen2(const ScalarField& f) {
    GridSpec g = f.g;
    GridSpec c = g;
    for (int a = 0; a < g.dim; ++a) {
        c.n[a] = std::max(1, g.n[a] / 2);
        c.h[a] = g.h[a] * g.n[a] / c.n[a];
    }
    ScalarField out(c);
    for (int i = 0; i < g.n[0]; ++i) {
        for (int j = 0; j < g.n[1]; ++j) {
            for (int k = 0; k < g.n[2]; ++k) {
                int ci = std::min(i * c.n[0] / g.n[0], c.n[0] - 1);
                int cj = std::min(j * c.n[1] / g.n[1], c.n[1] - 1);
                int ck = std::min(k * c.n[2] / g.n[2], c.n[2] - 1);
                out.at(ci, cj, ck) += f.at(i, j, k) * f.g.cell_volume() / out.g.cell_volume();
            }
        }
    }
    return out;
}

}  // namespace

double w1_grid(const ScalarField& a_in, const ScalarField& b_in, int max_points) {
    ScalarField a = a_in, b = b_in;
    // Normalize both to unit mass: the gap in total mass is reported
    // separately by the callers that care.
    auto normalize = [](ScalarField& f) {
        double m = 0.0;
        for (double v : f.v) m += v;
        m *= f.g.cell_volume();
        if (m > 0.0) {
            for (double& v : f.v) v /= m;
        }
        return m;
    };
    normalize(a);
    normalize(b);
    auto pa = grid_support(a);
    auto pb = grid_support(b);
    while (static_cast<int>(pa.size()) > max_points || static_cast<int>(pb.size()) > max_points) {
        a = coarsen2(a);
        b = coarsen2(b);
        pa = grid_support(a);
        pb = grid_support(b);
    }
    if (pa.empty() && pb.empty()) return 0.0;
    if (pa.empty() || pb.empty()) {
        throw ValidationError("w1_grid: one measure is zero and the other is not");
    }
    return w1_empirical(pa, pb, 1e-9);
}

double hminus1_distance(const PoissonSolver& ps, const ScalarField& rho1,
                        const ScalarField& rho2) {
    if (!rho1.g.same_as(rho2.g)) throw ValidationError("hminus1: grid mismatch");
    ScalarField rhs(rho1.g);
    for (std::size_t i = 0; i < rhs.v.size(); ++i) rhs.v[i] = rho1.v[i] - rho2.v[i];
    ScalarField phi = ps.solve_dirichlet(rhs);
    double acc = 0.0;
    for (std::size_t i = 0; i < rhs.v.size(); ++i) acc += phi.v[i] * rhs.v[i];
    acc *= rhs.g.cell_volume();
    return std::sqrt(std::max(0.0, acc));
}

DecayFit fit_decay(const std::vector<double>& t, const std::vector<double>& e,
                   std::optional<double> window_lo, std::optional<double> window_hi) {
    if (t.size() != e.size()) throw ValidationError("fit_decay: size mismatch");
    if (t.size() < 10) throw ValidationError("fit_decay: need at least 10 samples");
    double lo = window_lo.value_or(t.front() + 0.5 * (t.back() - t.front()));
    double hi = window_hi.value_or(t.back());
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    std::vector<std::pair<double, double>> pts;
    for (std::size_t i = 0; i < t.size(); ++i) {
        if (t[i] < lo || t[i] > hi) continue;
        if (!(e[i] > 0.0)) throw ValidationError("fit_decay: nonpositive sample in window");
        pts.push_back({t[i], std::log(e[i])});
    }
    if (pts.size() < 10) throw ValidationError("fit_decay: fewer than 10 samples in window");
    for (auto& [x, y] : pts) {
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
    }
    double n = static_cast<double>(pts.size());
    double denom = n * sxx - sx * sx;
    double slope = (n * sxy - sx * sy) / denom;
    double icept = (sy - slope * sx) / n;
    double ss_res = 0, ss_tot = 0, ymean = sy / n;
    for (auto& [x, y] : pts) {
        double r = y - (slope * x + icept);
        ss_res += r * r;
        ss_tot += (y - ymean) * (y - ymean);
    }
    DecayFit fit;
    fit.lambda = -slope;
    fit.prefactor = std::exp(icept);
    fit.r_squared = ss_tot > 0.0 ? 1.0 - ss_res / ss_tot : 1.0;
    fit.window_lo = lo;
    fit.window_hi = hi;
    return fit;
}

double TailModel::integral_from(double t) const {
    if (amplitude <= 0.0) return 0.0;
    if (!(rate > 0.0)) return std::numeric_limits<double>::infinity();
    return amplitude * std::exp(-rate * (t - t0)) / rate;
}

TailModel fit_tail(const FlowSnapshotSeries& s) {
    TailModel tm;
    std::vector<double> ts, ys;
    for (std::size_t k = 0; k < s.size(); ++k) {
        double v = s.u_linf(k);
        ts.push_back(s.time(k));
        ys.push_back(v);
    }
    double vmax = 0.0;
    for (double v : ys) vmax = std::max(vmax, v);
    if (vmax == 0.0) return tm;  // field identically zero: no tail
    double lo = ts.front() + 0.5 * (ts.back() - ts.front());
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    int n = 0;
    for (std::size_t i = 0; i < ts.size(); ++i) {
        if (ts[i] < lo || ys[i] <= vmax * 1e-14) continue;
        double y = std::log(ys[i]);
        sx += ts[i];
        sy += y;
        sxx += ts[i] * ts[i];
        sxy += ts[i] * y;
        n += 1;
    }
    if (n < 3) {
        // Too few usable samples: conservative flat model.
        tm.amplitude = vmax;
        tm.rate = 0.0;
        tm.t0 = ts.back();
        return tm;
    }
    double denom = n * sxx - sx * sx;
    double slope = (n * sxy - sx * sy) / denom;
    double icept = (sy - slope * sx) / n;
    tm.rate = -slope;
    tm.t0 = ts.back();
    tm.amplitude = std::exp(icept + slope * ts.back());
    return tm;
}

// ---------------------------------------------------------------------------
// X_infinity evaluation.

namespace {

struct XinftyEval {
    Vec xinf;
    bool survives = true;  // stayed in Omega at all sample times
    double slack = 0.0;    // early-stop contribution to the X_inf error
};

constexpr int kScanSamples = 8;

// Forward walk through the whole stored series with the absorption-grade
// boundary scan. When early stopping is allowed, the walk ends once the
// remaining field integral can neither change the survival verdict nor move
// X_inf by more than it reports in `slack`.
XinftyEval xinfty_walk(const FlowSnapshotSeries& s, const PhaseState& z, bool allow_early_stop) {
    const Domain& dom = s.domain();
    XinftyEval out;
    Vec x = z.x, v = z.v;
    out.survives = inside(dom, x);
    for (std::size_t k = 0; k + 1 < s.size(); ++k) {
        double hk = s.substep_duration(k);
        for (int sub = 0; sub < s.substeps(); ++sub) {
            if (allow_early_stop) {
                double t_here = s.time(k) + sub * hk;
                double rem = s.integral_u_linf(t_here, s.t_back());
                double dist = distance_to_boundary(dom, x);
                if (std::abs(dist) > norm(v) + 2.0 * rem + 1e-12) {
                    out.xinf = x + v;
                    out.slack = rem;
                    if (dist < 0.0) out.survives = false;
                    return out;
                }
            }
            Vec ub = extend_field(dom, s.field(k), x);
            if (out.survives) {
                for (int q = 1; q <= kScanSamples; ++q) {
                    if (!inside(dom, substep_position(x, v, ub, hk * q / kScanSamples))) {
                        out.survives = false;
                        break;
                    }
                }
            }
            Vec xn = substep_position(x, v, ub, hk);
            v = substep_velocity(v, ub, hk);
            x = xn;
        }
    }
    out.xinf = x + v;  // X(T)+V(T) = x0+v0+int_0^T Pu, and free flight beyond
    out.slack = 0.0;
    return out;
}

}  // namespace

XinftyResult compute_xinfty(const FlowSnapshotSeries& s, const PhaseState& z, double tail_tol,
                            const TailModel& tail) {
    double bound = tail.integral_from(s.t_back());
    if (!(bound <= tail_tol)) {
        throw NumericError("compute_xinfty: extrapolated field tail " + std::to_string(bound) +
                           " exceeds tolerance " + std::to_string(tail_tol));
    }
    XinftyEval ev = xinfty_walk(s, z, true);
    XinftyResult res;
    res.survives = ev.survives;
    res.x_infinity = ev.xinf;
    res.tail_bound = bound + ev.slack;
    return res;
}

ProfileEstimate profile_pushforward(const InitialDataSpec& f0, const Domain& d,
                                    const FlowSnapshotSeries& s, const GridSpec& grid,
                                    double tail_tol, std::int64_t samples, std::uint64_t seed) {
    TailModel tail = fit_tail(s);
    double bound = tail.integral_from(s.t_back());
    if (!(bound <= tail_tol)) {
        throw NumericError("profile_pushforward: field tail " + std::to_string(bound) +
                           " exceeds tolerance " + std::to_string(tail_tol));
    }
    InitialDataSpec spec = f0;
    spec.count = samples;
    spec.seed = seed;
    ParticleEnsemble e = sample_initial(spec, d);

    ProfileEstimate prof;
    prof.tag = ProfileEstimate::Construction::pushforward;
    prof.rho = ScalarField(grid);
    ScalarField half_a(grid), half_b(grid);
    double mass = 0.0, slack_mean = 0.0;
    for (std::int64_t i = 0; i < e.size(); ++i) {
        XinftyEval ev = xinfty_walk(s, {e.x[i], e.v[i]}, true);
        if (!ev.survives) continue;
        deposit_cell(prof.rho, ev.xinf, e.w[i]);
        deposit_cell(i % 2 == 0 ? half_a : half_b, ev.xinf, 2.0 * e.w[i]);
        mass += e.w[i];
        slack_mean += ev.slack * e.w[i];
    }
    prof.mass = mass;
    if (mass > 0.0) slack_mean /= mass;
    double inv_vol = 1.0 / grid.cell_volume();
    for (double& v : prof.rho.v) v *= inv_vol;
    for (double& v : half_a.v) v *= inv_vol;
    for (double& v : half_b.v) v *= inv_vol;
    // Error scale: split-half W1 plus deposition cell size, tail and slack.
    double mc = 0.0;
    if (mass > 0.0) {
        double ma = 0.0, mb = 0.0;
        for (double v : half_a.v) ma += v;
        for (double v : half_b.v) mb += v;
        if (ma > 0.0 && mb > 0.0) mc = w1_grid(half_a, half_b, 512);
    }
    double hmax = 0.0;
    for (int a = 0; a < grid.dim; ++a) hmax = std::max(hmax, grid.h[a]);
    prof.error_estimate = mc + 0.5 * hmax * std::sqrt(double(grid.dim)) + bound + slack_mean;
    return prof;
}

ProfileEstimate profile_change_of_variables(const InitialDataSpec& f0, const Domain& d,
                                            const FlowSnapshotSeries& s, const GridSpec& grid,
                                            double tail_tol, const ChangeOfVariablesOpts& opts) {
    TailModel tail = fit_tail(s);
    double bound = tail.integral_from(s.t_back());
    if (!(bound <= tail_tol)) {
        throw NumericError("profile_change_of_variables: field tail exceeds tolerance");
    }
    // Velocity quadrature box: bounding box of the velocity supports.
    double vmax = 0.0;
    for (const auto& st : f0.strata) vmax = std::max(vmax, st.v_law.r_hi);
    if (vmax <= 0.0) throw ValidationError("profile_change_of_variables: empty velocity support");
    const int nv = opts.v_nodes_per_axis;
    const double dv = 2.0 * vmax / nv;
    double wq = 1.0;
    for (int a = 0; a < d.dim; ++a) wq *= dv;

    // Spatial prefilter: X_inf(y,v) ~ y + v up to the field drift.
    double drift = 2.0 * s.integral_u_linf(s.t_front(), s.t_back()) + bound;
    double support_rad = 0.0;
    Vec support_center = f0.strata.front().x_law.center;
    for (const auto& st : f0.strata) {
        support_rad = std::max(support_rad, st.x_law.max_radius_about(d.dim, support_center));
    }

    auto xinf_of = [&](const Vec& y, const Vec& v) {
        return xinfty_walk(s, {y, v}, false);
    };

    ProfileEstimate prof;
    prof.tag = ProfileEstimate::Construction::change_of_variables;
    prof.rho = ScalarField(grid);

    std::vector<Vec> vnodes;
    std::vector<int> vidx(3, 0);
    for (int i = 0; i < nv; ++i) {
        for (int j = 0; j < nv; ++j) {
            if (d.dim == 2) {
                Vec v(-vmax + (i + 0.5) * dv, -vmax + (j + 0.5) * dv);
                vnodes.push_back(v);
            } else {
                for (int k = 0; k < nv; ++k) {
                    vnodes.push_back(Vec(-vmax + (i + 0.5) * dv, -vmax + (j + 0.5) * dv,
                                         -vmax + (k + 0.5) * dv));
                }
            }
        }
    }

    double mass = 0.0;
    double hmax = 0.0;
    for (int a = 0; a < grid.dim; ++a) hmax = std::max(hmax, grid.h[a]);
    for (const Vec& v : vnodes) {
        // Skip velocity nodes outside every stratum's law.
        double vdens = 0.0;
        for (const auto& st : f0.strata) vdens += st.mass * st.v_law.density(d.dim, v);
        if (vdens <= 0.0) continue;
        for (int i = 0; i < grid.n[0]; ++i) {
            for (int j = 0; j < grid.n[1]; ++j) {
                for (int k = 0; k < grid.n[2]; ++k) {
                    Vec xc = grid.cell_center(i, j, k);
                    // Candidate preimage near xc - v; prune far cells.
                    Vec y0 = xc - v;
                    if (norm(y0 - support_center) >
                        support_rad + drift + hmax * std::sqrt(double(d.dim))) {
                        continue;
                    }
                    // Fixed point y <- xc - (Xinf(y) - y), a contraction under
                    // the perturbation-of-identity bound |DxXinf - I| <= 1/9.
                    Vec y = y0;
                    bool ok = false;
                    for (int it = 0; it < opts.invert_max_iter; ++it) {
                        XinftyEval ev = xinf_of(y, v);
                        Vec ynew = y + (xc - ev.xinf);
                        double dstep = norm(ynew - y);
                        y = ynew;
                        if (dstep <= opts.invert_tol) {
                            ok = true;
                            break;
                        }
                        if (dstep > 10.0 * (support_rad + vmax + 1.0)) break;  // diverging
                    }
                    if (!ok) {
                        throw NumericError(
                            "profile_change_of_variables: X_inf inversion failed to contract");
                    }
                    XinftyEval ev = xinf_of(y, v);
                    if (!ev.survives) continue;  // (y,v) not in the survivor set
                    double f0d = f0.density(d.dim, y, v);
                    if (f0d <= 0.0) continue;
                    // det D_x Xinf by centered finite differences.
                    double jmat[3][3] = {{0}};
                    for (int b = 0; b < d.dim; ++b) {
                        Vec yp = y, ym = y;
                        yp[b] += opts.fd_step;
                        ym[b] -= opts.fd_step;
                        Vec xp = xinf_of(yp, v).xinf;
                        Vec xm = xinf_of(ym, v).xinf;
                        for (int a = 0; a < d.dim; ++a) {
                            jmat[a][b] = (xp[a] - xm[a]) / (2.0 * opts.fd_step);
                        }
                    }
                    double det;
                    if (d.dim == 2) {
                        det = jmat[0][0] * jmat[1][1] - jmat[0][1] * jmat[1][0];
                    } else {
                        det = jmat[0][0] * (jmat[1][1] * jmat[2][2] - jmat[1][2] * jmat[2][1]) -
                              jmat[0][1] * (jmat[1][0] * jmat[2][2] - jmat[1][2] * jmat[2][0]) +
                              jmat[0][2] * (jmat[1][0] * jmat[2][1] - jmat[1][1] * jmat[2][0]);
                    }
                    if (det == 0.0) continue;
                    double contrib = wq * f0d / std::abs(det);
                    prof.rho.at(i, j, k) += contrib;
                    mass += contrib * grid.cell_volume();
                }
            }
        }
    }
    prof.mass = mass;
    prof.error_estimate =
        mass * (dv / vmax) + 0.5 * hmax * std::sqrt(double(grid.dim)) + bound;
    return prof;
}

IndicatorReport indicator_limit_check(const FlowSnapshotSeries& s,
                                      const std::vector<PhaseState>& zs,
                                      const std::vector<double>& horizons) {
    IndicatorReport rep;
    rep.samples = static_cast<std::int64_t>(zs.size());
    for (const auto& z : zs) {
        std::vector<int> row;
        std::optional<double> tau;
        if (inside(s.domain(), z.x)) {
            auto ev = exit_time_forward(s, 0.0, z, s.t_back());
            if (ev) tau = ev->tau;
        } else {
            tau = 0.0;
        }
        for (double T : horizons) {
            row.push_back(tau && *tau <= T ? 0 : 1);
        }
        bool mono = true;
        for (std::size_t i = 1; i < row.size(); ++i) {
            if (row[i] > row[i - 1]) mono = false;
        }
        rep.monotone += mono;
        if (row.size() >= 2 && row[row.size() - 1] == row[row.size() - 2]) rep.stabilized += 1;
        rep.table.push_back(std::move(row));
    }
    return rep;
}

}  // namespace vnslab
