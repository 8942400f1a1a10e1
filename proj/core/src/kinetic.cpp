#include "vnslab/kinetic.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_map>

#include "vnslab/errors.hpp"
#include "vnslab/flowmap.hpp"

namespace vnslab {

namespace {

inline double uniform01(std::mt19937_64& rng) {
    // 53 uniform mantissa bits; avoids the implementation-defined
    // std::uniform_real_distribution for reproducibility.
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

inline double ball_volume(int dim, double r) {
    return dim == 2 ? M_PI * r * r : (4.0 / 3.0) * M_PI * r * r * r;
}

Vec uniform_direction(int dim, std::mt19937_64& rng) {
    if (dim == 2) {
        double th = 2.0 * M_PI * uniform01(rng);
        return Vec(std::cos(th), std::sin(th));
    }
    double z = 2.0 * uniform01(rng) - 1.0;
    double th = 2.0 * M_PI * uniform01(rng);
    double r = std::sqrt(std::max(0.0, 1.0 - z * z));
    return Vec(r * std::cos(th), r * std::sin(th), z);
}

}  // namespace

double SpatialLaw::density(int dim, const Vec& x) const {
    if (kind == Kind::ball) {
        return norm(x - center) < radius ? 1.0 / ball_volume(dim, radius) : 0.0;
    }
    double vol = 1.0;
    for (int a = 0; a < dim; ++a) {
        if (x[a] < lo[a] || x[a] > hi[a]) return 0.0;
        vol *= hi[a] - lo[a];
    }
    return 1.0 / vol;
}

Vec SpatialLaw::sample(int dim, std::mt19937_64& rng) const {
    if (kind == Kind::ball) {
        double r = radius * std::pow(uniform01(rng), 1.0 / dim);
        return center + r * uniform_direction(dim, rng);
    }
    Vec x;
    for (int a = 0; a < dim; ++a) x[a] = lo[a] + uniform01(rng) * (hi[a] - lo[a]);
    return x;
}

double SpatialLaw::max_radius_about(int dim, const Vec& a) const {
    if (kind == Kind::ball) return norm(center - a) + radius;
    double r2 = 0.0;
    for (int ax = 0; ax < dim; ++ax) {
        double m = std::max(std::abs(hi[ax] - a[ax]), std::abs(lo[ax] - a[ax]));
        r2 += m * m;
    }
    return std::sqrt(r2);
}

double VelocityLaw::density(int dim, const Vec& v) const {
    double r = norm(v);
    double rl = (kind == Kind::ball) ? 0.0 : r_lo;
    if (r < rl || r > r_hi) return 0.0;
    double vol = ball_volume(dim, r_hi) - ball_volume(dim, rl);
    return 1.0 / vol;
}

Vec VelocityLaw::sample(int dim, std::mt19937_64& rng) const {
    double rl = (kind == Kind::ball) ? 0.0 : r_lo;
    double rld = std::pow(rl, dim), rhd = std::pow(r_hi, dim);
    double r = std::pow(rld + uniform01(rng) * (rhd - rld), 1.0 / dim);
    return r * uniform_direction(dim, rng);
}

double InitialDataSpec::density(int dim, const Vec& x, const Vec& v) const {
    double f = 0.0;
    for (const auto& s : strata) {
        f += s.mass * s.x_law.density(dim, x) * s.v_law.density(dim, v);
    }
    return f;
}

void InitialDataSpec::validate(const Domain& d) const {
    if (strata.empty()) throw ValidationError("initial data: no strata");
    double mass = 0.0;
    for (const auto& s : strata) {
        if (!(s.mass >= 0.0)) throw ValidationError("initial data: negative stratum mass");
        mass += s.mass;
        if (s.x_law.kind == SpatialLaw::Kind::ball) {
            if (distance_to_boundary(d, s.x_law.center) < s.x_law.radius) {
                throw ValidationError("initial data: spatial ball not inside the domain");
            }
        } else {
            for (int a = 0; a < d.dim; ++a) {
                if (s.x_law.lo[a] < d.lo[a] || s.x_law.hi[a] > d.hi[a]) {
                    throw ValidationError("initial data: spatial box not inside the domain");
                }
            }
        }
        if (s.v_law.kind == VelocityLaw::Kind::annulus && !(s.v_law.r_lo < s.v_law.r_hi)) {
            throw ValidationError("initial data: annulus requires r_lo < r_hi");
        }
    }
    if (std::abs(mass - 1.0) > 1e-12) {
        throw ValidationError("initial data: total mass must be 1");
    }
    if (count <= 0) throw ValidationError("initial data: particle count must be positive");
}

std::int64_t ParticleEnsemble::alive_count() const {
    std::int64_t n = 0;
    for (auto s : status) n += (s == ParticleStatus::alive);
    return n;
}

double ParticleEnsemble::mass_initial() const {
    double m = 0.0;
    for (const auto& a : accounts) m += a.mass_total;
    return m;
}

double ParticleEnsemble::mass_alive() const {
    // Each per-stratum product is exact: alive quanta < 2^53 and the quantum
    // is a power-of-two scaling of the stratum mass significand.
    double m = 0.0;
    for (const auto& a : accounts) m += static_cast<double>(a.alive) * a.quantum;
    return m;
}

double ParticleEnsemble::stratum_mass_alive(int s) const {
    const auto& a = accounts.at(s);
    return static_cast<double>(a.alive) * a.quantum;
}

bool ParticleEnsemble::quanta_conserved() const {
    for (const auto& a : accounts) {
        if (a.alive + a.absorbed != a.total) return false;
    }
    return true;
}

double ParticleEnsemble::max_support_radius(const Vec& a) const {
    double r = 0.0;
    for (std::int64_t i = 0; i < size(); ++i) {
        if (status[i] == ParticleStatus::alive) r = std::max(r, norm(x[i] - a));
    }
    return r;
}

ParticleEnsemble sample_initial(const InitialDataSpec& spec, const Domain& d) {
    spec.validate(d);
    ParticleEnsemble e;
    e.dim = d.dim;
    e.seed = spec.seed;
    std::mt19937_64 rng(spec.seed);

    // Particle counts per stratum, proportional to mass, total preserved.
    const int ns = static_cast<int>(spec.strata.size());
    std::vector<std::int64_t> counts(ns, 0);
    std::int64_t assigned = 0;
    for (int s = 0; s < ns; ++s) {
        counts[s] = static_cast<std::int64_t>(std::llround(spec.strata[s].mass * spec.count));
        assigned += counts[s];
    }
    // Adjust the largest stratum for rounding drift.
    if (assigned != spec.count) {
        int big = 0;
        for (int s = 1; s < ns; ++s) {
            if (spec.strata[s].mass > spec.strata[big].mass) big = s;
        }
        counts[big] += spec.count - assigned;
    }

    for (int s = 0; s < ns; ++s) {
        const auto& st = spec.strata[s];
        if (st.mass <= 0.0 || counts[s] <= 0) {
            if (st.mass > 0.0) {
                throw ValidationError("initial data: stratum mass positive but no particles");
            }
            continue;
        }
        // Decompose the stratum mass as m * 2^e with m the 53-bit significand:
        // quantum 2^e, m quanta. Every sub-count then converts to a double
        // without rounding, so the mass bookkeeping is exact.
        int ex = 0;
        double fr = std::frexp(st.mass, &ex);
        auto total_quanta = static_cast<std::uint64_t>(std::ldexp(fr, 53));
        double quantum = std::ldexp(1.0, ex - 53);

        ParticleEnsemble::StratumAccount acc;
        acc.quantum = quantum;
        acc.total = total_quanta;
        acc.alive = total_quanta;
        acc.absorbed = 0;
        acc.mass_total = st.mass;
        int sidx = static_cast<int>(e.accounts.size());
        e.accounts.push_back(acc);

        std::uint64_t base = total_quanta / static_cast<std::uint64_t>(counts[s]);
        std::uint64_t rem = total_quanta % static_cast<std::uint64_t>(counts[s]);
        for (std::int64_t i = 0; i < counts[s]; ++i) {
            std::uint64_t q = base + (static_cast<std::uint64_t>(i) < rem ? 1 : 0);
            e.x.push_back(st.x_law.sample(d.dim, rng));
            e.v.push_back(st.v_law.sample(d.dim, rng));
            e.quanta.push_back(q);
            e.w.push_back(static_cast<double>(q) * quantum);
            e.stratum.push_back(static_cast<std::uint8_t>(sidx));
            e.status.push_back(ParticleStatus::alive);
        }
    }
    return e;
}

Vec substep_position(const Vec& x0, const Vec& v0, const Vec& ubar, double s) {
    double a = -std::expm1(-s);  // 1 - e^{-s}
    double b = s - a;            // s - 1 + e^{-s}
    return x0 + a * v0 + b * ubar;
}

Vec substep_velocity(const Vec& v0, const Vec& ubar, double s) {
    double em = std::exp(-s);
    double a = -std::expm1(-s);
    return em * v0 + a * ubar;
}

void push_particles(ParticleEnsemble& e, const Domain& d, const MacField& u, double dt) {
    if (!(dt > 0.0)) throw ValidationError("push: dt must be positive");
    const double em = std::exp(-dt);
    const double a = -std::expm1(-dt);
    const double b = dt - a;
    for (std::int64_t i = 0; i < e.size(); ++i) {
        if (e.status[i] != ParticleStatus::alive) continue;
        Vec ubar = extend_field(d, u, e.x[i]);
        Vec xn = e.x[i] + a * e.v[i] + b * ubar;
        e.v[i] = em * e.v[i] + a * ubar;
        e.x[i] = xn;
    }
}

PushRecord push_particles_recorded(ParticleEnsemble& e, const Domain& d, const MacField& u,
                                   double dt) {
    if (!(dt > 0.0)) throw ValidationError("push: dt must be positive");
    PushRecord rec;
    rec.dt = dt;
    rec.x0.resize(e.size());
    rec.v0.resize(e.size());
    rec.ubar.resize(e.size());
    const double em = std::exp(-dt);
    const double a = -std::expm1(-dt);
    const double b = dt - a;
    for (std::int64_t i = 0; i < e.size(); ++i) {
        if (e.status[i] != ParticleStatus::alive) continue;
        rec.x0[i] = e.x[i];
        rec.v0[i] = e.v[i];
        rec.ubar[i] = extend_field(d, u, e.x[i]);
        const Vec& ubar = rec.ubar[i];
        Vec xn = e.x[i] + a * e.v[i] + b * ubar;
        e.v[i] = em * e.v[i] + a * ubar;
        e.x[i] = xn;
    }
    return rec;
}

namespace {
constexpr int kScanSamples = 8;
constexpr double kBisectTol = 1e-10;
}  // namespace

void absorb(ParticleEnsemble& e, const Domain& d, const PushRecord& rec) {
    for (std::int64_t i = 0; i < e.size(); ++i) {
        if (e.status[i] != ParticleStatus::alive) continue;
        const Vec& x0 = rec.x0[i];
        const Vec& v0 = rec.v0[i];
        const Vec& ub = rec.ubar[i];
        // Scan the frozen-field sub-path for the first excursion, then bisect.
        double s_in = 0.0, s_out = -1.0;
        for (int k = 1; k <= kScanSamples; ++k) {
            double s = rec.dt * k / kScanSamples;
            Vec xs = (k == kScanSamples) ? e.x[i] : substep_position(x0, v0, ub, s);
            if (inside(d, xs)) {
                s_in = s;
            } else {
                s_out = s;
                break;
            }
        }
        if (s_out < 0.0) continue;  // stayed inside
        while (s_out - s_in > kBisectTol) {
            double sm = 0.5 * (s_in + s_out);
            if (inside(d, substep_position(x0, v0, ub, sm))) {
                s_in = sm;
            } else {
                s_out = sm;
            }
        }
        double s_exit = 0.5 * (s_in + s_out);
        AbsorptionEvent ev;
        ev.t_exit = rec.t0 + s_exit;
        ev.x_exit = substep_position(x0, v0, ub, s_exit);
        ev.v_exit = substep_velocity(v0, ub, s_exit);
        ev.weight = e.w[i];
        ev.particle = i;
        ev.boundary_class = classify_phase(d, ev.x_exit, ev.v_exit, 1e-6);
        if (ev.boundary_class == PhaseBoundaryClass::grazing) e.grazing_exits += 1;
        e.ledger.push_back(ev);
        e.status[i] = ParticleStatus::absorbed;
        auto& acc = e.accounts[e.stratum[i]];
        acc.alive -= e.quanta[i];
        acc.absorbed += e.quanta[i];
    }
}

KineticMoments deposit_moments(const ParticleEnsemble& e, const Domain& d, const GridSpec& g,
                               double q) {
    KineticMoments m;
    m.q = q;
    m.rho = ScalarField(g);
    for (int a = 0; a < d.dim; ++a) m.j_cell[a] = ScalarField(g);
    m.j = MacField(g);
    m.rho_faces = MacField(g);

    for (std::int64_t i = 0; i < e.size(); ++i) {
        if (e.status[i] != ParticleStatus::alive) continue;
        const double w = e.w[i];
        const double vn = norm(e.v[i]);
        m.m0 += w;
        m.m1 += w * vn;
        m.m2 += w * vn * vn;
        m.m6 += w * vn * vn * vn * vn * vn * vn;
        deposit_cell(m.rho, e.x[i], w);
        for (int a = 0; a < d.dim; ++a) {
            deposit_cell(m.j_cell[a], e.x[i], w * e.v[i][a]);
            deposit_component(m.j, a, e.x[i], w * e.v[i][a]);
            deposit_component_clamped(m.rho_faces, a, e.x[i], w);
        }
    }
    const double inv_vol = 1.0 / g.cell_volume();
    for (double& x : m.rho.v) x *= inv_vol;
    for (int a = 0; a < d.dim; ++a) {
        for (double& x : m.j_cell[a].v) x *= inv_vol;
        for (double& x : m.j.comp[a]) x *= inv_vol;
        for (double& x : m.rho_faces.comp[a]) x *= inv_vol;
    }
    for (std::int64_t c = 0; c < g.cells(); ++c) {
        m.sup_rho = std::max(m.sup_rho, m.rho.v[c]);
        double j2 = 0.0;
        for (int a = 0; a < d.dim; ++a) j2 += m.j_cell[a].v[c] * m.j_cell[a].v[c];
        m.sup_j = std::max(m.sup_j, std::sqrt(j2));
    }

    // Pointwise decay estimate N_q: binned phase-space density (top-hat
    // kernel, per-axis Silverman-style bandwidth), reported only.
    std::int64_t alive = e.alive_count();
    if (alive > 0) {
        const int pd = 2 * d.dim;
        double mean[6] = {0}, var[6] = {0};
        for (std::int64_t i = 0; i < e.size(); ++i) {
            if (e.status[i] != ParticleStatus::alive) continue;
            for (int a = 0; a < d.dim; ++a) {
                mean[a] += e.x[i][a];
                mean[d.dim + a] += e.v[i][a];
            }
        }
        for (int a = 0; a < pd; ++a) mean[a] /= alive;
        for (std::int64_t i = 0; i < e.size(); ++i) {
            if (e.status[i] != ParticleStatus::alive) continue;
            for (int a = 0; a < d.dim; ++a) {
                double dx = e.x[i][a] - mean[a];
                double dv = e.v[i][a] - mean[d.dim + a];
                var[a] += dx * dx;
                var[d.dim + a] += dv * dv;
            }
        }
        double bw[6];
        double nfac = std::pow(static_cast<double>(alive), -1.0 / (pd + 4));
        for (int a = 0; a < pd; ++a) {
            double sigma = std::sqrt(var[a] / alive);
            bw[a] = std::max(1.06 * sigma * nfac, 1e-6 * (1.0 + std::abs(mean[a])));
        }
        double bin_vol = 1.0;
        for (int a = 0; a < pd; ++a) bin_vol *= bw[a];
        std::unordered_map<std::uint64_t, double> bins;
        std::unordered_map<std::uint64_t, double> bin_vmax;
        for (std::int64_t i = 0; i < e.size(); ++i) {
            if (e.status[i] != ParticleStatus::alive) continue;
            std::uint64_t key = 1469598103934665603ull;
            for (int a = 0; a < pd; ++a) {
                double c = a < d.dim ? e.x[i][a] : e.v[i][a - d.dim];
                auto cell = static_cast<std::int64_t>(std::floor(c / bw[a]));
                key ^= static_cast<std::uint64_t>(cell) + 0x9e3779b97f4a7c15ull + (key << 6) +
                       (key >> 2);
            }
            bins[key] += e.w[i];
            bin_vmax[key] = std::max(bin_vmax[key], norm(e.v[i]));
        }
        for (const auto& [key, mass] : bins) {
            double dens = mass / bin_vol;
            double vq = std::pow(bin_vmax[key], q);
            m.nq = std::max(m.nq, (1.0 + vq) * dens);
        }
    }
    return m;
}

ForceField brinkman_force(const KineticMoments& m, const MacField& u) {
    if (!m.j.g.same_as(u.g)) throw ValidationError("brinkman_force: grid mismatch");
    ForceField f(u.g);
    for (int a = 0; a < u.g.dim; ++a) {
        for (std::size_t i = 0; i < f.comp[a].size(); ++i) {
            f.comp[a][i] = m.j.comp[a][i] - m.rho_faces.comp[a][i] * u.comp[a][i];
        }
    }
    return f;
}

double representation_eval(const InitialDataSpec& f0, const Domain& d,
                           const FlowSnapshotSeries& flow_series, double t, const Vec& x,
                           const Vec& v) {
    if (!flow_series.covers(0.0, t)) {
        throw NumericError("representation_eval: snapshot series does not cover [0,t]");
    }
    if (t == 0.0) return f0.density(d.dim, x, v);
    if (!inside(d, x)) return 0.0;
    PhaseState z{x, v};
    // Backward characteristics; (x,v) must stay in Omega over [0,t].
    bool stayed = true;
    PhaseState z0 = flow_backward_checked(flow_series, t, z, &stayed);
    if (!stayed) return 0.0;
    return std::exp(d.dim * t) * f0.density(d.dim, z0.x, z0.v);
}

}  // namespace vnslab
