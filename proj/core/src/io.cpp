#include "vnslab/io.hpp"

#include <chrono>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "vnslab/errors.hpp"

#include "json.hpp"

namespace vnslab {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

void write_bytes(const std::string& path, const void* data, std::size_t n) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw ValidationError("io: cannot open " + path + " for writing");
    os.write(static_cast<const char*>(data), static_cast<std::streamsize>(n));
}

std::vector<double> read_doubles(const std::string& path) {
    std::ifstream is(path, std::ios::binary | std::ios::ate);
    if (!is) throw ValidationError("io: cannot open " + path);
    auto bytes = static_cast<std::size_t>(is.tellg());
    is.seekg(0);
    std::vector<double> out(bytes / sizeof(double));
    is.read(reinterpret_cast<char*>(out.data()), static_cast<std::streamsize>(bytes));
    return out;
}

json sidecar(int dim, const std::vector<int>& shape, const std::string& component, double time,
             const double h[3]) {
    json j;
    j["dim"] = dim;
    j["shape"] = shape;
    j["component"] = component;
    j["time"] = time;
    j["dx"] = std::vector<double>(h, h + dim);
    return j;
}

void write_text(const std::string& path, const std::string& text) {
    std::ofstream os(path);
    if (!os) throw ValidationError("io: cannot open " + path + " for writing");
    os << text;
}

}  // namespace

void dump_scalar_field(const std::string& path_base, const ScalarField& f, double time,
                       std::vector<std::string>* written) {
    // Row-major f64 little-endian (native on every supported target).
    write_bytes(path_base + ".f64", f.v.data(), f.v.size() * sizeof(double));
    std::vector<int> shape(f.g.n, f.g.n + f.g.dim);
    write_text(path_base + ".json", sidecar(f.g.dim, shape, "scalar", time, f.g.h).dump(2));
    if (written) {
        written->push_back(path_base + ".f64");
        written->push_back(path_base + ".json");
    }
}

void dump_mac_component(const std::string& path_base, const MacField& u, int a, double time,
                        std::vector<std::string>* written) {
    static const char* names[3] = {"x", "y", "z"};
    std::string base = path_base + "." + names[a];
    write_bytes(base + ".f64", u.comp[a].data(), u.comp[a].size() * sizeof(double));
    std::vector<int> shape;
    for (int axis = 0; axis < u.g.dim; ++axis) shape.push_back(u.size(a, axis));
    write_text(base + ".json", sidecar(u.g.dim, shape, names[a], time, u.g.h).dump(2));
    if (written) {
        written->push_back(base + ".f64");
        written->push_back(base + ".json");
    }
}

ScalarField load_scalar_field(const std::string& path_base, const GridSpec& g) {
    ScalarField f(g);
    auto v = read_doubles(path_base + ".f64");
    if (v.size() != f.v.size()) throw ValidationError("io: field size mismatch " + path_base);
    f.v = std::move(v);
    return f;
}

void load_mac_component(const std::string& path_base, MacField& u, int a) {
    static const char* names[3] = {"x", "y", "z"};
    auto v = read_doubles(path_base + "." + names[a] + ".f64");
    if (v.size() != u.comp[a].size()) {
        throw ValidationError("io: component size mismatch " + path_base);
    }
    u.comp[a] = std::move(v);
}

void write_ledger_csv(const std::string& path, const ParticleEnsemble& e, int dim) {
    std::ofstream os(path);
    if (!os) throw ValidationError("io: cannot open " + path);
    os << "t_exit";
    for (int a = 0; a < dim; ++a) os << ",x" << a;
    for (int a = 0; a < dim; ++a) os << ",v" << a;
    os << ",weight,boundary_class\n";
    os.precision(17);
    for (const auto& ev : e.ledger) {
        os << ev.t_exit;
        for (int a = 0; a < dim; ++a) os << ',' << ev.x_exit[a];
        for (int a = 0; a < dim; ++a) os << ',' << ev.v_exit[a];
        os << ',' << ev.weight << ',' << to_string(ev.boundary_class) << '\n';
    }
}

void write_trajectory_csv(const std::string& path, const FlowSnapshotSeries& s,
                          const PhaseState& z, double t0, double t1, int samples) {
    if (samples < 2) throw ValidationError("trajectory dump: need at least 2 samples");
    std::ofstream os(path);
    if (!os) throw ValidationError("io: cannot open " + path);
    int dim = s.domain().dim;
    os << "s";
    for (int a = 0; a < dim; ++a) os << ",x" << a;
    for (int a = 0; a < dim; ++a) os << ",v" << a;
    os << ",detJ\n";
    os.precision(17);
    for (int k = 0; k < samples; ++k) {
        double t = t0 + (t1 - t0) * k / (samples - 1);
        VariationalState vs = flow_variational(s, t0, t, z);
        os << t;
        for (int a = 0; a < dim; ++a) os << ',' << vs.z.x[a];
        for (int a = 0; a < dim; ++a) os << ',' << vs.z.v[a];
        os << ',' << vs.jac.determinant(dim) << '\n';
    }
}

std::uint64_t fnv1a_bytes(const void* data, std::size_t n) {
    const auto* p = static_cast<const unsigned char*>(data);
    std::uint64_t h = 1469598103934665603ull;
    for (std::size_t i = 0; i < n; ++i) {
        h ^= p[i];
        h *= 1099511628211ull;
    }
    return h;
}

std::uint64_t fnv1a_file(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw ValidationError("io: cannot open " + path);
    std::uint64_t h = 1469598103934665603ull;
    char buf[65536];
    while (is) {
        is.read(buf, sizeof(buf));
        auto got = static_cast<std::size_t>(is.gcount());
        for (std::size_t i = 0; i < got; ++i) {
            h ^= static_cast<unsigned char>(buf[i]);
            h *= 1099511628211ull;
        }
    }
    return h;
}

// ---------------------------------------------------------------------------
// Configuration.

namespace {

Vec vec_from(const json& j) {
    Vec v;
    for (std::size_t a = 0; a < j.size() && a < 3; ++a) v[int(a)] = j[a].get<double>();
    return v;
}

json vec_to(const Vec& v, int dim) {
    json j = json::array();
    for (int a = 0; a < dim; ++a) j.push_back(v[a]);
    return j;
}

SpatialLaw x_law_from(const json& j) {
    SpatialLaw law;
    std::string kind = j.value("kind", "ball");
    if (kind == "ball") {
        law.kind = SpatialLaw::Kind::ball;
        law.center = vec_from(j.at("center"));
        law.radius = j.at("radius").get<double>();
    } else if (kind == "box") {
        law.kind = SpatialLaw::Kind::box;
        law.lo = vec_from(j.at("lo"));
        law.hi = vec_from(j.at("hi"));
    } else {
        throw ValidationError("config: unknown spatial law " + kind);
    }
    return law;
}

VelocityLaw v_law_from(const json& j) {
    VelocityLaw law;
    std::string kind = j.value("kind", "ball");
    if (kind == "ball") {
        law.kind = VelocityLaw::Kind::ball;
        law.r_hi = j.at("r_hi").get<double>();
    } else if (kind == "annulus") {
        law.kind = VelocityLaw::Kind::annulus;
        law.r_lo = j.at("r_lo").get<double>();
        law.r_hi = j.at("r_hi").get<double>();
    } else {
        throw ValidationError("config: unknown velocity law " + kind);
    }
    return law;
}

json x_law_to(const SpatialLaw& law, int dim) {
    json j;
    if (law.kind == SpatialLaw::Kind::ball) {
        j["kind"] = "ball";
        j["center"] = vec_to(law.center, dim);
        j["radius"] = law.radius;
    } else {
        j["kind"] = "box";
        j["lo"] = vec_to(law.lo, dim);
        j["hi"] = vec_to(law.hi, dim);
    }
    return j;
}

json v_law_to(const VelocityLaw& law) {
    json j;
    if (law.kind == VelocityLaw::Kind::ball) {
        j["kind"] = "ball";
        j["r_hi"] = law.r_hi;
    } else {
        j["kind"] = "annulus";
        j["r_lo"] = law.r_lo;
        j["r_hi"] = law.r_hi;
    }
    return j;
}

ScenarioKind scenario_kind_from(const std::string& s) {
    if (s == "confinement") return ScenarioKind::confinement;
    if (s == "escape") return ScenarioKind::escape;
    if (s == "mixed") return ScenarioKind::mixed;
    throw ValidationError("config: unknown scenario kind " + s);
}

}  // namespace

std::string config_to_json(const RunConfig& cfg) {
    json j;
    int dim = cfg.domain.dim;
    j["domain"] = {{"dim", dim},
                   {"lo", vec_to(cfg.domain.lo, dim)},
                   {"hi", vec_to(cfg.domain.hi, dim)},
                   {"ref_point_a", vec_to(cfg.domain.ref_point, dim)}};
    j["fluid"] = {{"resolution", std::vector<int>(cfg.fluid.resolution,
                                                  cfg.fluid.resolution + dim)},
                  {"dt", cfg.fluid.dt},
                  {"div_tol", cfg.fluid.div_tol},
                  {"poisson_tol", cfg.fluid.solver.tol},
                  {"poisson_max_iter", cfg.fluid.solver.max_iter},
                  {"solver", cfg.fluid.solver.engine == PoissonEngine::fft ? "fft" : "cg"}};
    j["particles"] = {{"count", cfg.particle_count}, {"seed", cfg.seed}};
    if (cfg.initial_data) {
        json strata = json::array();
        for (const auto& st : cfg.initial_data->strata) {
            strata.push_back({{"x_law", x_law_to(st.x_law, dim)},
                              {"v_law", v_law_to(st.v_law)},
                              {"mass", st.mass}});
        }
        j["initial_data"] = {{"strata", strata}};
    }
    if (cfg.scenario) {
        j["scenario"] = {{"kind", to_string(cfg.scenario->kind)},
                         {"a", vec_to(cfg.scenario->center, dim)},
                         {"eps", cfg.scenario->eps},
                         {"R", cfg.scenario->r},
                         {"R1", cfg.scenario->r1},
                         {"alpha", cfg.scenario->alpha},
                         {"T", cfg.scenario->horizon_T}};
    }
    j["u0"] = {{"type", cfg.u0.kind == InitialVelocitySpec::Kind::zero ? "zero" : "single_mode"},
               {"amplitude", cfg.u0.amplitude}};
    j["horizon"] = cfg.horizon;
    j["snapshot_stride"] = cfg.snapshot_stride;
    j["output_dir"] = cfg.output_dir;
    j["deterministic"] = cfg.deterministic;
    j["kinetic_only"] = cfg.kinetic_only;
    j["monitors"] = {{"C1", cfg.monitors.c1},
                     {"C2", cfg.monitors.c2},
                     {"delta", cfg.monitors.delta},
                     {"q", cfg.monitors.q}};
    j["metrics"] = {{"w1", cfg.metric_w1},
                    {"hminus1", cfg.metric_hminus1},
                    {"rho_sample_stride", cfg.rho_sample_stride},
                    {"rho_sample_resolution", cfg.rho_sample_resolution}};
    return j.dump(2);
}

RunConfig config_from_json(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const std::exception& e) {
        throw ValidationError(std::string("config: JSON parse error: ") + e.what());
    }
    RunConfig cfg;
    try {
        const json& dj = j.at("domain");
        int dim = dj.value("dim", 2);
        cfg.domain = Domain::box(dim, vec_from(dj.at("lo")), vec_from(dj.at("hi")),
                                 dj.contains("ref_point_a") ? vec_from(dj.at("ref_point_a"))
                                                            : 0.5 * (vec_from(dj.at("lo")) +
                                                                     vec_from(dj.at("hi"))));
        if (j.contains("fluid")) {
            const json& fj = j.at("fluid");
            if (fj.contains("resolution")) {
                auto res = fj.at("resolution").get<std::vector<int>>();
                for (std::size_t a = 0; a < res.size() && a < 3; ++a) {
                    cfg.fluid.resolution[int(a)] = res[a];
                }
                if (res.size() == 1) {
                    cfg.fluid.resolution[1] = res[0];
                    cfg.fluid.resolution[2] = res[0];
                }
            }
            cfg.fluid.dt = fj.value("dt", cfg.fluid.dt);
            cfg.fluid.div_tol = fj.value("div_tol", cfg.fluid.div_tol);
            cfg.fluid.solver.tol = fj.value("poisson_tol", cfg.fluid.solver.tol);
            cfg.fluid.solver.max_iter = fj.value("poisson_max_iter", cfg.fluid.solver.max_iter);
            std::string engine = fj.value("solver", "fft");
            cfg.fluid.solver.engine = engine == "cg" ? PoissonEngine::cg : PoissonEngine::fft;
        }
        if (j.contains("particles")) {
            cfg.particle_count = j.at("particles").value("count", cfg.particle_count);
            cfg.seed = j.at("particles").value("seed", cfg.seed);
        }
        if (j.contains("initial_data")) {
            InitialDataSpec spec;
            for (const auto& sj : j.at("initial_data").at("strata")) {
                Stratum st;
                st.x_law = x_law_from(sj.at("x_law"));
                st.v_law = v_law_from(sj.at("v_law"));
                st.mass = sj.value("mass", 1.0);
                spec.strata.push_back(st);
            }
            cfg.initial_data = spec;
        }
        if (j.contains("scenario")) {
            const json& sj = j.at("scenario");
            ScenarioConfig sc;
            sc.kind = scenario_kind_from(sj.at("kind").get<std::string>());
            sc.center = sj.contains("a") ? vec_from(sj.at("a")) : cfg.domain.ref_point;
            sc.eps = sj.value("eps", 0.1);
            sc.r = sj.value("R", 0.1);
            sc.r1 = sj.value("R1", -1.0);
            sc.alpha = sj.value("alpha", 1.0);
            sc.horizon_T = sj.value("T", 1.0);
            cfg.scenario = sc;
        }
        if (j.contains("u0")) {
            std::string type = j.at("u0").value("type", "zero");
            cfg.u0.kind = type == "single_mode" ? InitialVelocitySpec::Kind::single_mode
                                                : InitialVelocitySpec::Kind::zero;
            cfg.u0.amplitude = j.at("u0").value("amplitude", 0.0);
        }
        cfg.horizon = j.value("horizon", cfg.horizon);
        cfg.snapshot_stride = j.value("snapshot_stride", cfg.snapshot_stride);
        cfg.output_dir = j.value("output_dir", cfg.output_dir);
        cfg.deterministic = j.value("deterministic", true);
        cfg.kinetic_only = j.value("kinetic_only", false);
        if (j.contains("monitors")) {
            const json& mj = j.at("monitors");
            cfg.monitors.c1 = mj.value("C1", 1.0);
            cfg.monitors.c2 = mj.value("C2", 1.0);
            cfg.monitors.delta = mj.value("delta", 0.1);
            cfg.monitors.q = mj.value("q", 5.0);
        }
        if (j.contains("metrics")) {
            const json& mj = j.at("metrics");
            cfg.metric_w1 = mj.value("w1", true);
            cfg.metric_hminus1 = mj.value("hminus1", true);
            cfg.rho_sample_stride = mj.value("rho_sample_stride", 0);
            cfg.rho_sample_resolution = mj.value("rho_sample_resolution", 32);
        }
    } catch (const json::exception& e) {
        throw ValidationError(std::string("config: ") + e.what());
    }
    return cfg;
}

RunConfig config_from_file(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw ValidationError("config: cannot open " + path);
    std::stringstream ss;
    ss << is.rdbuf();
    return config_from_json(ss.str());
}

// ---------------------------------------------------------------------------
// Manifest and artifacts.

std::string RunManifest::to_json() const {
    json j;
    j["config"] = json::parse(config_json);
    j["config_hash"] = config_hash;
    j["version"] = version;
    j["created"] = created;
    j["failed"] = failed;
    j["error"] = error;
    j["snapshot_stride"] = snapshot_stride;
    j["snapshot_times"] = snapshot_times;
    json jfiles = json::array();
    for (const auto& f : files) {
        jfiles.push_back({{"path", f.path}, {"bytes", f.bytes}, {"checksum", f.checksum}});
    }
    j["files"] = jfiles;
    return j.dump(2);
}

RunManifest RunManifest::from_json_file(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw ValidationError("manifest: cannot open " + path);
    json j;
    try {
        is >> j;
    } catch (const std::exception& e) {
        throw ValidationError(std::string("manifest: parse error: ") + e.what());
    }
    RunManifest m;
    m.config_json = j.at("config").dump();
    m.config_hash = j.value("config_hash", std::uint64_t(0));
    m.version = j.value("version", "");
    m.created = j.value("created", "");
    m.failed = j.value("failed", false);
    m.error = j.value("error", "");
    m.snapshot_stride = j.value("snapshot_stride", 0);
    m.snapshot_times = j.value("snapshot_times", std::vector<double>{});
    for (const auto& f : j.value("files", json::array())) {
        m.files.push_back({f.at("path").get<std::string>(),
                           f.value("bytes", std::uint64_t(0)),
                           f.value("checksum", std::uint64_t(0))});
    }
    return m;
}

RunManifest emit_run_artifacts(const RunOutputs& out, const std::string& dir) {
    fs::create_directories(dir);
    fs::create_directories(dir + "/fields");
    RunManifest m;
    // Persist the resolved initial data so replay needs nothing beyond the
    // manifest even for scenario-built runs.
    RunConfig persisted = out.config;
    persisted.initial_data = out.init;
    m.config_json = config_to_json(persisted);
    m.config_hash = fnv1a_bytes(m.config_json.data(), m.config_json.size());
    m.version = code_version();
    {
        auto now = std::chrono::system_clock::now();
        auto tt = std::chrono::system_clock::to_time_t(now);
        char buf[64];
        std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&tt));
        m.created = buf;
    }
    std::vector<std::string> written;

    {
        std::ofstream os(dir + "/timeseries.csv");
        out.history.write_csv(os);
        written.push_back(dir + "/timeseries.csv");
    }
    write_ledger_csv(dir + "/ledger.csv", out.ensemble, out.config.domain.dim);
    written.push_back(dir + "/ledger.csv");

    if (out.fluid) {
        for (int a = 0; a < out.config.domain.dim; ++a) {
            dump_mac_component(dir + "/fields/u_final", out.fluid->u, a, out.fluid->t, &written);
        }
    }
    // Final particle density on the fluid grid.
    {
        GridSpec g = GridSpec::make(out.config.domain, out.config.fluid.resolution);
        ScalarField rho(g);
        for (std::int64_t i = 0; i < out.ensemble.size(); ++i) {
            if (out.ensemble.status[i] == ParticleStatus::alive) {
                deposit_cell(rho, out.ensemble.x[i], out.ensemble.w[i]);
            }
        }
        double inv_vol = 1.0 / g.cell_volume();
        for (double& v : rho.v) v *= inv_vol;
        double t_final = out.fluid ? out.fluid->t : 0.0;
        dump_scalar_field(dir + "/fields/rho_final", rho, t_final, &written);
    }

    // Metric series: the W1-to-monokinetic column at the sampled times and
    // the H^-1 distance of each sampled density to the final one, plus the
    // energy decay fit. Kept separate from timeseries.csv, whose column
    // list is normative.
    if (!out.rho_samples.empty() && (out.config.metric_w1 || out.config.metric_hminus1)) {
        std::ofstream os(dir + "/metrics.csv");
        os << "t,w1_monokinetic,hminus1_to_final\n";
        os.precision(17);
        std::unique_ptr<PoissonSolver> ps;
        if (out.config.metric_hminus1) {
            ps = std::make_unique<PoissonSolver>(out.rho_samples.front().g);
        }
        const auto& rows = out.history.rows();
        for (std::size_t k = 0; k < out.rho_samples.size(); ++k) {
            double t = out.rho_sample_times[k];
            double w1 = 0.0;
            for (const auto& r : rows) {
                if (std::abs(r.t - t) < 1e-12 * (1.0 + std::abs(t))) {
                    w1 = r.m1;
                    break;
                }
            }
            double hm = 0.0;
            if (ps) hm = hminus1_distance(*ps, out.rho_samples[k], out.rho_samples.back());
            os << t << ',' << w1 << ',' << hm << '\n';
        }
        written.push_back(dir + "/metrics.csv");
        try {
            DecayFit fit = fit_decay(out.history.times(), out.history.energies());
            nlohmann::json j = {{"lambda", fit.lambda},
                                {"prefactor", fit.prefactor},
                                {"r_squared", fit.r_squared},
                                {"window", {fit.window_lo, fit.window_hi}}};
            write_text(dir + "/decay_fit.json", j.dump(2));
            written.push_back(dir + "/decay_fit.json");
        } catch (const ValidationError&) {
            // short or nonpositive-energy runs have no fit
        }
    }

    if (out.snapshots) {
        fs::create_directories(dir + "/snapshots");
        m.snapshot_stride = out.config.snapshot_stride;
        for (std::size_t k = 0; k < out.snapshots->size(); ++k) {
            char name[64];
            std::snprintf(name, sizeof(name), "/snapshots/u_%06zu", k);
            m.snapshot_times.push_back(out.snapshots->time(k));
            for (int a = 0; a < out.config.domain.dim; ++a) {
                dump_mac_component(dir + name, out.snapshots->field(k), a,
                                   out.snapshots->time(k), &written);
            }
        }
    }
    write_text(dir + "/config.json", m.config_json);
    written.push_back(dir + "/config.json");

    for (const auto& path : written) {
        ManifestFile f;
        f.path = fs::relative(path, dir).string();
        f.bytes = fs::file_size(path);
        f.checksum = fnv1a_file(path);
        m.files.push_back(f);
    }
    write_text(dir + "/manifest.json", m.to_json());
    return m;
}

std::shared_ptr<FlowSnapshotSeries> load_snapshots(const RunManifest& m, const std::string& dir,
                                                   const RunConfig& cfg) {
    if (m.snapshot_times.empty()) {
        throw ValidationError("replay: manifest has no snapshots");
    }
    auto series = std::make_shared<FlowSnapshotSeries>(cfg.domain, 1);
    if (m.snapshot_stride == 1) series->set_uniform_dt(cfg.fluid.dt);
    GridSpec g = GridSpec::make(cfg.domain, cfg.fluid.resolution);
    for (std::size_t k = 0; k < m.snapshot_times.size(); ++k) {
        char name[64];
        std::snprintf(name, sizeof(name), "/snapshots/u_%06zu", k);
        MacField u(g);
        for (int a = 0; a < cfg.domain.dim; ++a) load_mac_component(dir + name, u, a);
        series->push_back(m.snapshot_times[k], std::move(u));
    }
    return series;
}

}  // namespace vnslab
