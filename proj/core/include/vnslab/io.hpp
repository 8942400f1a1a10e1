#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "vnslab/sim.hpp"

namespace vnslab {

// Field dump format: row-major 64-bit little-endian floats per component
// with a JSON sidecar {dim, shape, component, time, dx}.
void dump_scalar_field(const std::string& path_base, const ScalarField& f,
                       double time, std::vector<std::string>* written = nullptr);
void dump_mac_component(const std::string& path_base, const MacField& u, int a,
                        double time, std::vector<std::string>* written = nullptr);
ScalarField load_scalar_field(const std::string& path_base, const GridSpec& g);
void load_mac_component(const std::string& path_base, MacField& u, int a);

void write_ledger_csv(const std::string& path, const ParticleEnsemble& e, int dim);

// Trajectory dump: CSV rows (s, x..., v..., detJ) of the characteristic
// through (t0, z), sampled at `samples` evenly spaced times in [t0, t1].
void write_trajectory_csv(const std::string& path, const FlowSnapshotSeries& s,
                          const PhaseState& z, double t0, double t1, int samples);

std::uint64_t fnv1a_file(const std::string& path);
std::uint64_t fnv1a_bytes(const void* data, std::size_t n);

struct ManifestFile {
    std::string path;  // relative to the output directory
    std::uint64_t bytes = 0;
    std::uint64_t checksum = 0;
};

struct RunManifest {
    std::string config_json;
    std::uint64_t config_hash = 0;
    std::string version;
    std::string created;
    bool failed = false;
    std::string error;
    int snapshot_stride = 0;
    std::vector<double> snapshot_times;
    std::vector<ManifestFile> files;

    std::string to_json() const;
    static RunManifest from_json_file(const std::string& path);
};

// Persist a finished run: timeseries.csv, ledger.csv, field dumps, snapshot
// dumps (per the stride), manifest.json. Returns the manifest.
RunManifest emit_run_artifacts(const RunOutputs& out, const std::string& dir);

// Reassemble the snapshot series of a persisted run from its manifest.
std::shared_ptr<FlowSnapshotSeries> load_snapshots(const RunManifest& m,
                                                   const std::string& dir,
                                                   const RunConfig& cfg);

// Config (de)serialization; the schema is documented in the README.
std::string config_to_json(const RunConfig& cfg);
RunConfig config_from_json(const std::string& json_text);
RunConfig config_from_file(const std::string& path);

}  // namespace vnslab
