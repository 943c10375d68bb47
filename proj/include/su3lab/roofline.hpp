#pragma once

#include <algorithm>
#include <array>
#include <cstdint>
#include <fstream>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "su3lab/errors.hpp"
#include "su3lab/types.hpp"

namespace su3lab {

// ---------------------------------------------------------------------------
// Machine and kernel descriptions
// ---------------------------------------------------------------------------

struct MachineSpec {
    std::string name;
    double clock_ghz = 0;
    int simd_units = 1;
    int simd_lanes = 1;
    bool fma = false; // 2 flops per lane per cycle if true, else 1
    int cores_per_socket = 1;
    int sockets = 1;
    double bandwidth_per_socket_gbs = 0;
    // issue-bound cores
    int pipelines_per_core = 1;
    double pipeline_clock_ghz = 0;
    int load_latency_cycles = 20;
    int store_latency_cycles = 1;
    int fma_latency_cycles = 4;
};

inline void validate(const MachineSpec &m) {
    if (m.clock_ghz <= 0 || m.simd_units < 1 || m.simd_lanes < 1 ||
        m.cores_per_socket < 1 || m.sockets < 1 || m.bandwidth_per_socket_gbs <= 0 ||
        m.pipelines_per_core < 1 || m.pipeline_clock_ghz <= 0 ||
        m.load_latency_cycles < 1 || m.store_latency_cycles < 1 || m.fma_latency_cycles < 1)
        throw ConfigError("machine spec '" + m.name + "' has a non-positive field");
}

// 28-core 2.7 GHz socket pair, 2 SIMD units x 8 lanes with FMA, 105 GB/s per
// socket.
inline MachineSpec clx8280_spec() {
    return {.name = "clx8280",
            .clock_ghz = 2.7,
            .simd_units = 2,
            .simd_lanes = 8,
            .fma = true,
            .cores_per_socket = 28,
            .sockets = 2,
            .bandwidth_per_socket_gbs = 105.0,
            .pipelines_per_core = 1,
            .pipeline_clock_ghz = 2.7};
}

// Single multithreaded scalar core: four single-issue pipelines at 1 GHz
// with FMA (8 GF/s peak) and 6.4 GB/s of bandwidth. Pipeline clock and count
// are derived, not vendor-published; override via a machine file if needed.
inline MachineSpec piuma_core_spec() {
    return {.name = "piuma-core",
            .clock_ghz = 1.0,
            .simd_units = 4,
            .simd_lanes = 1,
            .fma = true,
            .cores_per_socket = 1,
            .sockets = 1,
            .bandwidth_per_socket_gbs = 6.4,
            .pipelines_per_core = 4,
            .pipeline_clock_ghz = 1.0};
}

struct KernelSpec {
    std::uint64_t flops_per_site = 0;
    std::uint64_t bytes_per_site = 0; // streamed bytes: read A + write C, B ignored
    Precision precision = Precision::F32;
};

inline KernelSpec su3_kernel_spec(Precision p) {
    const std::uint64_t site =
        p == Precision::F32 ? sizeof(Site<float>) : sizeof(Site<double>);
    return {864, 2 * site, p};
}

struct InstructionMix {
    std::uint64_t loads = 0;
    std::uint64_t stores = 0;
    std::uint64_t fmas = 0;
    std::uint64_t flops = 0;

    std::uint64_t total_instructions() const { return loads + stores + fmas; }
};

// Innermost dot product, per output element: 12 loads, 2 stores, 12 FMAs for
// 24 flops.
inline InstructionMix dot_product_mix() { return {12, 2, 12, 24}; }

// Register-blocked 2x3 + 1x3 multiply, per link: 54 loads, 18 stores,
// 108 FMAs for 216 flops.
inline InstructionMix blocked_gemm_mix() { return {54, 18, 108, 216}; }

// ---------------------------------------------------------------------------
// Bounds
// ---------------------------------------------------------------------------

enum class Scope { Core, Socket, System };

constexpr std::string_view to_string(Scope s) {
    switch (s) {
    case Scope::Core: return "core";
    case Scope::Socket: return "socket";
    case Scope::System: return "system";
    }
    return "?";
}

inline double arithmetic_intensity(const KernelSpec &k) {
    if (k.bytes_per_site == 0)
        throw ConfigError("kernel spec has zero bytes per site");
    return static_cast<double>(k.flops_per_site) / static_cast<double>(k.bytes_per_site);
}

inline double compute_peak(const MachineSpec &m, Scope scope) {
    double gfs = m.clock_ghz * m.simd_units * m.simd_lanes * (m.fma ? 2 : 1);
    if (scope != Scope::Core)
        gfs *= m.cores_per_socket;
    if (scope == Scope::System)
        gfs *= m.sockets;
    return gfs;
}

// A single core is allowed to draw the whole socket's bandwidth.
inline double scope_bandwidth_gbs(const MachineSpec &m, Scope scope) {
    return scope == Scope::System ? m.bandwidth_per_socket_gbs * m.sockets
                                  : m.bandwidth_per_socket_gbs;
}

inline double bandwidth_bound(const KernelSpec &k, double bandwidth_gbs) {
    if (bandwidth_gbs <= 0)
        throw ConfigError("bandwidth must be positive");
    return arithmetic_intensity(k) * bandwidth_gbs;
}

// Throughput limit of single-issue pipelines that must interleave loads and
// stores with the FMAs on the same issue slot: flops per instruction times
// issue rate.
inline double issue_bound(const InstructionMix &mix, double pipeline_clock_ghz, int pipelines) {
    const std::uint64_t total = mix.total_instructions();
    if (total == 0)
        throw ConfigError("instruction mix is empty");
    if (mix.flops > 2 * mix.fmas)
        throw ConfigError("instruction mix delivers more than 2 flops per FMA");
    return static_cast<double>(mix.flops) / static_cast<double>(total) *
           pipeline_clock_ghz * pipelines;
}

inline int scope_pipelines(const MachineSpec &m, Scope scope) {
    int p = m.pipelines_per_core;
    if (scope != Scope::Core)
        p *= m.cores_per_socket;
    if (scope == Scope::System)
        p *= m.sockets;
    return p;
}

struct RooflineResult {
    double compute_gfs = 0;
    double bandwidth_gfs = 0;
    std::optional<double> issue_gfs;
    double bound_gfs = 0;
    std::string limiter; // "compute" | "bandwidth" | "issue"
};

// Attainable performance: the minimum of the compute, bandwidth and (when an
// instruction mix is given) issue-rate bounds.
inline RooflineResult attainable(const MachineSpec &m, const KernelSpec &k,
                                 const std::optional<InstructionMix> &mix, Scope scope) {
    validate(m);
    RooflineResult r;
    r.compute_gfs = compute_peak(m, scope);
    r.bandwidth_gfs = bandwidth_bound(k, scope_bandwidth_gbs(m, scope));
    r.bound_gfs = r.compute_gfs;
    r.limiter = "compute";
    if (r.bandwidth_gfs < r.bound_gfs) {
        r.bound_gfs = r.bandwidth_gfs;
        r.limiter = "bandwidth";
    }
    if (mix) {
        r.issue_gfs = issue_bound(*mix, m.pipeline_clock_ghz, scope_pipelines(m, scope));
        if (*r.issue_gfs < r.bound_gfs) {
            r.bound_gfs = *r.issue_gfs;
            r.limiter = "issue";
        }
    }
    return r;
}

// ---------------------------------------------------------------------------
// Roofline ceiling grid
// ---------------------------------------------------------------------------

// Three unit/FMA configurations x {socket, core} x lane counts max..1.
// Socket cells are min(compute, bandwidth); core cells are compute peaks.
struct RooflineTable {
    std::array<std::string, 3> row_labels;
    int lanes = 0; // columns run lanes, lanes-1, ..., 1
    std::array<std::vector<double>, 3> socket;
    std::array<std::vector<double>, 3> core;
};

inline RooflineTable roofline_table(const MachineSpec &m, const KernelSpec &k) {
    validate(m);
    RooflineTable t;
    t.lanes = m.simd_lanes;
    t.row_labels = {"with " + std::to_string(m.simd_units) + "x SIMD units",
                    "with 1x SIMD units or " + std::to_string(m.simd_units) +
                        "x units w/no FMA",
                    "with 1x SIMD units & no FMA"};
    const double bw_gfs = bandwidth_bound(k, scope_bandwidth_gbs(m, Scope::Socket));
    const struct {
        int units;
        bool fma;
    } rows[3] = {{m.simd_units, m.fma}, {1, m.fma}, {1, false}};
    for (int r = 0; r < 3; ++r) {
        for (int lanes = m.simd_lanes; lanes >= 1; --lanes) {
            const double core =
                m.clock_ghz * rows[r].units * lanes * (rows[r].fma ? 2 : 1);
            const double socket = core * m.cores_per_socket;
            t.core[static_cast<std::size_t>(r)].push_back(core);
            t.socket[static_cast<std::size_t>(r)].push_back(std::min(socket, bw_gfs));
        }
    }
    return t;
}

// ---------------------------------------------------------------------------
// Machine spec files
// ---------------------------------------------------------------------------

// JSON object with the documented keys; missing keys fall back to defaults
// where one exists, required keys raise a configuration error.
inline MachineSpec machine_spec_from_json(const nlohmann::json &j, const std::string &name_hint) {
    MachineSpec m;
    try {
        m.name = j.value("name", name_hint);
        m.clock_ghz = j.at("clock_ghz").get<double>();
        m.simd_units = j.at("simd_units").get<int>();
        m.simd_lanes = j.at("simd_lanes").get<int>();
        m.fma = j.at("fma").get<bool>();
        m.cores_per_socket = j.at("cores_per_socket").get<int>();
        m.sockets = j.at("sockets").get<int>();
        m.bandwidth_per_socket_gbs = j.at("bandwidth_per_socket_gbs").get<double>();
        m.pipelines_per_core = j.value("pipelines_per_core", 1);
        m.pipeline_clock_ghz = j.value("pipeline_clock_ghz", m.clock_ghz);
        m.load_latency_cycles = j.value("load_latency_cycles", 20);
        m.store_latency_cycles = j.value("store_latency_cycles", 1);
        m.fma_latency_cycles = j.value("fma_latency_cycles", 4);
    } catch (const nlohmann::json::exception &e) {
        throw ConfigError(std::string("invalid machine spec: ") + e.what());
    }
    validate(m);
    return m;
}

inline nlohmann::json machine_spec_to_json(const MachineSpec &m) {
    return {{"name", m.name},
            {"clock_ghz", m.clock_ghz},
            {"simd_units", m.simd_units},
            {"simd_lanes", m.simd_lanes},
            {"fma", m.fma},
            {"cores_per_socket", m.cores_per_socket},
            {"sockets", m.sockets},
            {"bandwidth_per_socket_gbs", m.bandwidth_per_socket_gbs},
            {"pipelines_per_core", m.pipelines_per_core},
            {"pipeline_clock_ghz", m.pipeline_clock_ghz},
            {"load_latency_cycles", m.load_latency_cycles},
            {"store_latency_cycles", m.store_latency_cycles},
            {"fma_latency_cycles", m.fma_latency_cycles}};
}

inline std::optional<MachineSpec> machine_preset(std::string_view name) {
    if (name == "clx8280")
        return clx8280_spec();
    if (name == "piuma-core")
        return piuma_core_spec();
    return std::nullopt;
}

inline MachineSpec load_machine_spec(const std::string &path) {
    std::ifstream in(path);
    if (!in)
        throw ConfigError("cannot open machine spec file: " + path);
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception &e) {
        throw ConfigError("machine spec file " + path + " is not valid JSON: " + e.what());
    }
    return machine_spec_from_json(j, path);
}

// Preset name or path to a JSON machine file.
inline MachineSpec resolve_machine(const std::string &name_or_path) {
    if (auto preset = machine_preset(name_or_path))
        return *preset;
    return load_machine_spec(name_or_path);
}

} // namespace su3lab
