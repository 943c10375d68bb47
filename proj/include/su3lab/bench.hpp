#pragma once

#include <algorithm>
#include <chrono>
#include <cstdint>
#include <cstdio>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "su3lab/errors.hpp"
#include "su3lab/kernel.hpp"
#include "su3lab/layout.hpp"
#include "su3lab/roofline.hpp"

namespace su3lab {

enum class ReportFormat { Csv, Json, Text };

inline std::optional<ReportFormat> parse_format(std::string_view s) {
    if (s == "csv") return ReportFormat::Csv;
    if (s == "json") return ReportFormat::Json;
    if (s == "text") return ReportFormat::Text;
    return std::nullopt;
}

inline std::optional<PlacementPolicy> parse_placement(std::string_view s) {
    if (s == "compute") return PlacementPolicy::TouchByComputePartition;
    if (s == "sequential") return PlacementPolicy::TouchSequential;
    if (s == "interleaved") return PlacementPolicy::Interleaved;
    return std::nullopt;
}

inline std::optional<Precision> parse_precision(std::string_view s) {
    if (s == "f32") return Precision::F32;
    if (s == "f64") return Precision::F64;
    return std::nullopt;
}

struct RunConfig {
    int L = 16;
    int iterations = 1;
    int warmups = 0;
    int workers = 1;
    Variant variant = Variant::SiteParallel;
    bool transpose_b = false;
    Precision precision = Precision::F32;
    PlacementPolicy placement = PlacementPolicy::TouchByComputePartition;
    Pinning pin = Pinning::None;
    bool per_iteration = false;
};

inline void validate(const RunConfig &cfg) {
    if (cfg.L < 1)
        throw ConfigError("lattice dimension must be >= 1");
    if (cfg.iterations < 1)
        throw ConfigError("iteration count must be >= 1");
    if (cfg.warmups < 0)
        throw ConfigError("warmup count must be >= 0");
    if (cfg.workers < 1)
        throw ConfigError("worker count must be >= 1");
}

struct BenchResult {
    // configuration echo
    Variant variant = Variant::SiteParallel;
    bool transpose_b = false;
    int L = 0;
    Precision precision = Precision::F32;
    int workers = 0;
    int iterations = 0;
    int warmups = 0;
    PlacementPolicy placement = PlacementPolicy::TouchByComputePartition;
    Pinning pin = Pinning::None;
    bool per_iteration = false;
    std::string partition;
    // measurement
    double seconds = 0;
    double gflops = 0;
    double gbytes_per_s = 0;
    double ai = 0;
    std::uint64_t flops = 0; // total over the timed iterations
    bool verified = false;
    double checksum_real = 0;
    double checksum_imag = 0;
    double max_deviation = 0;
    double speedup = 0; // filled by scaling_sweep, vs its first row
    std::optional<double> iter_min_seconds;
    std::optional<double> iter_median_seconds;
    PlacementReport placement_report;
};

namespace detail {

template <typename T>
BenchResult run_benchmark_t(const RunConfig &cfg) {
    using clock = std::chrono::steady_clock;

    auto a = allocate_lattice<T>(cfg.L, cfg.placement);
    auto c = allocate_lattice<T>(cfg.L, cfg.placement);

    // canonical initialization: every output element lands on (1,0)
    const Partition part = make_partition(a.size(), cfg.workers, cfg.placement);
    init_lattice(a, Complex<T>(T(1), T(0)), part);
    LinkSet<T> b;
    init_links(b, Complex<T>(T(1) / T(3), T(0)));
    // c stays untouched here: its pages are first touched by the compute
    // partition during the warmup/timed iterations

    WorkerPool pool(cfg.workers, cfg.pin);

    KernelResult kr;
    for (int w = 0; w < cfg.warmups; ++w)
        kr = run_kernel(a, b, c, cfg.variant, cfg.transpose_b, pool);

    std::vector<double> iter_seconds;
    if (cfg.per_iteration)
        iter_seconds.reserve(static_cast<std::size_t>(cfg.iterations));

    const auto t0 = clock::now();
    if (cfg.per_iteration) {
        for (int i = 0; i < cfg.iterations; ++i) {
            const auto s0 = clock::now();
            kr = run_kernel(a, b, c, cfg.variant, cfg.transpose_b, pool);
            iter_seconds.push_back(std::chrono::duration<double>(clock::now() - s0).count());
        }
    } else {
        for (int i = 0; i < cfg.iterations; ++i)
            kr = run_kernel(a, b, c, cfg.variant, cfg.transpose_b, pool);
    }
    const double seconds = std::chrono::duration<double>(clock::now() - t0).count();

    const VerificationReport vr = verify(c);

    BenchResult res;
    res.variant = cfg.variant;
    res.transpose_b = cfg.transpose_b;
    res.L = cfg.L;
    res.precision = cfg.precision;
    res.workers = cfg.workers;
    res.iterations = cfg.iterations;
    res.warmups = cfg.warmups;
    res.placement = cfg.placement;
    res.pin = cfg.pin;
    res.per_iteration = cfg.per_iteration;
    res.partition = kr.partition;
    res.seconds = seconds;
    res.flops = kr.flops * static_cast<std::uint64_t>(cfg.iterations);
    res.ai = arithmetic_intensity(su3_kernel_spec(cfg.precision));
    res.gflops = seconds > 0 ? static_cast<double>(res.flops) / (seconds * 1e9) : 0;
    res.gbytes_per_s = res.gflops / res.ai;
    res.verified = vr.ok;
    res.checksum_real = vr.sum_real;
    res.checksum_imag = vr.sum_imag;
    res.max_deviation = vr.max_deviation;
    if (!iter_seconds.empty()) {
        std::vector<double> sorted = iter_seconds;
        std::sort(sorted.begin(), sorted.end());
        res.iter_min_seconds = sorted.front();
        res.iter_median_seconds = sorted[sorted.size() / 2];
    }
    res.placement_report = placement_report(a);
    return res;
}

} // namespace detail

// Allocates, canonically initializes, runs `warmups` untimed and
// `iterations` timed kernel executions, verifies the output and derives the
// reporting rates. gbytes/s is gflops divided by the kernel's arithmetic
// intensity (read A + write C, B ignored).
inline BenchResult run_benchmark(const RunConfig &cfg) {
    validate(cfg);
    return cfg.precision == Precision::F32 ? detail::run_benchmark_t<float>(cfg)
                                           : detail::run_benchmark_t<double>(cfg);
}

// One benchmark per worker count (ascending), each with a freshly allocated
// and initialized lattice under the configured placement policy.
inline std::vector<BenchResult> scaling_sweep(RunConfig cfg, std::span<const int> worker_counts) {
    if (worker_counts.empty())
        throw ConfigError("worker sweep list is empty");
    for (std::size_t i = 1; i < worker_counts.size(); ++i)
        if (worker_counts[i] <= worker_counts[i - 1])
            throw ConfigError("worker sweep list must be strictly ascending");
    std::vector<BenchResult> out;
    out.reserve(worker_counts.size());
    for (int w : worker_counts) {
        cfg.workers = w;
        out.push_back(run_benchmark(cfg));
        out.back().speedup = out.front().gflops > 0 ? out.back().gflops / out.front().gflops : 0;
    }
    return out;
}

inline double efficiency_pct(double measured_gflops, double bound_gflops) {
    if (measured_gflops <= 0 || bound_gflops <= 0)
        return 0;
    return measured_gflops / bound_gflops * 100.0;
}

struct ModelComparison {
    RooflineResult bounds;
    BenchResult measured;
    double efficiency = 0; // percent of the attainable bound
};

inline ModelComparison compare_to_model(const BenchResult &measured, const MachineSpec &m,
                                        const std::optional<InstructionMix> &mix,
                                        Scope scope = Scope::Socket) {
    ModelComparison cmp;
    cmp.bounds = attainable(m, su3_kernel_spec(measured.precision), mix, scope);
    cmp.measured = measured;
    cmp.efficiency = efficiency_pct(measured.gflops, cmp.bounds.bound_gfs);
    return cmp;
}

inline ModelComparison model_report(const RunConfig &cfg, const MachineSpec &m,
                                    const std::optional<InstructionMix> &mix = std::nullopt,
                                    Scope scope = Scope::Socket) {
    return compare_to_model(run_benchmark(cfg), m, mix, scope);
}

// ---------------------------------------------------------------------------
// Report emission
// ---------------------------------------------------------------------------

inline constexpr std::string_view csv_header =
    "variant,L,precision,workers,iterations,warmups,seconds,gflops,gbytes_per_s,verified";

namespace detail {

inline std::string fmt(const char *f, double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), f, v);
    return buf;
}

inline nlohmann::json result_to_json(const BenchResult &r) {
    nlohmann::json j{{"variant", std::string(to_string(r.variant))},
                     {"transpose_b", r.transpose_b},
                     {"L", r.L},
                     {"precision", std::string(to_string(r.precision))},
                     {"workers", r.workers},
                     {"iterations", r.iterations},
                     {"warmups", r.warmups},
                     {"placement", std::string(to_string(r.placement))},
                     {"pin", r.pin == Pinning::Compact ? "compact" : "none"},
                     {"per_iteration", r.per_iteration},
                     {"partition", r.partition},
                     {"seconds", r.seconds},
                     {"gflops", r.gflops},
                     {"gbytes_per_s", r.gbytes_per_s},
                     {"ai", r.ai},
                     {"flops", r.flops},
                     {"verified", r.verified},
                     {"checksum_real", r.checksum_real},
                     {"checksum_imag", r.checksum_imag},
                     {"max_deviation", r.max_deviation},
                     {"speedup", r.speedup}};
    if (r.iter_min_seconds)
        j["iter_min_seconds"] = *r.iter_min_seconds;
    if (r.iter_median_seconds)
        j["iter_median_seconds"] = *r.iter_median_seconds;
    nlohmann::json pj{{"supported", r.placement_report.supported},
                      {"total_bytes", r.placement_report.total_bytes}};
    if (r.placement_report.supported) {
        nlohmann::json domains = nlohmann::json::object();
        for (const auto &[node, bytes] : r.placement_report.bytes_by_domain)
            domains[std::to_string(node)] = bytes;
        pj["bytes_by_domain"] = domains;
    }
    j["placement_report"] = pj;
    return j;
}

} // namespace detail

inline std::string emit_report(std::span<const BenchResult> results, ReportFormat format) {
    std::string out;
    switch (format) {
    case ReportFormat::Csv: {
        out += csv_header;
        out += '\n';
        for (const BenchResult &r : results) {
            out += std::string(to_string(r.variant));
            out += ',' + std::to_string(r.L);
            out += ',' + std::string(to_string(r.precision));
            out += ',' + std::to_string(r.workers);
            out += ',' + std::to_string(r.iterations);
            out += ',' + std::to_string(r.warmups);
            out += ',' + detail::fmt("%.9g", r.seconds);
            out += ',' + detail::fmt("%.9g", r.gflops);
            out += ',' + detail::fmt("%.9g", r.gbytes_per_s);
            out += r.verified ? ",true\n" : ",false\n";
        }
        return out;
    }
    case ReportFormat::Json: {
        nlohmann::json arr = nlohmann::json::array();
        for (const BenchResult &r : results)
            arr.push_back(detail::result_to_json(r));
        return arr.dump(2) + "\n";
    }
    case ReportFormat::Text: {
        char line[256];
        std::snprintf(line, sizeof(line), "%-22s %-4s %-5s %-8s %-6s %-10s %10s %10s %9s %-8s\n",
                      "VARIANT", "L", "PREC", "WORKERS", "ITERS", "SECONDS", "GFLOPS",
                      "GBYTES", "SPEEDUP", "VERIFIED");
        out += line;
        for (const BenchResult &r : results) {
            std::snprintf(line, sizeof(line), "%-22s %-4d %-5s %-8d %-6d %-10.4f %10.3f %10.3f %9.2f %-8s\n",
                          std::string(to_string(r.variant)).c_str(), r.L,
                          std::string(to_string(r.precision)).c_str(), r.workers,
                          r.iterations, r.seconds, r.gflops, r.gbytes_per_s,
                          r.speedup > 0 ? r.speedup : 1.0, r.verified ? "yes" : "NO");
            out += line;
        }
        return out;
    }
    }
    throw ConfigError("unknown report format");
}

} // namespace su3lab
