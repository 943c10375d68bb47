// Benchmark driver: timed kernel runs, strong-scaling sweeps, roofline
// tables, pipeline simulation and machine-readable reporting.
//
// Exit codes: 0 success and verified, 1 verification failure,
//             2 configuration error, 3 resource error.

#include <algorithm>
#include <cstdio>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>

#include "su3lab/bench.hpp"
#include "su3lab/counted.hpp"
#include "su3lab/issue_sim.hpp"
#include "su3lab/kernel.hpp"
#include "su3lab/roofline.hpp"

using namespace su3lab;

namespace {

void print_roofline_table(const MachineSpec &m, const KernelSpec &k) {
    const RooflineTable t = roofline_table(m, k);
    std::printf("Roofline ceilings for %s, AI %.3f flops/byte\n", m.name.c_str(),
                arithmetic_intensity(k));
    for (std::size_t r = 0; r < 3; ++r) {
        std::printf("%s\n", t.row_labels[r].c_str());
        std::printf("%-14s", "");
        for (int lanes = t.lanes; lanes >= 1; --lanes)
            std::printf(" SIMD=%-2d", lanes);
        std::printf("\n%-14s", "Single socket");
        for (double v : t.socket[r])
            std::printf(" %7.1f", v);
        std::printf("\n%-14s", "Single core");
        for (double v : t.core[r])
            std::printf(" %7.1f", v);
        std::printf("\n");
    }
}

void print_model(const ModelComparison &cmp, const MachineSpec &m, Scope scope) {
    std::printf("model %s (%s scope): compute %.2f GF/s, bandwidth %.2f GF/s",
                m.name.c_str(), std::string(to_string(scope)).c_str(),
                cmp.bounds.compute_gfs, cmp.bounds.bandwidth_gfs);
    if (cmp.bounds.issue_gfs)
        std::printf(", issue %.2f GF/s", *cmp.bounds.issue_gfs);
    std::printf("\nattainable %.2f GF/s (%s-limited); measured %.3f GF/s = %.1f%%\n",
                cmp.bounds.bound_gfs, cmp.bounds.limiter.c_str(), cmp.measured.gflops,
                cmp.efficiency);
    if (cmp.efficiency > 100.0)
        std::fprintf(stderr, "warning: measured rate above the model bound; "
                             "check the machine spec against this host\n");
    const double bw = scope_bandwidth_gbs(m, scope);
    if (cmp.measured.gbytes_per_s > bw)
        std::fprintf(stderr, "warning: measured %.2f GB/s exceeds the spec bandwidth %.2f GB/s\n",
                     cmp.measured.gbytes_per_s, bw);
}

int run_simulation(const MachineSpec &m, const InstructionMix &mix, const Trace &trace,
                   int threads_per_pipeline, int repeat) {
    const CoreConfig cfg = core_config_from(m, threads_per_pipeline);
    const SimResult r = simulate(cfg, trace, repeat);
    const double bound = issue_bound(mix, m.pipeline_clock_ghz, m.pipelines_per_core);
    std::printf("pipelines %d, threads/pipeline %d, repeat %d\n", cfg.pipelines,
                cfg.threads_per_pipeline, repeat);
    std::printf("cycles %llu, instructions %llu, flops %llu\n",
                static_cast<unsigned long long>(r.cycles),
                static_cast<unsigned long long>(r.instructions_issued),
                static_cast<unsigned long long>(r.flops_done));
    std::printf("ipc %.4f aggregate, %.4f per pipeline\n", r.ipc, r.ipc_per_pipeline);
    std::printf("simulated %.4f flops/cycle -> %.4f GF/s at %.2f GHz\n", r.flops_per_cycle,
                r.flops_per_cycle * m.pipeline_clock_ghz, m.pipeline_clock_ghz);
    std::printf("analytic issue bound %.4f GF/s (%.1f%% of bound reached)\n", bound,
                bound > 0 ? r.flops_per_cycle * m.pipeline_clock_ghz / bound * 100.0 : 0.0);
    return 0;
}

int run_flop_counter(const RunConfig &cfg) {
    using CD = Counted<double>;
    auto a = allocate_lattice<CD>(cfg.L);
    auto c = allocate_lattice<CD>(cfg.L);
    init_lattice(a, Complex<CD>(CD(1.0), CD(0.0)),
                 make_partition(a.size(), cfg.workers, cfg.placement));
    LinkSet<CD> b;
    init_links(b, Complex<CD>(CD(1.0 / 3.0), CD(0.0)));
    CD::reset_counts();
    const KernelResult kr = run_kernel(a, b, c, cfg.variant, cfg.transpose_b, cfg.workers);
    const std::uint64_t expected = Lattice<CD>::sites_for(cfg.L) * 864ull;
    std::printf("counted %llu muls + %llu adds = %llu flops; expected %llu (864 x L^4)\n",
                static_cast<unsigned long long>(CD::muls()),
                static_cast<unsigned long long>(CD::adds()),
                static_cast<unsigned long long>(CD::flops()),
                static_cast<unsigned long long>(expected));
    if (CD::flops() != expected || kr.flops != expected) {
        std::fprintf(stderr, "flop accounting mismatch\n");
        return 1;
    }
    return 0;
}

} // namespace

int main(int argc, char **argv) {
    CLI::App app{"SU(3) lattice multiply benchmark and performance models"};

    RunConfig cfg;
    cfg.workers = static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
    cfg.iterations = 10;
    cfg.warmups = 1;

    std::string variant_name{to_string(cfg.variant)};
    std::string precision_name{to_string(cfg.precision)};
    std::string placement_name{to_string(cfg.placement)};
    std::string pin_name = "none";
    std::string format_name = "text";
    std::string machine_name;
    std::string mix_name;
    std::vector<int> sweep;
    bool simulate_mode = false;
    bool table1 = false;
    bool count_flops = false;
    int threads_per_pipeline = 16;

    app.add_option("-L", cfg.L, "lattice dimension (L^4 sites)")->capture_default_str();
    app.add_option("-I", cfg.iterations, "timed iterations")->capture_default_str();
    app.add_option("-W", cfg.warmups, "untimed warmup iterations")->capture_default_str();
    app.add_option("-T", cfg.workers, "worker threads")->capture_default_str();
    app.add_option("--variant", variant_name,
                   "kernel variant: collapsed-inner|manual-distribution|work-items|"
                   "collapse-all|site-parallel|blocked-gemm")
        ->capture_default_str();
    app.add_flag("--transpose-b", cfg.transpose_b, "use per-worker transposed B copies");
    app.add_option("--precision", precision_name, "f32|f64")->capture_default_str();
    app.add_option("--placement", placement_name, "compute|sequential|interleaved")
        ->capture_default_str();
    app.add_option("--pin", pin_name, "compact|none")->capture_default_str();
    app.add_option("--machine", machine_name,
                   "machine spec: preset (clx8280, piuma-core) or JSON file");
    app.add_option("--mix", mix_name, "instruction mix for issue bounds: dot|blocked");
    app.add_option("--sweep", sweep, "ascending worker counts for a strong-scaling sweep")
        ->delimiter(',');
    app.add_option("--format", format_name, "csv|json|text")->capture_default_str();
    app.add_flag("--simulate", simulate_mode, "run the pipeline simulator instead of the kernel");
    app.add_flag("--table1", table1, "print the roofline ceiling table and exit");
    app.add_flag("--per-iteration", cfg.per_iteration, "record per-iteration min/median times");
    app.add_flag("--count-flops", count_flops, "debug: run one instrumented iteration and exit");
    app.add_option("--threads-per-pipeline", threads_per_pipeline,
                   "simulator threads per pipeline")
        ->capture_default_str();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp &e) {
        return app.exit(e);
    } catch (const CLI::ParseError &e) {
        app.exit(e);
        return 2;
    }

    try {
        if (auto v = parse_variant(variant_name))
            cfg.variant = *v;
        else
            throw ConfigError("unknown variant: " + variant_name);
        if (auto p = parse_precision(precision_name))
            cfg.precision = *p;
        else
            throw ConfigError("unknown precision: " + precision_name);
        if (auto p = parse_placement(placement_name))
            cfg.placement = *p;
        else
            throw ConfigError("unknown placement policy: " + placement_name);
        if (pin_name == "compact")
            cfg.pin = Pinning::Compact;
        else if (pin_name != "none")
            throw ConfigError("unknown pin mode: " + pin_name);
        const auto format = parse_format(format_name);
        if (!format)
            throw ConfigError("unknown report format: " + format_name);

        std::optional<InstructionMix> mix;
        std::optional<Trace> trace;
        if (!mix_name.empty()) {
            if (mix_name == "dot") {
                mix = dot_product_mix();
                trace = trace_dot_product();
            } else if (mix_name == "blocked") {
                mix = blocked_gemm_mix();
                trace = trace_blocked_gemm();
            } else {
                throw ConfigError("unknown instruction mix: " + mix_name);
            }
        }

        if (table1) {
            const MachineSpec m =
                machine_name.empty() ? clx8280_spec() : resolve_machine(machine_name);
            print_roofline_table(m, su3_kernel_spec(cfg.precision));
            return 0;
        }

        if (simulate_mode) {
            const MachineSpec m =
                machine_name.empty() ? piuma_core_spec() : resolve_machine(machine_name);
            if (!mix) {
                mix = dot_product_mix();
                trace = trace_dot_product();
            }
            return run_simulation(m, *mix, *trace, threads_per_pipeline, cfg.iterations);
        }

        if (count_flops) {
            validate(cfg);
            return run_flop_counter(cfg);
        }

        if (cfg.pin == Pinning::Compact) {
            // pinning is best effort; warn once up front if the platform refuses
            WorkerPool probe(1, Pinning::Compact);
            if (!probe.pinned()) {
                std::fprintf(stderr, "warning: thread pinning not supported here, ignoring --pin\n");
                cfg.pin = Pinning::None;
            }
        }

        std::vector<BenchResult> results;
        if (!sweep.empty()) {
            results = scaling_sweep(cfg, sweep);
        } else {
            results.push_back(run_benchmark(cfg));
        }

        std::fputs(emit_report(results, *format).c_str(), stdout);

        if (!machine_name.empty()) {
            const MachineSpec m = resolve_machine(machine_name);
            const ModelComparison cmp =
                compare_to_model(results.back(), m, mix, Scope::Socket);
            print_model(cmp, m, Scope::Socket);
        }

        for (const BenchResult &r : results)
            if (!r.verified) {
                std::fprintf(stderr, "verification FAILED (max deviation %g)\n",
                             r.max_deviation);
                return 1;
            }
        return 0;
    } catch (const ConfigError &e) {
        std::fprintf(stderr, "configuration error: %s\n", e.what());
        return 2;
    } catch (const ResourceError &e) {
        std::fprintf(stderr, "resource error: %s\n", e.what());
        return 3;
    }
}
