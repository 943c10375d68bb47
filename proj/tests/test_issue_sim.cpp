#include <doctest.h>

#include "su3lab/issue_sim.hpp"

using namespace su3lab;

TEST_CASE("dot product trace counts") {
    const Trace t = trace_dot_product();
    CHECK(t.size() == 26);
    const InstructionMix mix = to_instruction_mix(t);
    CHECK(mix.loads == 12);
    CHECK(mix.stores == 2);
    CHECK(mix.fmas == 12);
    CHECK(mix.flops == 24);
    // flops per instruction 24/26, one full site = 36 elements
    CHECK(mix.flops * 36 == 864);
    CHECK(mix.total_instructions() * 36 == 936);
}

TEST_CASE("blocked gemm trace counts") {
    const Trace t = trace_blocked_gemm();
    CHECK(t.size() == 180);
    const InstructionMix mix = to_instruction_mix(t);
    CHECK(mix.loads == 54);
    CHECK(mix.stores == 18);
    CHECK(mix.fmas == 108);
    CHECK(mix.flops == 216);
    // per site: 4 links
    CHECK(mix.total_instructions() * 4 == 720);
    CHECK(mix.flops * 4 == 864);
    // 1.2 flops per instruction at unit clock
    CHECK(static_cast<double>(mix.flops) / mix.total_instructions() == 1.2);
}

TEST_CASE("single thread with unit latencies runs at ipc 1") {
    CoreConfig cfg{1, 1, 1, 1, 1};
    const SimResult r = simulate(cfg, trace_dot_product(), 10);
    CHECK(r.ipc == 1.0);
    CHECK(r.ipc_per_pipeline == 1.0);
    CHECK(r.cycles == 26 * 10);
}

TEST_CASE("saturated pipelines converge to the trace flop/instruction ratio") {
    for (const Trace &t : {trace_dot_product(), trace_blocked_gemm()}) {
        CoreConfig cfg;
        cfg.pipelines = 4;
        cfg.threads_per_pipeline = cfg.max_latency();
        const SimResult r = simulate(cfg, t, 1000);
        const InstructionMix mix = to_instruction_mix(t);
        const double ratio = static_cast<double>(mix.flops) / mix.total_instructions();
        CHECK(r.flops_per_cycle_per_pipeline ==
              doctest::Approx(ratio).epsilon(0.02));
        CHECK(r.ipc_per_pipeline <= 1.0);
        CHECK(r.ipc_per_pipeline == doctest::Approx(1.0).epsilon(0.02));
        // matches the analytic issue bound at 1 GHz x pipelines
        const double bound = issue_bound(mix, 1.0, cfg.pipelines);
        CHECK(r.flops_per_cycle == doctest::Approx(bound).epsilon(0.02));
    }
}

TEST_CASE("blocked trace reaches 1.2 flops/cycle per pipeline, 4.8 GF/s per core at 1 GHz") {
    CoreConfig cfg;
    cfg.pipelines = 4;
    cfg.threads_per_pipeline = 32;
    const SimResult r = simulate(cfg, trace_blocked_gemm(), 1000);
    CHECK(r.flops_per_cycle_per_pipeline == doctest::Approx(1.2).epsilon(0.02));
    CHECK(r.flops_per_cycle == doctest::Approx(4.8).epsilon(0.02));
}

TEST_CASE("work conservation") {
    CoreConfig cfg;
    cfg.pipelines = 3;
    cfg.threads_per_pipeline = 5;
    const int repeat = 17;
    const Trace t = trace_dot_product();
    const SimResult r = simulate(cfg, t, repeat);
    CHECK(r.instructions_issued ==
          t.size() * static_cast<std::uint64_t>(repeat) * 3 * 5);
    CHECK(r.flops_done == 24ull * repeat * 3 * 5);
}

TEST_CASE("identical inputs give identical results") {
    CoreConfig cfg;
    cfg.pipelines = 2;
    cfg.threads_per_pipeline = 7;
    const Trace t = trace_blocked_gemm();
    const SimResult a = simulate(cfg, t, 50);
    const SimResult b = simulate(cfg, t, 50);
    const SimResult c = simulate(cfg, t, 50);
    CHECK(a == b);
    CHECK(b == c);
}

TEST_CASE("throughput is non-decreasing in threads per pipeline") {
    CoreConfig cfg;
    cfg.pipelines = 1;
    double last = 0;
    for (int threads : {1, 2, 4, 8, 16, 24, 32}) {
        cfg.threads_per_pipeline = threads;
        const SimResult r = simulate(cfg, trace_dot_product(), 200);
        CHECK(r.flops_per_cycle >= last - 1e-12);
        last = r.flops_per_cycle;
    }
    // saturated: within 2% of 24/26
    CHECK(last == doctest::Approx(24.0 / 26.0).epsilon(0.02));
}

TEST_CASE("parameter validation") {
    CoreConfig cfg;
    CHECK_THROWS_AS(simulate(cfg, Trace{}, 10), ConfigError);
    CHECK_THROWS_AS(simulate(cfg, trace_dot_product(), 0), ConfigError);
    cfg.threads_per_pipeline = 0;
    CHECK_THROWS_AS(simulate(cfg, trace_dot_product(), 1), ConfigError);
    cfg.threads_per_pipeline = 1;
    cfg.load_latency_cycles = 0;
    CHECK_THROWS_AS(simulate(cfg, trace_dot_product(), 1), ConfigError);
}

TEST_CASE("core config derives from a machine spec") {
    const MachineSpec piuma = piuma_core_spec();
    const CoreConfig cfg = core_config_from(piuma, 24);
    CHECK(cfg.pipelines == 4);
    CHECK(cfg.threads_per_pipeline == 24);
    CHECK(cfg.load_latency_cycles == 20);
    CHECK(cfg.store_latency_cycles == 1);
    CHECK(cfg.fma_latency_cycles == 4);
}
