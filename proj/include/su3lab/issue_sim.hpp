#pragma once

#include <algorithm>
#include <cstdint>
#include <string_view>
#include <vector>

#include "su3lab/errors.hpp"
#include "su3lab/roofline.hpp"

namespace su3lab {

// Cycle-level model of a round-robin multithreaded, single-issue, in-order
// pipeline. Each thread has at most one in-flight instruction; each pipeline
// issues at most one instruction per cycle, picking the next ready thread in
// round-robin order. No cache or bandwidth back-pressure is modeled: this
// isolates the instruction-issue bound that the roofline min() composes with
// the other bounds.

enum class InstructionKind { Load, Store, Fma };

struct AbstractInstruction {
    InstructionKind kind;
    int flops; // 2 for Fma, 0 otherwise
};

using Trace = std::vector<AbstractInstruction>;

namespace detail {

inline void append(Trace &t, InstructionKind k, int count) {
    for (int i = 0; i < count; ++i)
        t.push_back({k, k == InstructionKind::Fma ? 2 : 0});
}

} // namespace detail

// Per output element of the dot-product kernel: 12 loads feeding 12 FMAs and
// 2 stores of the result. 26 instructions, 24 flops.
inline Trace trace_dot_product() {
    Trace t;
    t.reserve(26);
    detail::append(t, InstructionKind::Load, 12);
    detail::append(t, InstructionKind::Fma, 12);
    detail::append(t, InstructionKind::Store, 2);
    return t;
}

// Per link of the register-blocked kernel: the 2x3 block (12 A-loads,
// 18 B-loads, 72 FMAs, 12 stores) followed by the 1x3 block (6 A-loads,
// 18 B-loads, 36 FMAs, 6 stores). 180 instructions, 216 flops.
inline Trace trace_blocked_gemm() {
    Trace t;
    t.reserve(180);
    detail::append(t, InstructionKind::Load, 12 + 18);
    detail::append(t, InstructionKind::Fma, 72);
    detail::append(t, InstructionKind::Store, 12);
    detail::append(t, InstructionKind::Load, 6 + 18);
    detail::append(t, InstructionKind::Fma, 36);
    detail::append(t, InstructionKind::Store, 6);
    return t;
}

inline InstructionMix to_instruction_mix(const Trace &t) {
    InstructionMix mix;
    for (const AbstractInstruction &ins : t) {
        switch (ins.kind) {
        case InstructionKind::Load: ++mix.loads; break;
        case InstructionKind::Store: ++mix.stores; break;
        case InstructionKind::Fma: ++mix.fmas; break;
        }
        mix.flops += static_cast<std::uint64_t>(ins.flops);
    }
    return mix;
}

struct CoreConfig {
    int pipelines = 4;
    int threads_per_pipeline = 16;
    int load_latency_cycles = 20;
    int store_latency_cycles = 1; // fire and forget
    int fma_latency_cycles = 4;

    int latency(InstructionKind k) const {
        switch (k) {
        case InstructionKind::Load: return load_latency_cycles;
        case InstructionKind::Store: return store_latency_cycles;
        case InstructionKind::Fma: return fma_latency_cycles;
        }
        return 1;
    }
    int max_latency() const {
        return std::max(load_latency_cycles,
                        std::max(store_latency_cycles, fma_latency_cycles));
    }
};

inline CoreConfig core_config_from(const MachineSpec &m, int threads_per_pipeline) {
    return {m.pipelines_per_core, threads_per_pipeline, m.load_latency_cycles,
            m.store_latency_cycles, m.fma_latency_cycles};
}

struct SimResult {
    std::uint64_t cycles = 0; // until the last instruction retires
    std::uint64_t instructions_issued = 0;
    std::uint64_t flops_done = 0;
    double ipc = 0;              // aggregate across pipelines
    double ipc_per_pipeline = 0; // <= 1 by construction
    double flops_per_cycle = 0;  // aggregate across pipelines
    double flops_per_cycle_per_pipeline = 0;

    friend bool operator==(const SimResult &, const SimResult &) = default;
};

// Every thread executes the trace `repeat` times. Pipelines are independent
// and identically loaded, so they are simulated in turn; the result is the
// aggregate. Deterministic: same inputs, same SimResult.
inline SimResult simulate(const CoreConfig &cfg, const Trace &trace, int repeat) {
    if (trace.empty())
        throw ConfigError("instruction trace is empty");
    if (repeat < 1)
        throw ConfigError("repeat count must be >= 1");
    if (cfg.pipelines < 1 || cfg.threads_per_pipeline < 1)
        throw ConfigError("core config must have >= 1 pipeline and thread");
    for (const AbstractInstruction &ins : trace)
        if (cfg.latency(ins.kind) < 1)
            throw ConfigError("instruction latency must be >= 1 cycle");

    struct ThreadState {
        std::uint64_t remaining;  // instructions left to issue
        std::uint64_t ready_at;   // cycle the in-flight instruction completes
        std::size_t pc;           // position within the trace
    };

    const std::size_t tpp = static_cast<std::size_t>(cfg.threads_per_pipeline);
    const std::uint64_t per_thread =
        static_cast<std::uint64_t>(trace.size()) * static_cast<std::uint64_t>(repeat);

    std::uint64_t max_cycles = 0;
    std::uint64_t issued_total = 0;
    std::uint64_t flops_total = 0;

    for (int p = 0; p < cfg.pipelines; ++p) {
        std::vector<ThreadState> threads(tpp, {per_thread, 0, 0});
        std::uint64_t left = per_thread * tpp;
        std::uint64_t cycle = 0;
        std::uint64_t retire_last = 0;
        std::size_t rr = 0;

        while (left > 0) {
            // one issue slot: next ready thread in round-robin order; threads
            // with an in-flight instruction are skipped
            for (std::size_t scan = 0; scan < tpp; ++scan) {
                ThreadState &th = threads[(rr + scan) % tpp];
                if (th.remaining == 0 || th.ready_at > cycle)
                    continue;
                const AbstractInstruction &ins = trace[th.pc];
                th.ready_at = cycle + static_cast<std::uint64_t>(cfg.latency(ins.kind));
                if (th.ready_at > retire_last)
                    retire_last = th.ready_at;
                th.pc = th.pc + 1 == trace.size() ? 0 : th.pc + 1;
                --th.remaining;
                --left;
                ++issued_total;
                flops_total += static_cast<std::uint64_t>(ins.flops);
                rr = ((rr + scan) % tpp) + 1;
                if (rr == tpp)
                    rr = 0;
                break;
            }
            ++cycle;
        }
        if (retire_last > max_cycles)
            max_cycles = retire_last;
    }

    SimResult r;
    r.cycles = max_cycles;
    r.instructions_issued = issued_total;
    r.flops_done = flops_total;
    const double cycles_d = static_cast<double>(max_cycles);
    r.ipc = static_cast<double>(issued_total) / cycles_d;
    r.ipc_per_pipeline = r.ipc / cfg.pipelines;
    r.flops_per_cycle = static_cast<double>(flops_total) / cycles_d;
    r.flops_per_cycle_per_pipeline = r.flops_per_cycle / cfg.pipelines;
    return r;
}

} // namespace su3lab
