#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>

#include "su3lab/roofline.hpp"

using namespace su3lab;

namespace {

// printed values carry one decimal; allow exactly that rounding slack
constexpr double print_tol = 0.05 + 1e-9;

} // namespace

TEST_CASE("arithmetic intensity is exact") {
    CHECK(arithmetic_intensity(su3_kernel_spec(Precision::F32)) == 1.35);
    CHECK(arithmetic_intensity(su3_kernel_spec(Precision::F64)) == 0.675);
    CHECK(su3_kernel_spec(Precision::F32).bytes_per_site == 640);
    CHECK(su3_kernel_spec(Precision::F64).bytes_per_site == 1280);
    CHECK(arithmetic_intensity({0, 640, Precision::F32}) == 0.0);
    CHECK_THROWS_AS(arithmetic_intensity({864, 0, Precision::F32}), ConfigError);
}

TEST_CASE("compute peaks") {
    const MachineSpec clx = clx8280_spec();
    CHECK(compute_peak(clx, Scope::Core) == doctest::Approx(86.4).epsilon(1e-12));
    CHECK(compute_peak(clx, Scope::Socket) == doctest::Approx(2419.2).epsilon(1e-12));
    CHECK(compute_peak(clx, Scope::System) == doctest::Approx(4838.4).epsilon(1e-12));

    MachineSpec scalar = clx;
    scalar.simd_units = 1;
    scalar.simd_lanes = 1;
    scalar.fma = false;
    CHECK(compute_peak(scalar, Scope::Core) == doctest::Approx(2.7).epsilon(1e-12));

    const MachineSpec piuma = piuma_core_spec();
    CHECK(compute_peak(piuma, Scope::Core) == doctest::Approx(8.0).epsilon(1e-12));
}

TEST_CASE("bandwidth bounds") {
    const KernelSpec f32 = su3_kernel_spec(Precision::F32);
    const KernelSpec f64 = su3_kernel_spec(Precision::F64);
    CHECK(bandwidth_bound(f32, 105.0) == doctest::Approx(141.75).epsilon(1e-12));
    CHECK(bandwidth_bound(f64, 6.4) == doctest::Approx(4.32).epsilon(1e-12));
    CHECK(bandwidth_bound({0, 640, Precision::F32}, 105.0) == 0.0);
    CHECK_THROWS_AS(bandwidth_bound(f32, 0.0), ConfigError);
}

TEST_CASE("issue bounds reproduce the per-pipeline arithmetic") {
    // dot-product mix: 24 flops over 26 instructions
    CHECK(issue_bound(dot_product_mix(), 1.0, 4) == 24.0 / 26.0 * 4.0);
    CHECK(issue_bound(dot_product_mix(), 1.0, 4) == doctest::Approx(3.6923).epsilon(1e-4));
    // blocked mix: 216 flops over 180 instructions -> 1.2 per pipeline
    CHECK(issue_bound(blocked_gemm_mix(), 1.0, 1) == 1.2);
    CHECK(issue_bound(blocked_gemm_mix(), 1.0, 4) == 4.8);

    CHECK(issue_bound({5, 5, 5, 0}, 1.0, 4) == 0.0);
    CHECK_THROWS_AS(issue_bound({0, 0, 0, 0}, 1.0, 4), ConfigError);
    CHECK_THROWS_AS(issue_bound({1, 1, 1, 3}, 1.0, 4), ConfigError); // >2 flops per FMA
}

TEST_CASE("issue bound stays below the FMA compute peak for both mixes") {
    const MachineSpec piuma = piuma_core_spec();
    const double peak = compute_peak(piuma, Scope::Core);
    CHECK(issue_bound(dot_product_mix(), piuma.pipeline_clock_ghz, piuma.pipelines_per_core) <= peak);
    CHECK(issue_bound(blocked_gemm_mix(), piuma.pipeline_clock_ghz, piuma.pipelines_per_core) <= peak);
}

TEST_CASE("attainable picks the right limiter") {
    const KernelSpec f32 = su3_kernel_spec(Precision::F32);
    const KernelSpec f64 = su3_kernel_spec(Precision::F64);

    SUBCASE("crippled socket is compute limited at 75.6") {
        MachineSpec m = clx8280_spec();
        m.simd_units = 1;
        m.simd_lanes = 1;
        m.fma = false;
        RooflineResult r = attainable(m, f32, std::nullopt, Scope::Socket);
        CHECK(r.bound_gfs == doctest::Approx(75.6).epsilon(1e-12));
        CHECK(r.limiter == "compute");
    }
    SUBCASE("full socket is bandwidth limited at 141.75") {
        RooflineResult r = attainable(clx8280_spec(), f32, std::nullopt, Scope::Socket);
        CHECK(r.bound_gfs == doctest::Approx(141.75).epsilon(1e-12));
        CHECK(r.limiter == "bandwidth");
        CHECK(r.compute_gfs == doctest::Approx(2419.2).epsilon(1e-12));
    }
    SUBCASE("issue-bound core picks the three-way minimum") {
        RooflineResult r = attainable(piuma_core_spec(), f64, dot_product_mix(), Scope::Core);
        CHECK(r.compute_gfs == doctest::Approx(8.0).epsilon(1e-12));
        CHECK(r.bandwidth_gfs == doctest::Approx(4.32).epsilon(1e-12));
        REQUIRE(r.issue_gfs.has_value());
        CHECK(*r.issue_gfs == 24.0 / 26.0 * 4.0);
        CHECK(r.bound_gfs == *r.issue_gfs);
        CHECK(r.limiter == "issue");
    }
}

TEST_CASE("roofline table matches all 48 printed cells") {
    const RooflineTable t = roofline_table(clx8280_spec(), su3_kernel_spec(Precision::F32));
    REQUIRE(t.lanes == 8);

    const double core_rows[3][8] = {
        {86.4, 75.6, 64.8, 54.0, 43.2, 32.4, 21.6, 10.8},
        {43.2, 37.8, 32.4, 27.0, 21.6, 16.2, 10.8, 5.4},
        {21.6, 18.9, 16.2, 13.5, 10.8, 8.1, 5.4, 2.7},
    };
    for (int r = 0; r < 3; ++r)
        for (int c = 0; c < 8; ++c) {
            CAPTURE(r);
            CAPTURE(c);
            CHECK(std::abs(t.core[r][c] - core_rows[r][c]) <= print_tol);
            const double socket_printed = (r == 2 && c == 7) ? 75.6 : 141.8;
            CHECK(std::abs(t.socket[r][c] - socket_printed) <= print_tol);
        }
}

TEST_CASE("attainable bound is monotone in machine resources") {
    std::uint64_t s = 2024;
    auto next = [&s]() mutable {
        s = s * 6364136223846793005ULL + 1442695040888963407ULL;
        return static_cast<double>((s >> 33) % 1000 + 1) / 100.0;
    };
    const KernelSpec k = su3_kernel_spec(Precision::F64);
    for (int trial = 0; trial < 200; ++trial) {
        MachineSpec m;
        m.name = "random";
        m.clock_ghz = next();
        m.simd_units = 1 + trial % 4;
        m.simd_lanes = 1 + trial % 8;
        m.fma = trial % 2 == 0;
        m.cores_per_socket = 1 + trial % 16;
        m.sockets = 1 + trial % 2;
        m.bandwidth_per_socket_gbs = next() * 10;
        m.pipelines_per_core = 1 + trial % 4;
        m.pipeline_clock_ghz = next();

        const double base = attainable(m, k, dot_product_mix(), Scope::System).bound_gfs;

        MachineSpec up = m;
        up.bandwidth_per_socket_gbs *= 2;
        CHECK(attainable(up, k, dot_product_mix(), Scope::System).bound_gfs >= base);
        up = m;
        up.clock_ghz *= 2;
        up.pipeline_clock_ghz *= 2;
        CHECK(attainable(up, k, dot_product_mix(), Scope::System).bound_gfs >= base);
        up = m;
        up.simd_lanes *= 2;
        CHECK(attainable(up, k, dot_product_mix(), Scope::System).bound_gfs >= base);
        up = m;
        up.simd_units *= 2;
        CHECK(attainable(up, k, dot_product_mix(), Scope::System).bound_gfs >= base);
        up = m;
        up.pipelines_per_core *= 2;
        CHECK(attainable(up, k, dot_product_mix(), Scope::System).bound_gfs >= base);
    }
}

TEST_CASE("flop-side scaling leaves a bandwidth-limited bound unchanged") {
    const KernelSpec f32 = su3_kernel_spec(Precision::F32);
    MachineSpec m = clx8280_spec();
    const RooflineResult before = attainable(m, f32, std::nullopt, Scope::Socket);
    REQUIRE(before.limiter == "bandwidth");
    m.simd_units *= 4;
    m.clock_ghz *= 2;
    const RooflineResult after = attainable(m, f32, std::nullopt, Scope::Socket);
    CHECK(after.bound_gfs == before.bound_gfs);
    CHECK(after.limiter == "bandwidth");
}

TEST_CASE("machine spec files round-trip and reject junk") {
    const auto path = std::filesystem::temp_directory_path() / "su3lab_machine_test.json";

    SUBCASE("round trip") {
        MachineSpec m = piuma_core_spec();
        std::ofstream(path) << machine_spec_to_json(m).dump(2);
        MachineSpec loaded = load_machine_spec(path.string());
        CHECK(loaded.name == m.name);
        CHECK(loaded.clock_ghz == m.clock_ghz);
        CHECK(loaded.bandwidth_per_socket_gbs == m.bandwidth_per_socket_gbs);
        CHECK(loaded.pipelines_per_core == m.pipelines_per_core);
        CHECK(loaded.load_latency_cycles == m.load_latency_cycles);
    }
    SUBCASE("missing required key") {
        std::ofstream(path) << R"({"clock_ghz": 2.0})";
        CHECK_THROWS_AS(load_machine_spec(path.string()), ConfigError);
    }
    SUBCASE("not json") {
        std::ofstream(path) << "clock: 2.0\n";
        CHECK_THROWS_AS(load_machine_spec(path.string()), ConfigError);
    }
    SUBCASE("missing file") {
        CHECK_THROWS_AS(load_machine_spec("/nonexistent/machine.json"), ConfigError);
    }
    std::filesystem::remove(path);
}

TEST_CASE("presets resolve by name") {
    CHECK(resolve_machine("clx8280").cores_per_socket == 28);
    CHECK(resolve_machine("piuma-core").pipelines_per_core == 4);
    CHECK_FALSE(machine_preset("unknown").has_value());
    CHECK_THROWS_AS(resolve_machine("no-such-preset-or-file"), ConfigError);
}
