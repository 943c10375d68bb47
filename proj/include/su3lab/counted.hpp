#pragma once

#include <atomic>
#include <cstdint>

namespace su3lab {

// Scalar wrapper that counts every multiply and add/subtract it performs.
// Substituting Counted<double> for the kernel scalar type turns any kernel
// template into an instrumented flop counter; the counters are global and
// relaxed-atomic so multi-worker runs aggregate correctly.
template <typename T>
struct Counted {
    T v;

    Counted() = default;
    constexpr Counted(T x) : v(x) {}

    explicit operator double() const { return static_cast<double>(v); }

    static inline std::atomic<std::uint64_t> mul_count{0};
    static inline std::atomic<std::uint64_t> add_count{0};

    static void reset_counts() {
        mul_count.store(0, std::memory_order_relaxed);
        add_count.store(0, std::memory_order_relaxed);
    }
    static std::uint64_t muls() { return mul_count.load(std::memory_order_relaxed); }
    static std::uint64_t adds() { return add_count.load(std::memory_order_relaxed); }
    static std::uint64_t flops() { return muls() + adds(); }

    friend Counted operator*(Counted a, Counted b) {
        mul_count.fetch_add(1, std::memory_order_relaxed);
        return {a.v * b.v};
    }
    friend Counted operator+(Counted a, Counted b) {
        add_count.fetch_add(1, std::memory_order_relaxed);
        return {a.v + b.v};
    }
    friend Counted operator-(Counted a, Counted b) {
        add_count.fetch_add(1, std::memory_order_relaxed);
        return {a.v - b.v};
    }
    Counted &operator+=(Counted o) {
        add_count.fetch_add(1, std::memory_order_relaxed);
        v += o.v;
        return *this;
    }
    Counted &operator-=(Counted o) {
        add_count.fetch_add(1, std::memory_order_relaxed);
        v -= o.v;
        return *this;
    }
};

} // namespace su3lab
