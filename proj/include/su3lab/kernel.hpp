#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

#include "su3lab/errors.hpp"
#include "su3lab/lattice.hpp"
#include "su3lab/parallel.hpp"
#include "su3lab/types.hpp"

namespace su3lab {

inline constexpr int flops_per_link_multiply = 216; // 108 mul + 108 add
inline constexpr int flops_per_site = 864;          // 4 links x 216
inline constexpr int work_items_per_site = 36;      // 4 links x 3 rows x 3 cols

// Parallel decompositions of the site/link/element iteration space. All
// variants compute the same result; they differ only in how the work is
// partitioned and how the innermost contraction is expressed.
enum class Variant {
    CollapsedInner,     // contiguous site chunks, inner link/row/col loops collapsed
    ManualDistribution, // fixed ceil(n/workers) site blocks, inner loops collapsed
    WorkItems,          // flat element ids, contiguous chunks, indices decoded per id
    CollapseAll,        // flat element ids, strided round-robin assignment
    SiteParallel,       // contiguous site chunks, natural nested loops
    BlockedGemm,        // contiguous site chunks, 2x3 + 1x3 register-blocked multiply
};

inline constexpr std::array<Variant, 6> all_variants = {
    Variant::CollapsedInner,  Variant::ManualDistribution, Variant::WorkItems,
    Variant::CollapseAll,     Variant::SiteParallel,       Variant::BlockedGemm,
};

constexpr std::string_view to_string(Variant v) {
    switch (v) {
    case Variant::CollapsedInner: return "collapsed-inner";
    case Variant::ManualDistribution: return "manual-distribution";
    case Variant::WorkItems: return "work-items";
    case Variant::CollapseAll: return "collapse-all";
    case Variant::SiteParallel: return "site-parallel";
    case Variant::BlockedGemm: return "blocked-gemm";
    }
    return "?";
}

inline std::optional<Variant> parse_variant(std::string_view s) {
    for (Variant v : all_variants)
        if (s == to_string(v))
            return v;
    return std::nullopt;
}

constexpr std::string_view partition_shape(Variant v) {
    switch (v) {
    case Variant::CollapsedInner: return "sites:contiguous/inner-collapsed";
    case Variant::ManualDistribution: return "sites:blocked/inner-collapsed";
    case Variant::WorkItems: return "items:contiguous";
    case Variant::CollapseAll: return "items:strided";
    case Variant::SiteParallel: return "sites:contiguous";
    case Variant::BlockedGemm: return "sites:contiguous/blocked-gemm";
    }
    return "?";
}

// --- single link multiply ---------------------------------------------------

// One output element: row k of a against column l of b, m accumulated in
// order. TransposedB consumes a pre-transposed operand with a unit-stride
// inner loop instead of the column (non-unit stride) walk.
template <bool TransposedB, typename T>
inline Complex<T> dot3(const Su3Matrix<T> &a, const Su3Matrix<T> &b, int k, int l) {
    Complex<T> acc(T(0), T(0));
    for (int m = 0; m < 3; ++m) {
        if constexpr (TransposedB)
            cmul_acc(acc, a.e[k][m], b.e[l][m]);
        else
            cmul_acc(acc, a.e[k][m], b.e[m][l]);
    }
    return acc;
}

// c = a . b; exactly 216 scalar flops (108 mul + 108 add).
template <typename T>
inline void multiply_su3(const Su3Matrix<T> &a, const Su3Matrix<T> &b, Su3Matrix<T> &c) {
    for (int k = 0; k < 3; ++k)
        for (int l = 0; l < 3; ++l)
            c.e[k][l] = dot3<false>(a, b, k, l);
}

template <typename T>
inline Su3Matrix<T> multiply_su3(const Su3Matrix<T> &a, const Su3Matrix<T> &b) {
    Su3Matrix<T> c;
    multiply_su3(a, b, c);
    return c;
}

// Register-blocked multiply: a 2x3 block of a times b, then the remaining
// 1x3 block, fully unrolled into multiply-add pairs so each scalar update
// can fuse. Same 216 flops as the dot-product form.
template <bool TransposedB, typename T>
inline void multiply_su3_blocked(const Su3Matrix<T> &a, const Su3Matrix<T> &b, Su3Matrix<T> &c) {
    auto bv = [&](int m, int l) -> const Complex<T> & {
        if constexpr (TransposedB)
            return b.e[l][m];
        else
            return b.e[m][l];
    };

    Complex<T> r00(T(0), T(0)), r01(T(0), T(0)), r02(T(0), T(0));
    Complex<T> r10(T(0), T(0)), r11(T(0), T(0)), r12(T(0), T(0));
    cfma(r00, a.e[0][0], bv(0, 0)); cfma(r00, a.e[0][1], bv(1, 0)); cfma(r00, a.e[0][2], bv(2, 0));
    cfma(r01, a.e[0][0], bv(0, 1)); cfma(r01, a.e[0][1], bv(1, 1)); cfma(r01, a.e[0][2], bv(2, 1));
    cfma(r02, a.e[0][0], bv(0, 2)); cfma(r02, a.e[0][1], bv(1, 2)); cfma(r02, a.e[0][2], bv(2, 2));
    cfma(r10, a.e[1][0], bv(0, 0)); cfma(r10, a.e[1][1], bv(1, 0)); cfma(r10, a.e[1][2], bv(2, 0));
    cfma(r11, a.e[1][0], bv(0, 1)); cfma(r11, a.e[1][1], bv(1, 1)); cfma(r11, a.e[1][2], bv(2, 1));
    cfma(r12, a.e[1][0], bv(0, 2)); cfma(r12, a.e[1][1], bv(1, 2)); cfma(r12, a.e[1][2], bv(2, 2));
    c.e[0][0] = r00; c.e[0][1] = r01; c.e[0][2] = r02;
    c.e[1][0] = r10; c.e[1][1] = r11; c.e[1][2] = r12;

    Complex<T> r20(T(0), T(0)), r21(T(0), T(0)), r22(T(0), T(0));
    cfma(r20, a.e[2][0], bv(0, 0)); cfma(r20, a.e[2][1], bv(1, 0)); cfma(r20, a.e[2][2], bv(2, 0));
    cfma(r21, a.e[2][0], bv(0, 1)); cfma(r21, a.e[2][1], bv(1, 1)); cfma(r21, a.e[2][2], bv(2, 1));
    cfma(r22, a.e[2][0], bv(0, 2)); cfma(r22, a.e[2][1], bv(1, 2)); cfma(r22, a.e[2][2], bv(2, 2));
    c.e[2][0] = r20; c.e[2][1] = r21; c.e[2][2] = r22;
}

// out.b[j][m][l] = b.b[j][l][m]; an involution.
template <typename T>
inline LinkSet<T> transpose_links(const LinkSet<T> &b) {
    LinkSet<T> out;
    for (int j = 0; j < 4; ++j)
        for (int k = 0; k < 3; ++k)
            for (int l = 0; l < 3; ++l)
                out.b[j].e[l][k] = b.b[j].e[k][l];
    return out;
}

// --- flat work items --------------------------------------------------------

struct WorkItem {
    std::size_t site;
    int link;
    int row;
    int col;

    friend constexpr bool operator==(const WorkItem &, const WorkItem &) = default;
};

// Decode of item_id = ((site*4 + link)*3 + row)*3 + col.
inline WorkItem work_item_index(std::uint64_t item_id, int L) {
    const std::uint64_t total = Lattice<float>::sites_for(L) * work_items_per_site;
    if (item_id >= total)
        throw ConfigError("work item id " + std::to_string(item_id) +
                          " out of range (max " + std::to_string(total) + ")");
    return {static_cast<std::size_t>(item_id / 36),
            static_cast<int>(item_id / 9 % 4),
            static_cast<int>(item_id / 3 % 3),
            static_cast<int>(item_id % 3)};
}

// --- kernel execution -------------------------------------------------------

namespace detail {

template <bool BT, typename T>
void sites_nested(const Site<T> *a, const LinkSet<T> &b, Site<T> *c, IndexRange r) {
    for (std::size_t i = r.begin; i < r.end; ++i)
        for (int j = 0; j < 4; ++j)
            for (int k = 0; k < 3; ++k)
                for (int l = 0; l < 3; ++l)
                    c[i].link[j].e[k][l] = dot3<BT>(a[i].link[j], b.b[j], k, l);
}

template <bool BT, typename T>
void sites_collapsed_inner(const Site<T> *a, const LinkSet<T> &b, Site<T> *c, IndexRange r) {
    for (std::size_t i = r.begin; i < r.end; ++i)
        for (int w = 0; w < work_items_per_site; ++w) {
            const int j = w / 9, k = w / 3 % 3, l = w % 3;
            c[i].link[j].e[k][l] = dot3<BT>(a[i].link[j], b.b[j], k, l);
        }
}

template <bool BT, typename T>
void sites_blocked_gemm(const Site<T> *a, const LinkSet<T> &b, Site<T> *c, IndexRange r) {
    for (std::size_t i = r.begin; i < r.end; ++i)
        for (int j = 0; j < 4; ++j)
            multiply_su3_blocked<BT>(a[i].link[j], b.b[j], c[i].link[j]);
}

template <bool BT, typename T>
void item_span(const Site<T> *a, const LinkSet<T> &b, Site<T> *c, IndexRange ids) {
    for (std::size_t id = ids.begin; id < ids.end; ++id) {
        const std::size_t i = id / 36;
        const int j = static_cast<int>(id / 9 % 4);
        const int k = static_cast<int>(id / 3 % 3);
        const int l = static_cast<int>(id % 3);
        c[i].link[j].e[k][l] = dot3<BT>(a[i].link[j], b.b[j], k, l);
    }
}

template <bool BT, typename T>
void items_strided(const Site<T> *a, const LinkSet<T> &b, Site<T> *c,
                   std::size_t total_items, int worker, int stride) {
    for (std::size_t id = static_cast<std::size_t>(worker); id < total_items;
         id += static_cast<std::size_t>(stride)) {
        const std::size_t i = id / 36;
        const int j = static_cast<int>(id / 9 % 4);
        const int k = static_cast<int>(id / 3 % 3);
        const int l = static_cast<int>(id % 3);
        c[i].link[j].e[k][l] = dot3<BT>(a[i].link[j], b.b[j], k, l);
    }
}

template <bool BT, typename T>
void run_worker(Variant variant, const Site<T> *a, const LinkSet<T> &links, Site<T> *c,
                std::size_t n, int worker, int workers) {
    // With the transpose option each worker keeps its own transposed copy
    // and the inner loop runs unit stride.
    LinkSet<T> local;
    if constexpr (BT)
        local = transpose_links(links);
    const LinkSet<T> &b = BT ? local : links;

    switch (variant) {
    case Variant::SiteParallel:
        sites_nested<BT>(a, b, c, balanced_range(n, workers, worker));
        break;
    case Variant::CollapsedInner:
        sites_collapsed_inner<BT>(a, b, c, balanced_range(n, workers, worker));
        break;
    case Variant::ManualDistribution:
        sites_collapsed_inner<BT>(a, b, c, block_range(n, workers, worker));
        break;
    case Variant::WorkItems:
        item_span<BT>(a, b, c, balanced_range(n * work_items_per_site, workers, worker));
        break;
    case Variant::CollapseAll:
        items_strided<BT>(a, b, c, n * work_items_per_site, worker, workers);
        break;
    case Variant::BlockedGemm:
        sites_blocked_gemm<BT>(a, b, c, balanced_range(n, workers, worker));
        break;
    }
}

} // namespace detail

struct KernelResult {
    std::uint64_t flops = 0;  // always 864 per site, for every variant
    std::string partition;    // decomposition shape actually used
};

// c.sites[i].link[j] = a.sites[i].link[j] . b.b[j] for every site and link,
// work split across the pool per the variant's decomposition. Workers write
// disjoint output ranges; the only synchronization is the pool barrier.
template <typename T>
KernelResult run_kernel(const Lattice<T> &a, const LinkSet<T> &b, Lattice<T> &c,
                        Variant variant, bool transpose_b, WorkerPool &pool) {
    if (parse_variant(to_string(variant)) == std::nullopt)
        throw ConfigError("unknown kernel variant");
    if (a.dim() != c.dim() || a.size() != c.size())
        throw ConfigError("output lattice shape does not match input");
    if (a.data() == nullptr || c.data() == nullptr)
        throw ConfigError("lattice not allocated");

    const std::size_t n = a.size();
    const int workers = pool.size();
    const Site<T> *ap = a.data();
    Site<T> *cp = c.data();

    if (transpose_b)
        pool.run([&](int w) { detail::run_worker<true>(variant, ap, b, cp, n, w, workers); });
    else
        pool.run([&](int w) { detail::run_worker<false>(variant, ap, b, cp, n, w, workers); });

    return {n * flops_per_site, std::string(partition_shape(variant))};
}

template <typename T>
KernelResult run_kernel(const Lattice<T> &a, const LinkSet<T> &b, Lattice<T> &c,
                        Variant variant, bool transpose_b, int workers) {
    WorkerPool pool(workers);
    return run_kernel(a, b, c, variant, transpose_b, pool);
}

// --- verification -----------------------------------------------------------

struct VerificationReport {
    bool ok = false;
    double sum_real = 0;
    double sum_imag = 0;
    double max_deviation = 0;
};

template <typename T>
constexpr double canonical_tolerance() {
    return sizeof(T) == sizeof(float) ? 1e-6 : 1e-12;
}

// Checks a kernel output produced under canonical initialization
// (a = (1,0), b = (1/3,0)): every element must be (1,0) within tolerance.
// A failed check is an ok=false report, never an error.
template <typename T>
VerificationReport verify(const Lattice<T> &c, double tolerance = canonical_tolerance<T>()) {
    VerificationReport rep;
    rep.ok = true;
    for (const Site<T> &s : c.sites())
        for (int j = 0; j < 4; ++j)
            for (int k = 0; k < 3; ++k)
                for (int l = 0; l < 3; ++l) {
                    const double re = static_cast<double>(s.link[j].e[k][l].real);
                    const double im = static_cast<double>(s.link[j].e[k][l].imag);
                    rep.sum_real += re;
                    rep.sum_imag += im;
                    const double dev = std::max(std::abs(re - 1.0), std::abs(im));
                    if (dev > rep.max_deviation)
                        rep.max_deviation = dev;
                }
    rep.ok = rep.max_deviation < tolerance;
    return rep;
}

} // namespace su3lab
