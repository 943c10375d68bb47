#pragma once

#include <algorithm>
#include <cstdint>
#include <map>
#include <new>
#include <string>
#include <thread>
#include <vector>

#include "su3lab/errors.hpp"
#include "su3lab/lattice.hpp"
#include "su3lab/parallel.hpp"
#include "su3lab/types.hpp"

#if defined(__linux__)
#include <sys/syscall.h>
#include <unistd.h>
#endif

namespace su3lab {

// Worker -> site-range map used for initialization. A worker may own several
// ranges (interleaved policy); together the ranges must cover [0, n) with no
// overlap.
struct Partition {
    std::vector<std::vector<IndexRange>> per_worker;

    int workers() const { return static_cast<int>(per_worker.size()); }
};

inline void validate_partition(const Partition &p, std::size_t total_sites) {
    std::vector<IndexRange> all;
    for (const auto &ranges : p.per_worker)
        for (const IndexRange &r : ranges) {
            if (r.begin > r.end || r.end > total_sites)
                throw ConfigError("partition range out of bounds");
            if (!r.empty())
                all.push_back(r);
        }
    std::sort(all.begin(), all.end(),
              [](const IndexRange &a, const IndexRange &b) { return a.begin < b.begin; });
    std::size_t next = 0;
    for (const IndexRange &r : all) {
        if (r.begin < next)
            throw ConfigError("partition ranges overlap");
        if (r.begin > next)
            throw ConfigError("partition does not cover all sites");
        next = r.end;
    }
    if (next != total_sites)
        throw ConfigError("partition does not cover all sites");
}

// Builds the touch partition for a policy. The compute policy mirrors the
// contiguous per-worker split the kernels use, sequential gives everything
// to worker 0, interleaved deals round-robin chunks.
inline Partition make_partition(std::size_t total_sites, int workers, PlacementPolicy policy,
                                std::size_t interleave_chunk_sites = 16) {
    if (workers < 1)
        throw ConfigError("worker count must be >= 1");
    Partition p;
    p.per_worker.resize(static_cast<std::size_t>(workers));
    switch (policy) {
    case PlacementPolicy::TouchByComputePartition:
        for (int w = 0; w < workers; ++w)
            p.per_worker[static_cast<std::size_t>(w)].push_back(
                balanced_range(total_sites, workers, w));
        break;
    case PlacementPolicy::TouchSequential:
        p.per_worker[0].push_back({0, total_sites});
        break;
    case PlacementPolicy::Interleaved: {
        const std::size_t chunk = std::max<std::size_t>(1, interleave_chunk_sites);
        std::size_t begin = 0;
        for (std::size_t c = 0; begin < total_sites; ++c) {
            const std::size_t end = std::min(total_sites, begin + chunk);
            p.per_worker[c % static_cast<std::size_t>(workers)].push_back({begin, end});
            begin = end;
        }
        break;
    }
    }
    return p;
}

// Reserves capacity for the L^4 site array without writing a single element
// byte; first touch is deferred to init_lattice (or to the kernel, for the
// output array).
template <typename T>
Lattice<T> allocate_lattice(int L, PlacementPolicy policy = PlacementPolicy::TouchByComputePartition,
                            MemoryResource &mr = new_delete_resource()) {
    if (L < 1)
        throw ConfigError("lattice dimension must be >= 1");
    const std::size_t bytes = Lattice<T>::bytes_for(L);
    void *p = nullptr;
    try {
        p = mr.allocate(bytes, alignof(Site<T>));
    } catch (const std::bad_alloc &) {
        throw ResourceError("failed to allocate " + std::to_string(bytes) + " bytes");
    }
    if (p == nullptr)
        throw ResourceError("failed to allocate " + std::to_string(bytes) + " bytes");
    return Lattice<T>(L, policy, static_cast<Site<T> *>(p), &mr);
}

// Records which worker wrote each site first.
struct TouchLog {
    std::vector<std::int32_t> first_writer;
};

namespace detail {

template <typename T>
void init_site_range(Site<T> *sites, int L, Complex<T> value, IndexRange r,
                     int worker, TouchLog *log) {
    const std::size_t ld = static_cast<std::size_t>(L);
    for (std::size_t i = r.begin; i < r.end; ++i) {
        Site<T> *s = new (&sites[i]) Site<T>; // no-op constructor: this is the first touch
        if (log && log->first_writer[i] < 0)
            log->first_writer[i] = worker;
        s->x = static_cast<std::int32_t>(i % ld);
        s->y = static_cast<std::int32_t>(i / ld % ld);
        s->z = static_cast<std::int32_t>(i / (ld * ld) % ld);
        s->t = static_cast<std::int32_t>(i / (ld * ld * ld));
        s->index = static_cast<std::int32_t>(i);
        s->parity = (s->x + s->y + s->z + s->t) % 2;
        for (int j = 0; j < 4; ++j)
            for (int k = 0; k < 3; ++k)
                for (int l = 0; l < 3; ++l)
                    s->link[j].e[k][l] = value;
    }
}

} // namespace detail

// Writes every link element to `value` and fills the site metadata, each
// worker touching exactly the ranges the partition assigns it. Runs the
// workers concurrently so OS first-touch placement follows the partition.
template <typename T>
void init_lattice(Lattice<T> &lattice, Complex<T> value, const Partition &partition,
                  TouchLog *log = nullptr) {
    if (lattice.data() == nullptr)
        throw ConfigError("lattice not allocated");
    validate_partition(partition, lattice.size());
    if (log)
        log->first_writer.assign(lattice.size(), -1);

    std::vector<std::thread> threads;
    for (int w = 0; w < partition.workers(); ++w) {
        const auto &ranges = partition.per_worker[static_cast<std::size_t>(w)];
        if (ranges.empty())
            continue;
        threads.emplace_back([&, w, ranges] {
            for (const IndexRange &r : ranges)
                detail::init_site_range(lattice.data(), lattice.dim(), value, r, w, log);
        });
    }
    for (auto &t : threads)
        t.join();
}

// All 4x9 elements of the shared operand set to `value`.
template <typename T>
void init_links(LinkSet<T> &b, Complex<T> value) {
    for (int j = 0; j < 4; ++j)
        for (int k = 0; k < 3; ++k)
            for (int l = 0; l < 3; ++l)
                b.b[j].e[k][l] = value;
}

// --- placement observation ---------------------------------------------------

// Best-effort residency probe. Where the OS exposes per-memory-domain page
// locations the report breaks the array down by domain; elsewhere it carries
// the total only. Informational: never fails a run.
struct PlacementReport {
    bool supported = false;
    std::uint64_t total_bytes = 0;
    std::map<int, std::uint64_t> bytes_by_domain;
};

namespace detail {

#if defined(__linux__)
inline int page_memory_domain(const void *addr) {
    // get_mempolicy(MPOL_F_NODE | MPOL_F_ADDR) -> node the page lives on
    int node = -1;
    const unsigned long flags = 1u /*MPOL_F_NODE*/ | 2u /*MPOL_F_ADDR*/;
    const long rc = ::syscall(SYS_get_mempolicy, &node, nullptr, 0ul,
                              const_cast<void *>(addr), flags);
    return rc == 0 ? node : -1;
}
#endif

inline PlacementReport probe_residency(const void *base, std::size_t bytes) {
    PlacementReport rep;
    rep.total_bytes = bytes;
#if defined(__linux__)
    const long page = ::sysconf(_SC_PAGESIZE);
    if (page <= 0 || bytes == 0)
        return rep;
    const auto *p = static_cast<const unsigned char *>(base);
    std::map<int, std::uint64_t> by_domain;
    for (std::size_t off = 0; off < bytes; off += static_cast<std::size_t>(page)) {
        const int node = page_memory_domain(p + off);
        if (node < 0)
            return rep; // probe unavailable; report totals only
        by_domain[node] += std::min(bytes - off, static_cast<std::size_t>(page));
    }
    rep.supported = true;
    rep.bytes_by_domain = std::move(by_domain);
#else
    (void)base;
#endif
    return rep;
}

} // namespace detail

template <typename T>
PlacementReport placement_report(const Lattice<T> &lattice) {
    if (lattice.data() == nullptr)
        return {};
    return detail::probe_residency(lattice.data(), lattice.bytes());
}

} // namespace su3lab
