#pragma once

#include <cstddef>
#include <new>
#include <span>
#include <string_view>
#include <utility>

#include "su3lab/errors.hpp"
#include "su3lab/types.hpp"

namespace su3lab {

// How lattice memory is meant to be first-touched:
//   TouchByComputePartition — each worker initializes exactly the site range
//     it will later compute, so first-touch placement follows the compute
//     partition.
//   TouchSequential — one worker initializes everything (the pathological
//     baseline where all pages land in a single memory domain).
//   Interleaved — round-robin chunks across workers, approximating striped
//     placement across memory controllers.
// The policy only changes who touches what; values are policy independent.
enum class PlacementPolicy { TouchByComputePartition, TouchSequential, Interleaved };

constexpr std::string_view to_string(PlacementPolicy p) {
    switch (p) {
    case PlacementPolicy::TouchByComputePartition: return "compute";
    case PlacementPolicy::TouchSequential: return "sequential";
    case PlacementPolicy::Interleaved: return "interleaved";
    }
    return "?";
}

// Raw-byte allocation hook. Benchmarks use the operator-new resource; tests
// swap in instrumented resources to observe touch behavior.
class MemoryResource {
public:
    virtual ~MemoryResource() = default;
    virtual void *allocate(std::size_t bytes, std::size_t alignment) = 0;
    virtual void deallocate(void *p, std::size_t bytes, std::size_t alignment) noexcept = 0;
};

inline MemoryResource &new_delete_resource() {
    class NewDelete final : public MemoryResource {
    public:
        void *allocate(std::size_t bytes, std::size_t alignment) override {
            return ::operator new(bytes, std::align_val_t(alignment));
        }
        void deallocate(void *p, std::size_t bytes, std::size_t alignment) noexcept override {
            ::operator delete(p, bytes, std::align_val_t(alignment));
        }
    };
    static NewDelete r;
    return r;
}

// Owning view of the L^4 site array. Construction reserves capacity only;
// no element byte is written until an initialization routine runs.
template <typename T>
class Lattice {
public:
    static constexpr std::size_t sites_for(int dim) {
        const std::size_t d = static_cast<std::size_t>(dim);
        return d * d * d * d;
    }
    static constexpr std::size_t bytes_for(int dim) {
        return sites_for(dim) * sizeof(Site<T>);
    }

    Lattice() = default;

    Lattice(int dim, PlacementPolicy policy, Site<T> *sites, MemoryResource *mr)
        : dim_(dim), count_(sites_for(dim)), policy_(policy), sites_(sites), mr_(mr) {}

    Lattice(Lattice &&o) noexcept { swap(o); }
    Lattice &operator=(Lattice &&o) noexcept {
        if (this != &o) {
            release();
            swap(o);
        }
        return *this;
    }
    Lattice(const Lattice &) = delete;
    Lattice &operator=(const Lattice &) = delete;

    ~Lattice() { release(); }

    int dim() const noexcept { return dim_; }
    std::size_t size() const noexcept { return count_; }
    std::size_t bytes() const noexcept { return count_ * sizeof(Site<T>); }
    PlacementPolicy policy() const noexcept { return policy_; }

    Site<T> *data() noexcept { return sites_; }
    const Site<T> *data() const noexcept { return sites_; }
    std::span<Site<T>> sites() noexcept { return {sites_, count_}; }
    std::span<const Site<T>> sites() const noexcept { return {sites_, count_}; }

private:
    void release() noexcept {
        if (sites_)
            mr_->deallocate(sites_, bytes(), alignof(Site<T>));
        sites_ = nullptr;
        count_ = 0;
        dim_ = 0;
    }
    void swap(Lattice &o) noexcept {
        std::swap(dim_, o.dim_);
        std::swap(count_, o.count_);
        std::swap(policy_, o.policy_);
        std::swap(sites_, o.sites_);
        std::swap(mr_, o.mr_);
    }

    int dim_ = 0;
    std::size_t count_ = 0;
    PlacementPolicy policy_ = PlacementPolicy::TouchByComputePartition;
    Site<T> *sites_ = nullptr;
    MemoryResource *mr_ = nullptr;
};

} // namespace su3lab
