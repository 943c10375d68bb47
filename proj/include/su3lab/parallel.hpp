#pragma once

#include <condition_variable>
#include <cstddef>
#include <exception>
#include <functional>
#include <mutex>
#include <thread>
#include <vector>

#include "su3lab/errors.hpp"

#if defined(__linux__)
#include <pthread.h>
#include <sched.h>
#endif

namespace su3lab {

enum class Pinning { None, Compact };

struct IndexRange {
    std::size_t begin = 0;
    std::size_t end = 0;

    constexpr std::size_t size() const { return end - begin; }
    constexpr bool empty() const { return begin == end; }
    friend constexpr bool operator==(const IndexRange &, const IndexRange &) = default;
};

// Balanced contiguous split: the first (total % workers) workers get one
// extra element. Workers beyond `total` receive empty ranges.
constexpr IndexRange balanced_range(std::size_t total, int workers, int worker) {
    const std::size_t w = static_cast<std::size_t>(workers);
    const std::size_t id = static_cast<std::size_t>(worker);
    const std::size_t base = total / w;
    const std::size_t extra = total % w;
    const std::size_t begin = id * base + (id < extra ? id : extra);
    return {begin, begin + base + (id < extra ? 1 : 0)};
}

// Fixed ceil(total/workers) blocks; trailing workers may end up empty.
constexpr IndexRange block_range(std::size_t total, int workers, int worker) {
    const std::size_t w = static_cast<std::size_t>(workers);
    const std::size_t id = static_cast<std::size_t>(worker);
    const std::size_t block = (total + w - 1) / w;
    const std::size_t begin = id * block < total ? id * block : total;
    const std::size_t end = begin + block < total ? begin + block : total;
    return {begin, end};
}

// Fixed-size pool of worker threads with a start/finish barrier per run()
// call. Threads are launched once and reused across iterations, so the
// per-iteration cost is just the barrier.
class WorkerPool {
public:
    explicit WorkerPool(int workers, Pinning pin = Pinning::None) {
        if (workers < 1)
            throw ConfigError("worker count must be >= 1");
        threads_.reserve(static_cast<std::size_t>(workers));
        for (int w = 0; w < workers; ++w)
            threads_.emplace_back([this, w] { worker_loop(w); });
        if (pin == Pinning::Compact)
            pinned_ = pin_compact();
    }

    WorkerPool(const WorkerPool &) = delete;
    WorkerPool &operator=(const WorkerPool &) = delete;

    ~WorkerPool() {
        {
            std::unique_lock lock(m_);
            stop_ = true;
        }
        cv_start_.notify_all();
        for (auto &t : threads_)
            t.join();
    }

    int size() const noexcept { return static_cast<int>(threads_.size()); }
    bool pinned() const noexcept { return pinned_; }

    // Runs fn(worker_id) on every worker and returns once all have finished.
    void run(const std::function<void(int)> &fn) {
        {
            std::unique_lock lock(m_);
            job_ = &fn;
            error_ = nullptr;
            pending_ = size();
            ++generation_;
        }
        cv_start_.notify_all();
        std::unique_lock lock(m_);
        cv_done_.wait(lock, [this] { return pending_ == 0; });
        job_ = nullptr;
        if (error_)
            std::rethrow_exception(error_);
    }

private:
    void worker_loop(int id) {
        std::uint64_t seen = 0;
        for (;;) {
            const std::function<void(int)> *job = nullptr;
            {
                std::unique_lock lock(m_);
                cv_start_.wait(lock, [&] { return stop_ || generation_ != seen; });
                if (stop_)
                    return;
                seen = generation_;
                job = job_;
            }
            std::exception_ptr err;
            try {
                (*job)(id);
            } catch (...) {
                err = std::current_exception();
            }
            {
                std::unique_lock lock(m_);
                if (err && !error_)
                    error_ = err;
                if (--pending_ == 0)
                    cv_done_.notify_all();
            }
        }
    }

    bool pin_compact() {
#if defined(__linux__)
        const unsigned ncpu = std::thread::hardware_concurrency();
        if (ncpu == 0)
            return false;
        bool ok = true;
        for (std::size_t w = 0; w < threads_.size(); ++w) {
            cpu_set_t set;
            CPU_ZERO(&set);
            CPU_SET(static_cast<int>(w % ncpu), &set);
            if (pthread_setaffinity_np(threads_[w].native_handle(), sizeof(set), &set) != 0)
                ok = false;
        }
        return ok;
#else
        return false;
#endif
    }

    std::vector<std::thread> threads_;
    std::mutex m_;
    std::condition_variable cv_start_, cv_done_;
    const std::function<void(int)> *job_ = nullptr;
    std::exception_ptr error_;
    std::uint64_t generation_ = 0;
    int pending_ = 0;
    bool stop_ = false;
    bool pinned_ = false;
};

} // namespace su3lab
