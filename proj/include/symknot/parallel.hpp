#pragma once

#include <algorithm>
#include <atomic>
#include <condition_variable>
#include <cstdint>
#include <cstdlib>
#include <functional>
#include <mutex>
#include <thread>
#include <vector>

namespace symknot {

// All pairwise kernels reduce through fixed-size chunks whose partial results
// are combined in chunk order. The outcome is therefore identical no matter
// how many worker threads execute the chunks (including one).
inline constexpr std::size_t kReductionChunk = 64;

inline unsigned max_threads() {
    static const unsigned cached = [] {
        if (const char* env = std::getenv("SYMKNOT_THREADS")) {
            long v = std::strtol(env, nullptr, 10);
            if (v >= 1) return static_cast<unsigned>(v);
        }
        unsigned hw = std::thread::hardware_concurrency();
        if (hw == 0) hw = 1;
        return hw > 8 ? 8u : hw;
    }();
    return cached;
}

namespace detail {

class ThreadPool {
public:
    static ThreadPool& instance() {
        static ThreadPool pool(max_threads());
        return pool;
    }

    unsigned size() const { return static_cast<unsigned>(workers_.size()); }

    // Runs fn(chunk_index) for chunk_index in [0, n_chunks) on the pool and
    // blocks until all chunks finished. fn must not throw.
    void run_chunks(std::size_t n_chunks, const std::function<void(std::size_t)>& fn) {
        if (n_chunks == 0) return;
        if (workers_.empty() || n_chunks == 1) {
            for (std::size_t c = 0; c < n_chunks; ++c) fn(c);
            return;
        }
        std::atomic<std::size_t> next{0};
        std::atomic<std::size_t> done{0};
        {
            std::unique_lock lock(mutex_);
            job_ = [&](void) {
                for (;;) {
                    std::size_t c = next.fetch_add(1);
                    if (c >= n_chunks) break;
                    fn(c);
                    done.fetch_add(1);
                }
            };
            generation_++;
            cv_.notify_all();
        }
        // The calling thread participates too.
        for (;;) {
            std::size_t c = next.fetch_add(1);
            if (c >= n_chunks) break;
            fn(c);
            done.fetch_add(1);
        }
        while (done.load() < n_chunks) std::this_thread::yield();
        {
            std::unique_lock lock(mutex_);
            job_ = nullptr;
        }
    }

private:
    explicit ThreadPool(unsigned threads) {
        for (unsigned t = 1; t < threads; ++t) {
            workers_.emplace_back([this] { worker_loop(); });
        }
    }

    ~ThreadPool() {
        {
            std::unique_lock lock(mutex_);
            stop_ = true;
            cv_.notify_all();
        }
        for (auto& w : workers_) w.join();
    }

    void worker_loop() {
        std::uint64_t seen = 0;
        for (;;) {
            std::function<void()> job;
            {
                std::unique_lock lock(mutex_);
                cv_.wait(lock, [&] { return stop_ || (job_ && generation_ != seen); });
                if (stop_) return;
                seen = generation_;
                job = job_;
            }
            if (job) job();
        }
    }

    std::vector<std::thread> workers_;
    std::mutex mutex_;
    std::condition_variable cv_;
    std::function<void()> job_;
    std::uint64_t generation_ = 0;
    bool stop_ = false;
};

}  // namespace detail

// Splits [0, n) into chunks of kReductionChunk items and calls
// fn(chunk_index, begin, end). Chunk contents are independent of the thread
// count; callers must combine per-chunk results in chunk order.
template <typename F>
void parallel_chunks(std::size_t n, F&& fn) {
    if (n == 0) return;
    const std::size_t n_chunks = (n + kReductionChunk - 1) / kReductionChunk;
    auto run = [&, n](std::size_t c) {
        const std::size_t begin = c * kReductionChunk;
        const std::size_t end = std::min(n, begin + kReductionChunk);
        fn(c, begin, end);
    };
    if (n_chunks == 1 || max_threads() == 1) {
        for (std::size_t c = 0; c < n_chunks; ++c) run(c);
        return;
    }
    detail::ThreadPool::instance().run_chunks(n_chunks, run);
}

// Deterministic sum of fn(i) over i in [0, n): per-chunk partials are added
// in chunk order regardless of scheduling.
template <typename F>
double parallel_sum(std::size_t n, F&& fn) {
    const std::size_t n_chunks = (n + kReductionChunk - 1) / kReductionChunk;
    std::vector<double> partial(n_chunks, 0.0);
    parallel_chunks(n, [&](std::size_t c, std::size_t begin, std::size_t end) {
        double acc = 0.0;
        for (std::size_t i = begin; i < end; ++i) acc += fn(i);
        partial[c] = acc;
    });
    double total = 0.0;
    for (double p : partial) total += p;
    return total;
}

}  // namespace symknot
