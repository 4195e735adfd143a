#pragma once

#include <cstdint>
#include <exception>
#include <functional>
#include <mutex>
#include <random>
#include <thread>
#include <vector>

namespace anchorcrc {

/// splitmix64 finalizer; the standard scrambler for deriving seed material.
inline std::uint64_t mix64(std::uint64_t z) {
    z += 0x9E3779B97F4A7C15ULL;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

/// Deterministic substream seed for (master, stream, index).
///
/// Every stochastic component owns a stream tag and derives one seed per
/// unit of work (replicate, posterior draw, bootstrap resample), so results
/// are identical no matter how the work is scheduled across threads.
inline std::uint64_t derive_seed(std::uint64_t master, std::uint64_t stream, std::uint64_t index) {
    const std::uint64_t base = mix64(master ^ mix64(stream));
    return mix64(base + index * 0x9E3779B97F4A7C15ULL);
}

inline std::mt19937_64 make_rng(std::uint64_t seed) { return std::mt19937_64(seed); }

// Stream tags for the seed-derivation tree.
namespace rng_stream {
inline constexpr std::uint64_t population = 0x01;
inline constexpr std::uint64_t posterior = 0x02;
inline constexpr std::uint64_t bootstrap = 0x03;
} // namespace rng_stream

/// Runs fn(i) for i in [0, n). Work is split into contiguous index blocks;
/// callers must make fn(i) independent of execution order.
inline void parallel_for(std::int64_t n, int threads, const std::function<void(std::int64_t)>& fn) {
    if (threads <= 0) {
        threads = static_cast<int>(std::thread::hardware_concurrency());
    }
    threads = static_cast<int>(std::max<std::int64_t>(1, std::min<std::int64_t>(threads, n)));
    if (threads == 1) {
        for (std::int64_t i = 0; i < n; ++i) {
            fn(i);
        }
        return;
    }
    std::vector<std::thread> workers;
    workers.reserve(static_cast<std::size_t>(threads));
    std::exception_ptr failure;
    std::mutex failure_mutex;
    for (int t = 0; t < threads; ++t) {
        const std::int64_t begin = n * t / threads;
        const std::int64_t end = n * (t + 1) / threads;
        workers.emplace_back([begin, end, &fn, &failure, &failure_mutex] {
            try {
                for (std::int64_t i = begin; i < end; ++i) {
                    fn(i);
                }
            } catch (...) {
                const std::lock_guard<std::mutex> lock(failure_mutex);
                if (!failure) {
                    failure = std::current_exception();
                }
            }
        });
    }
    for (auto& w : workers) {
        w.join();
    }
    if (failure) {
        std::rethrow_exception(failure);
    }
}

} // namespace anchorcrc
