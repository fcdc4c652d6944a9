#pragma once

#include <atomic>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <string>
#include <thread>
#include <vector>

#include "fomlab/core.hpp"
#include "fomlab/rng.hpp"

namespace fomlab {

/// Worker cap: min(hardware, FOMLAB_THREADS if set). Never alters results,
/// only how block work is distributed.
inline unsigned worker_count() {
    unsigned n = std::thread::hardware_concurrency();
    if (n == 0) n = 1;
    if (const char* env = std::getenv("FOMLAB_THREADS")) {
        const long cap = std::strtol(env, nullptr, 10);
        if (cap >= 1 && static_cast<unsigned>(cap) < n) n = static_cast<unsigned>(cap);
    }
    return n;
}

namespace detail {

struct BlockStat {
    double mean = 0.0;
    double m2 = 0.0;
    std::uint64_t count = 0;
};

inline BlockStat merge(const BlockStat& a, const BlockStat& b) {
    if (a.count == 0) return b;
    if (b.count == 0) return a;
    BlockStat r;
    r.count = a.count + b.count;
    const double delta = b.mean - a.mean;
    r.mean = a.mean + delta * (static_cast<double>(b.count) / static_cast<double>(r.count));
    r.m2 = a.m2 + b.m2 +
           delta * delta * (static_cast<double>(a.count) * static_cast<double>(b.count) /
                            static_cast<double>(r.count));
    return r;
}

}  // namespace detail

inline constexpr std::uint64_t kMcBlockSize = 65536;

/// Seed-deterministic Monte Carlo mean of f(draw(rng)).
///
/// Samples are produced in fixed blocks; block b always uses the RNG
/// substream (seed, b) and partial moments merge in block order, so the
/// result is bitwise identical for any worker count.
///
/// DrawFn: (SplitRng&) -> sample;  Fn: (const sample&) -> double.
template <class DrawFn, class Fn>
inline Estimate mc_mean(DrawFn&& draw, Fn&& f, std::size_t n, std::uint64_t seed) {
    if (n < 2) throw DomainError("mc_mean: need n >= 2");
    const std::uint64_t nblocks = (n + kMcBlockSize - 1) / kMcBlockSize;
    std::vector<detail::BlockStat> stats(nblocks);
    std::atomic<std::uint64_t> next{0};
    std::atomic<std::uint64_t> bad_index{UINT64_MAX};

    auto run_block = [&](std::uint64_t b) {
        SplitRng rng(seed, b);
        const std::uint64_t begin = b * kMcBlockSize;
        const std::uint64_t end = std::min<std::uint64_t>(begin + kMcBlockSize, n);
        detail::BlockStat s;
        for (std::uint64_t i = begin; i < end; ++i) {
            const double v = f(draw(rng));
            if (!std::isfinite(v)) {
                std::uint64_t expected = bad_index.load();
                while (i < expected && !bad_index.compare_exchange_weak(expected, i)) {
                }
                return;
            }
            ++s.count;
            const double delta = v - s.mean;
            s.mean += delta / static_cast<double>(s.count);
            s.m2 += delta * (v - s.mean);
        }
        stats[b] = s;
    };

    const unsigned workers = std::min<std::uint64_t>(worker_count(), nblocks);
    if (workers <= 1) {
        for (std::uint64_t b = 0; b < nblocks; ++b) run_block(b);
    } else {
        std::vector<std::thread> pool;
        pool.reserve(workers);
        for (unsigned w = 0; w < workers; ++w) {
            pool.emplace_back([&] {
                for (;;) {
                    const std::uint64_t b = next.fetch_add(1);
                    if (b >= nblocks) return;
                    run_block(b);
                }
            });
        }
        for (auto& t : pool) t.join();
    }

    if (bad_index.load() != UINT64_MAX)
        throw DataError("mc_mean: non-finite value at sample index " + std::to_string(bad_index.load()));

    detail::BlockStat total;
    for (const auto& s : stats) total = detail::merge(total, s);
    const double variance = total.m2 / static_cast<double>(total.count - 1);
    Estimate est;
    est.value = total.mean;
    est.std_error = std::sqrt(variance / static_cast<double>(total.count));
    est.method = Method::monte_carlo;
    est.effort = total.count;
    est.seed = seed;
    return est;
}

}  // namespace fomlab
