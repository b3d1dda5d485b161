#pragma once

// Deterministic chunked parallelism.
//
// Library code never spawns ad-hoc threads; callers hand in a Parallel handle
// (the CLI owns the worker count).  Work is split into fixed chunks whose
// outputs land in pre-sized slots and are merged in chunk order afterwards,
// so results do not depend on how many workers ran or which thread picked up
// which chunk.

#include <atomic>
#include <cstdint>
#include <exception>
#include <thread>
#include <vector>

namespace monostat {

class Parallel {
  public:
    explicit Parallel(int workers = 1) : workers_(workers < 1 ? 1 : workers) {}

    int workers() const { return workers_; }

    // Runs fn(chunk_index) for chunk_index in [0, chunks).  fn must write only
    // to its own slot.  Exceptions are captured and rethrown on the caller.
    template <class Fn>
    void run_chunks(std::int64_t chunks, Fn&& fn) const {
        if (chunks <= 0) return;
        const int nthreads = static_cast<int>(std::min<std::int64_t>(workers_, chunks));
        if (nthreads <= 1) {
            for (std::int64_t i = 0; i < chunks; ++i) fn(i);
            return;
        }
        std::atomic<std::int64_t> next{0};
        std::exception_ptr error;
        std::atomic<bool> failed{false};
        std::vector<std::thread> pool;
        pool.reserve(nthreads);
        for (int t = 0; t < nthreads; ++t) {
            pool.emplace_back([&] {
                for (;;) {
                    const std::int64_t i = next.fetch_add(1);
                    if (i >= chunks || failed.load()) return;
                    try {
                        fn(i);
                    } catch (...) {
                        if (!failed.exchange(true)) error = std::current_exception();
                        return;
                    }
                }
            });
        }
        for (auto& th : pool) th.join();
        if (failed.load()) std::rethrow_exception(error);
    }

  private:
    int workers_;
};

// Split `total` items into chunks of at most `chunk_size`.
inline std::int64_t chunk_count(std::int64_t total, std::int64_t chunk_size) {
    return (total + chunk_size - 1) / chunk_size;
}

}  // namespace monostat
