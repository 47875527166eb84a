#pragma once

#include <cstdint>
#include <functional>

namespace proxemo {

// Number of worker threads used by parallel_for. Defaults to the hardware
// concurrency; override with set_num_threads (0 restores the default).
int num_threads();
void set_num_threads(int n);

// Runs f(i) for i in [0, n). Work is split into contiguous chunks, one per
// thread, so results are identical for any thread count as long as distinct
// indices touch distinct outputs.
void parallel_for(std::int64_t n, const std::function<void(std::int64_t)>& f);

// Chunked variant: f(begin, end) per chunk. Lower call overhead for tight loops.
void parallel_for_chunks(std::int64_t n,
                         const std::function<void(std::int64_t, std::int64_t)>& f);

}  // namespace proxemo
