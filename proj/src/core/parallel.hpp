#pragma once

#include <cstddef>
#include <functional>

namespace errcal {

/// Worker count used by parallel_for: the ERRCAL_THREADS environment
/// variable when set to a positive integer, otherwise hardware concurrency.
[[nodiscard]] unsigned default_thread_count();

/// Runs fn(i) for i in [0, n) on a transient thread pool.  Results must be
/// written to per-index slots: every reduction over them happens afterwards,
/// sequentially, so outputs are byte-identical for any worker count.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn);

}  // namespace errcal
