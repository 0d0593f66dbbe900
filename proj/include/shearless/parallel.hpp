#pragma once

#include <cstddef>
#include <functional>

namespace shearless {

/// Resolve a requested worker count. Zero means "use SHEARLESS_THREADS if set,
/// otherwise the available hardware parallelism".
unsigned resolve_threads(unsigned requested);

/// Run body(i) for i in [0, n) over contiguous chunks on up to `threads` workers.
/// The body must only write to disjoint outputs; the first exception thrown by a
/// worker is rethrown on the calling thread.
void parallel_for(std::size_t n, unsigned threads, const std::function<void(std::size_t)>& body);

}  // namespace shearless
