#pragma once

#include <cstddef>
#include <functional>

namespace nodality {

/// Number of worker threads implied by a requested value: 0 means "use the
/// hardware concurrency", anything else is taken literally.
std::size_t resolve_threads(std::size_t requested);

/// Runs fn(i) for i in [0, count) across `threads` workers pulling indices
/// from a shared counter. Exceptions thrown by fn are captured and the first
/// one is rethrown on the calling thread after all workers join. With
/// threads == 1 (or count <= 1) the loop runs inline.
void parallel_for(std::size_t count, std::size_t threads,
                  const std::function<void(std::size_t)>& fn);

}  // namespace nodality
