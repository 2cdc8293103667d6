#pragma once

#include <cstddef>
#include <functional>

namespace imgclust {

std::size_t default_workers();

// Runs fn(begin, end) over [0, n) in chunks of `chunk` items. Chunk
// boundaries depend only on n and chunk, never on the worker count, so any
// per-chunk results combined in chunk order are reproducible. The first
// exception thrown by a chunk is rethrown on the calling thread.
void parallel_chunks(std::size_t n, std::size_t chunk, std::size_t workers,
                     const std::function<void(std::size_t, std::size_t)>& fn);

}  // namespace imgclust
