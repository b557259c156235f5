#pragma once

#include <cstddef>
#include <functional>

namespace seequant {

/// Global cap on worker threads (the CLI's --threads). Default 1.
void set_max_threads(unsigned n);
unsigned max_threads();

/// Runs fn(i) for i in [0, n). Iterations must be independent (each writes
/// its own output slot); results are identical for any thread count.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn);

} // namespace seequant
