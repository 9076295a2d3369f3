#pragma once

#include <cstddef>
#include <functional>

namespace scene_analogy {

/// Worker count used by parallel_for. Reads SA_THREADS on first use
/// (0 or unset means hardware concurrency) unless set_max_threads was called.
std::size_t max_threads();

/// Overrides the worker cap; 0 restores the SA_THREADS / hardware default.
void set_max_threads(std::size_t n);

/// Runs body(i) for i in [0, n) over contiguous static chunks. Each index is
/// visited exactly once, so bodies that only write slot i give results that
/// do not depend on the worker count. The first exception thrown is rethrown.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body);

}  // namespace scene_analogy
