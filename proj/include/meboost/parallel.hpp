#pragma once
#include <cstddef>
#include <functional>

namespace meboost {

/// Runs body(0..count-1) on up to `jobs` threads (jobs <= 1 runs inline, in order).
///
/// If any call throws, the remaining unstarted indices are skipped and the exception from the
/// lowest failing index is rethrown after all threads join.
void parallel_for(std::size_t count, int jobs, const std::function<void(std::size_t)>& body);

} // namespace meboost
