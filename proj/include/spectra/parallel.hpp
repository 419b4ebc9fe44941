#pragma once

#include <cstddef>
#include <functional>

namespace spectra {

/// Worker count: hardware concurrency, capped by SPECTRA_KDE_THREADS when set
/// to a positive integer.
std::size_t worker_count();

/// Calls body(i) for i in [0, count) on up to worker_count() threads. Each
/// index runs exactly once; if any call throws, the exception from the
/// lowest failing index is rethrown after all workers finish.
void parallel_for(std::size_t count, const std::function<void(std::size_t)>& body);

} // namespace spectra
