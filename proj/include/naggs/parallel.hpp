#pragma once

#include <cstddef>
#include <functional>

namespace naggs {

/// Execution backend for trajectory- and trial-parallel kernels. Both backends run the
/// same block bodies and reduce block results in block order, so they produce
/// bit-identical output. `serial` is the reference used by the tests.
enum class Backend { serial, openmp };

/// Calls body(b) for b in [0, n_blocks). With Backend::openmp the blocks are distributed
/// over threads; the first exception thrown by any block is rethrown on the caller.
void for_each_block(std::size_t n_blocks, Backend backend,
                    const std::function<void(std::size_t)>& body);

/// Upper bound on OpenMP threads used by Backend::openmp (the CLI's --jobs).
void set_thread_limit(int n);
int thread_limit();

}  // namespace naggs
