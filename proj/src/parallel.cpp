#include "naggs/parallel.hpp"

#include <omp.h>

#include <exception>
#include <mutex>

namespace naggs {

namespace {

void for_each_block_serial(std::size_t n_blocks, const std::function<void(std::size_t)>& body) {
    for (std::size_t b = 0; b < n_blocks; ++b) body(b);
}

void for_each_block_openmp(std::size_t n_blocks, const std::function<void(std::size_t)>& body) {
    std::exception_ptr first_error;
    std::mutex error_mutex;
    const auto n = static_cast<long long>(n_blocks);
#pragma omp parallel for schedule(dynamic, 1)
    for (long long b = 0; b < n; ++b) {
        try {
            body(static_cast<std::size_t>(b));
        } catch (...) {
            std::lock_guard<std::mutex> lock(error_mutex);
            if (!first_error) first_error = std::current_exception();
        }
    }
    if (first_error) std::rethrow_exception(first_error);
}

}  // namespace

void for_each_block(std::size_t n_blocks, Backend backend,
                    const std::function<void(std::size_t)>& body) {
    if (backend == Backend::serial || n_blocks <= 1) {
        for_each_block_serial(n_blocks, body);
    } else {
        for_each_block_openmp(n_blocks, body);
    }
}

void set_thread_limit(int n) {
    if (n > 0) omp_set_num_threads(n);
}

int thread_limit() { return omp_get_max_threads(); }

}  // namespace naggs
