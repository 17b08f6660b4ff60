#include "ulab/parallel.hpp"

#include <exception>
#include <thread>
#include <vector>

namespace ulab {

void parallel_for(int count, int threads, const std::function<void(int)>& fn) {
    if (count <= 0) return;
    int workers = threads < 1 ? 1 : threads;
    if (workers > count) workers = count;
    if (workers == 1) {
        for (int i = 0; i < count; ++i) fn(i);
        return;
    }
    std::vector<std::exception_ptr> errors(static_cast<std::size_t>(workers));
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(workers));
    // contiguous chunks: worker w handles [w*count/workers, (w+1)*count/workers)
    for (int w = 0; w < workers; ++w) {
        int lo = static_cast<int>(static_cast<long long>(w) * count / workers);
        int hi = static_cast<int>(static_cast<long long>(w + 1) * count / workers);
        pool.emplace_back([&fn, &errors, w, lo, hi] {
            try {
                for (int i = lo; i < hi; ++i) fn(i);
            } catch (...) {
                errors[static_cast<std::size_t>(w)] = std::current_exception();
            }
        });
    }
    for (auto& t : pool) t.join();
    for (auto& e : errors)
        if (e) std::rethrow_exception(e);
}

}  // namespace ulab
