#pragma once

#include <algorithm>
#include <exception>
#include <thread>
#include <vector>

namespace gridloc {

// Split [begin, end) into contiguous chunks and run fn(chunk_begin, chunk_end)
// on up to n_threads workers. Runs inline when one thread suffices. The first
// exception thrown by a worker is rethrown after all workers have joined.
template <typename Fn>
void parallel_for(int begin, int end, int n_threads, Fn&& fn) {
    const int count = end - begin;
    if (count <= 0) return;
    const int workers = std::max(1, std::min(n_threads, count));
    if (workers == 1) {
        fn(begin, end);
        return;
    }
    const int chunk = (count + workers - 1) / workers;
    std::vector<std::exception_ptr> errors(workers);
    auto run = [&](int w) {
        const int b = begin + w * chunk;
        const int e = std::min(end, b + chunk);
        if (b >= e) return;
        try {
            fn(b, e);
        } catch (...) {
            errors[w] = std::current_exception();
        }
    };
    std::vector<std::thread> pool;
    pool.reserve(workers - 1);
    for (int w = 1; w < workers; ++w) pool.emplace_back(run, w);
    run(0);
    for (auto& th : pool) th.join();
    for (auto& err : errors)
        if (err) std::rethrow_exception(err);
}

}  // namespace gridloc
