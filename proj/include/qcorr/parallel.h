// Copyright 2026 The qcorr Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef QCORR_PARALLEL_H
#define QCORR_PARALLEL_H

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace qcorr {

/// Number of workers to use when the caller passes 0.
inline size_t default_workers() {
    return std::max<size_t>(1, std::thread::hardware_concurrency());
}

/// Calls fn(i) for every i in [0, n) using up to `workers` threads.
///
/// Work is handed out by an atomic counter, so fn must only write to state
/// owned by index i. The first exception thrown by any call is rethrown
/// after all workers have stopped.
template <typename Fn>
void parallel_for(size_t n, size_t workers, Fn &&fn) {
    if (workers == 0) {
        workers = default_workers();
    }
    workers = std::min(workers, n);
    if (workers <= 1) {
        for (size_t i = 0; i < n; i++) {
            fn(i);
        }
        return;
    }
    std::atomic<size_t> next{0};
    std::atomic<bool> failed{false};
    std::exception_ptr error;
    std::mutex error_mutex;
    auto body = [&]() {
        while (!failed.load(std::memory_order_relaxed)) {
            size_t i = next.fetch_add(1, std::memory_order_relaxed);
            if (i >= n) {
                return;
            }
            try {
                fn(i);
            } catch (...) {
                std::lock_guard<std::mutex> lock(error_mutex);
                if (!error) {
                    error = std::current_exception();
                }
                failed = true;
            }
        }
    };
    std::vector<std::thread> threads;
    threads.reserve(workers - 1);
    for (size_t w = 1; w < workers; w++) {
        threads.emplace_back(body);
    }
    body();
    for (auto &t : threads) {
        t.join();
    }
    if (error) {
        std::rethrow_exception(error);
    }
}

}  // namespace qcorr

#endif
