#pragma once

#include <cstddef>
#include <functional>

namespace slung {

// Worker cap from SLUNG_NUM_WORKERS (>=1), else hardware concurrency.
std::size_t worker_count();

// Runs body(i) for i in [0, n) over at most `workers` threads. Each index is
// processed exactly once; callers must make body(i) independent of ordering.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body,
                  std::size_t workers = worker_count());

}  // namespace slung
