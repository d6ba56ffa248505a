#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdlib>
#include <string_view>
#include <thread>
#include <vector>

namespace sld {

enum class ExecutionMode { reference, parallel };

/// Reads SLD_EXECUTION_MODE ("reference" or "parallel"); anything else means reference.
inline ExecutionMode execution_mode() {
  const char* env = std::getenv("SLD_EXECUTION_MODE");
  if (env != nullptr && std::string_view(env) == "parallel") return ExecutionMode::parallel;
  return ExecutionMode::reference;
}

/// Runs body(i) for i in [0, n). Each index is computed by exactly one thread with
/// the same per-index arithmetic, so results do not depend on the mode.
template <class Body>
void for_each_index(std::size_t n, Body&& body) {
  std::size_t workers = 1;
  if (execution_mode() == ExecutionMode::parallel) {
    workers = std::clamp<std::size_t>(std::thread::hardware_concurrency(), 1, 64);
    workers = std::min(workers, n / 64 + 1);
  }
  if (workers <= 1) {
    for (std::size_t i = 0; i < n; ++i) body(i);
    return;
  }
  std::vector<std::thread> pool;
  pool.reserve(workers);
  const std::size_t chunk = (n + workers - 1) / workers;
  for (std::size_t w = 0; w < workers; ++w) {
    const std::size_t lo = w * chunk;
    const std::size_t hi = std::min(n, lo + chunk);
    if (lo >= hi) break;
    pool.emplace_back([lo, hi, &body] {
      for (std::size_t i = lo; i < hi; ++i) body(i);
    });
  }
  for (auto& t : pool) t.join();
}

}  // namespace sld
