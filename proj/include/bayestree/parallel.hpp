#pragma once

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <mutex>
#include <optional>
#include <stdexcept>
#include <string>
#include <thread>
#include <utility>
#include <vector>

namespace bayestree {

namespace detail {
// Set while a thread is executing a parallel task; nested maps see it and
// run their tasks inline instead of spawning a second layer of threads.
extern thread_local bool inside_parallel_task;
}  // namespace detail

// Effective thread count for `requested` workers over `task_count` tasks.
// The BAYESTREE_WORKERS environment variable overrides `requested`;
// requested == 0 means "logical core count". The result is capped at
// task_count and never drops below 1.
unsigned resolve_workers(unsigned requested, std::size_t task_count);

// Raised when one or more tasks in a batch threw. Carries the input indices
// of the failed tasks (ascending).
struct ParallelTaskError : std::runtime_error {
  std::vector<std::size_t> failed_indices;
  ParallelTaskError(const std::string& what, std::vector<std::size_t> indices)
      : std::runtime_error(what), failed_indices(std::move(indices)) {}
};

// Applies task(i) for i in [0, n) over a self-scheduling thread team and
// returns the results in input order. Output is a pure function of the task
// results, so it does not depend on worker count or scheduling. One task
// failure aborts the batch: workers stop claiming new indices and the batch
// throws ParallelTaskError.
template <typename R, typename Fn>
std::vector<R> parallel_map_ordered(std::size_t n, unsigned workers, Fn&& task) {
  std::vector<std::optional<R>> slots(n);

  unsigned threads = resolve_workers(workers, n);
  if (detail::inside_parallel_task) threads = 1;

  std::vector<std::pair<std::size_t, std::string>> errors;

  if (threads <= 1) {
    const bool was_inside = detail::inside_parallel_task;
    detail::inside_parallel_task = true;
    for (std::size_t i = 0; i < n && errors.empty(); ++i) {
      try {
        slots[i].emplace(task(i));
      } catch (const std::exception& e) {
        errors.emplace_back(i, e.what());
      } catch (...) {
        errors.emplace_back(i, "unknown error");
      }
    }
    detail::inside_parallel_task = was_inside;
  } else {
    std::atomic<std::size_t> next{0};
    std::atomic<bool> failed{false};
    std::mutex err_mu;

    auto worker = [&] {
      detail::inside_parallel_task = true;
      for (;;) {
        if (failed.load(std::memory_order_relaxed)) break;
        const std::size_t i = next.fetch_add(1, std::memory_order_relaxed);
        if (i >= n) break;
        try {
          slots[i].emplace(task(i));
        } catch (const std::exception& e) {
          std::lock_guard<std::mutex> lock(err_mu);
          errors.emplace_back(i, e.what());
          failed.store(true, std::memory_order_relaxed);
        } catch (...) {
          std::lock_guard<std::mutex> lock(err_mu);
          errors.emplace_back(i, "unknown error");
          failed.store(true, std::memory_order_relaxed);
        }
      }
      detail::inside_parallel_task = false;
    };

    std::vector<std::thread> team;
    team.reserve(threads - 1);
    for (unsigned t = 0; t + 1 < threads; ++t) team.emplace_back(worker);
    {
      // calling thread participates; its flag is restored by worker()
      const bool was_inside = detail::inside_parallel_task;
      worker();
      detail::inside_parallel_task = was_inside;
    }
    for (auto& t : team) t.join();
  }

  if (!errors.empty()) {
    std::sort(errors.begin(), errors.end());
    std::string what = "parallel task " + std::to_string(errors.front().first) +
                       " failed: " + errors.front().second;
    if (errors.size() > 1) {
      what += " (+" + std::to_string(errors.size() - 1) + " more)";
    }
    std::vector<std::size_t> indices;
    indices.reserve(errors.size());
    for (const auto& [i, msg] : errors) indices.push_back(i);
    throw ParallelTaskError(what, std::move(indices));
  }

  std::vector<R> out;
  out.reserve(n);
  for (auto& slot : slots) out.push_back(std::move(*slot));
  return out;
}

}  // namespace bayestree
