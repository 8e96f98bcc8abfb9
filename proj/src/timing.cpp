#include "bayestree/timing.hpp"

#include <algorithm>
#include <chrono>
#include <numeric>
#include <stdexcept>

namespace bayestree {

double time_once(const std::function<void()>& run) {
  const auto start = std::chrono::steady_clock::now();
  run();
  const auto stop = std::chrono::steady_clock::now();
  return std::chrono::duration<double>(stop - start).count();
}

TimingSummary summarize_timings(const std::string& phase, unsigned workers,
                                const std::vector<double>& seconds) {
  if (seconds.empty()) {
    throw std::invalid_argument("summarize_timings: no measurements");
  }
  std::vector<double> sorted = seconds;
  std::sort(sorted.begin(), sorted.end());

  TimingSummary s;
  s.phase = phase;
  s.workers = workers;
  s.repetitions = static_cast<int>(sorted.size());
  s.min_seconds = sorted.front();
  const std::size_t mid = sorted.size() / 2;
  s.median_seconds = (sorted.size() % 2 == 1)
                         ? sorted[mid]
                         : 0.5 * (sorted[mid - 1] + sorted[mid]);
  s.mean_seconds =
      std::accumulate(sorted.begin(), sorted.end(), 0.0) / sorted.size();
  return s;
}

TimingSummary benchmark(const std::string& phase, unsigned workers,
                        int repetitions, const std::function<void()>& run) {
  if (repetitions < 1) {
    throw std::invalid_argument("benchmark: repetitions must be positive");
  }
  std::vector<double> seconds;
  seconds.reserve(repetitions);
  for (int r = 0; r < repetitions; ++r) seconds.push_back(time_once(run));
  return summarize_timings(phase, workers, seconds);
}

}  // namespace bayestree
