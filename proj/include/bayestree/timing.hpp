#pragma once

#include <functional>
#include <string>
#include <vector>

namespace bayestree {

// One measured phase: wall-clock seconds from a monotonic timer.
struct Timing {
  std::string phase;
  unsigned workers = 1;
  double seconds = 0.0;
};

struct TimingSummary {
  std::string phase;
  unsigned workers = 1;
  int repetitions = 0;
  double min_seconds = 0.0;
  double median_seconds = 0.0;
  double mean_seconds = 0.0;
};

// Wall-clock seconds of one invocation of run().
double time_once(const std::function<void()>& run);

// min/median/mean over a set of measured durations.
TimingSummary summarize_timings(const std::string& phase, unsigned workers,
                                const std::vector<double>& seconds);

// Executes run() `repetitions` times and summarizes the wall-clock times.
TimingSummary benchmark(const std::string& phase, unsigned workers,
                        int repetitions, const std::function<void()>& run);

}  // namespace bayestree
