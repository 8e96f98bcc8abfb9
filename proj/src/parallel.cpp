#include "bayestree/parallel.hpp"

#include <cstdlib>

namespace bayestree {

namespace detail {
thread_local bool inside_parallel_task = false;
}  // namespace detail

unsigned resolve_workers(unsigned requested, std::size_t task_count) {
  if (task_count == 0) return 1;

  unsigned w = requested;
  if (const char* env = std::getenv("BAYESTREE_WORKERS")) {
    char* end = nullptr;
    const unsigned long v = std::strtoul(env, &end, 10);
    // malformed or zero values are ignored, not an error
    if (end != env && *end == '\0' && v >= 1) {
      w = static_cast<unsigned>(v);
    }
  }
  if (w == 0) {
    w = std::thread::hardware_concurrency();
    if (w == 0) w = 1;
  }
  if (static_cast<std::size_t>(w) > task_count) {
    w = static_cast<unsigned>(task_count);
  }
  return w;
}

}  // namespace bayestree
