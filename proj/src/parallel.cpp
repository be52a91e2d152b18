#include "dabag/parallel.hpp"

#include <cstdlib>
#include <string>

namespace dabag {

std::size_t default_threads() {
  if (const char* env = std::getenv("DABAG_THREADS")) {
    try {
      const long v = std::stol(env);
      if (v > 0) return static_cast<std::size_t>(v);
    } catch (...) {
      // fall through to hardware concurrency
    }
  }
  const unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : hw;
}

}  // namespace dabag
