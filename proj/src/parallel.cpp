#include "mixlab/parallel.hpp"

#include <atomic>

namespace mixlab {
namespace {

std::atomic<unsigned>& worker_setting() {
  static std::atomic<unsigned> n{std::max(1U, std::thread::hardware_concurrency())};
  return n;
}

}  // namespace

void set_thread_count(unsigned n) { worker_setting() = std::max(1U, n); }

unsigned thread_count() { return worker_setting(); }

}  // namespace mixlab
