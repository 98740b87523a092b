#ifndef PCQA_THREADING_HPP
#define PCQA_THREADING_HPP

#include <cstddef>
#include <thread>
#include <vector>

namespace pcqa {

// Runs fn(i) for i in [0, n). Each index must touch only its own output slot;
// the result is then identical for any thread count. threads <= 1 runs serial.
template <typename Fn>
void parallel_for(size_t n, int threads, Fn&& fn) {
  if (threads <= 1 || n < 2) {
    for (size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  size_t nthreads = static_cast<size_t>(threads);
  if (nthreads > n) nthreads = n;
  std::vector<std::thread> pool;
  pool.reserve(nthreads);
  for (size_t t = 0; t < nthreads; ++t) {
    pool.emplace_back([&, t]() {
      for (size_t i = t; i < n; i += nthreads) fn(i);
    });
  }
  for (auto& th : pool) th.join();
}

}  // namespace pcqa

#endif  // PCQA_THREADING_HPP
