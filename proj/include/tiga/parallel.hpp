#pragma once

#include <algorithm>
#include <exception>
#include <thread>
#include <vector>

namespace tiga {

// f(begin, end, chunk) over contiguous chunks of [0, n); exceptions are rethrown in chunk order
template <class F>
void parallel_chunks(int n, int threads, F&& f) {
  threads = std::max(1, std::min(threads, n));
  if (threads <= 1) {
    f(0, n, 0);
    return;
  }
  std::vector<std::thread> pool;
  std::vector<std::exception_ptr> errors(threads);
  for (int c = 0; c < threads; ++c) {
    const int b = static_cast<int>(static_cast<long long>(n) * c / threads);
    const int e = static_cast<int>(static_cast<long long>(n) * (c + 1) / threads);
    pool.emplace_back([&, b, e, c] {
      try {
        f(b, e, c);
      } catch (...) {
        errors[c] = std::current_exception();
      }
    });
  }
  for (auto& t : pool) t.join();
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
}

inline int chunk_count(int n, int threads) { return std::max(1, std::min(threads, n)); }

}  // namespace tiga
