#pragma once

#include <thread>
#include <vector>

namespace ctrllab {

// Worker cap: LAB_THREADS when set, otherwise hardware concurrency.
int worker_count();

// Static block partition; results must be written to index-addressed
// storage so output stays identical for any worker count.
template <class F>
void parallel_for(int count, F&& body) {
  int workers = worker_count();
  if (workers <= 1 || count < 2 * workers) {
    for (int i = 0; i < count; ++i) body(i);
    return;
  }
  std::vector<std::thread> pool;
  pool.reserve(workers);
  const int chunk = (count + workers - 1) / workers;
  for (int w = 0; w < workers; ++w) {
    const int begin = w * chunk;
    const int end = std::min(count, begin + chunk);
    if (begin >= end) break;
    pool.emplace_back([&body, begin, end] {
      for (int i = begin; i < end; ++i) body(i);
    });
  }
  for (auto& t : pool) t.join();
}

}  // namespace ctrllab
