#include "spinorlab/util.hpp"

#include <algorithm>
#include <cstdlib>
#include <mutex>
#include <thread>

namespace spinorlab {

int thread_count() {
  int n = static_cast<int>(std::thread::hardware_concurrency());
  if (n <= 0) n = 1;
  if (const char* env = std::getenv("SPINORLAB_THREADS")) {
    const int cap = std::atoi(env);
    if (cap > 0) n = std::min(n, cap);
  }
  return n;
}

namespace {
constexpr std::size_t kChunks = 64;
}

void parallel_for(std::size_t n, const std::function<void(std::size_t, std::size_t)>& body) {
  if (n == 0) return;
  const int nt = thread_count();
  if (nt <= 1 || n < 2 * kChunks) {
    body(0, n);
    return;
  }
  const std::size_t chunk = (n + kChunks - 1) / kChunks;
  std::vector<std::thread> pool;
  std::size_t next = 0;
  std::vector<std::pair<std::size_t, std::size_t>> ranges;
  while (next < n) {
    const std::size_t hi = std::min(n, next + chunk);
    ranges.emplace_back(next, hi);
    next = hi;
  }
  std::size_t cursor = 0;
  std::mutex mtx;
  auto worker = [&]() {
    for (;;) {
      std::size_t mine;
      {
        std::lock_guard<std::mutex> lk(mtx);
        if (cursor >= ranges.size()) return;
        mine = cursor++;
      }
      body(ranges[mine].first, ranges[mine].second);
    }
  };
  for (int t = 0; t < nt; ++t) pool.emplace_back(worker);
  for (auto& th : pool) th.join();
}

double parallel_sum(std::size_t n, const std::function<double(std::size_t)>& body) {
  if (n == 0) return 0.0;
  const std::size_t nchunk = std::min(kChunks, n);
  const std::size_t chunk = (n + nchunk - 1) / nchunk;
  std::vector<double> partial((n + chunk - 1) / chunk, 0.0);
  parallel_for(partial.size(), [&](std::size_t clo, std::size_t chi) {
    for (std::size_t c = clo; c < chi; ++c) {
      const std::size_t lo = c * chunk;
      const std::size_t hi = std::min(n, lo + chunk);
      double s = 0.0;
      for (std::size_t i = lo; i < hi; ++i) s += body(i);
      partial[c] = s;
    }
  });
  double total = 0.0;
  for (double p : partial) total += p;
  return total;
}

double bump2d(double t, double x, double t0, double x0, double wt, double wx, double L) {
  double dx = x - x0;
  if (L > 0.0) {
    dx = std::remainder(dx, L);
  }
  const double rt = (t - t0) / wt;
  const double rx = dx / wx;
  const double r2 = rt * rt + rx * rx;
  if (r2 >= 1.0) return 0.0;
  return smooth_bump(std::sqrt(r2));
}

}  // namespace spinorlab
