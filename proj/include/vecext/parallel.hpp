#pragma once

// Deterministic batched Monte Carlo reduction.
//
// Replicates 0..R-1 are split into contiguous batches. Each batch is reduced
// sequentially by a single worker and batches are combined in index order, so
// results are bit-identical for any worker count.

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <span>
#include <stdexcept>
#include <thread>
#include <vector>

namespace vecext {

inline unsigned default_threads() {
  if (const char* env = std::getenv("VECEXT_THREADS")) {
    const int v = std::atoi(env);
    if (v > 0) return static_cast<unsigned>(v);
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

struct BatchStats {
  double mean = 0.0;
  double std_error = 0.0;
  std::uint64_t replicates = 0;
  std::vector<double> batch_means;
};

struct BatchOptions {
  std::size_t batches = 50;
  unsigned threads = 0;  // 0: default_threads()
};

// fn(replicate, out) writes `outputs` values for one replicate; it must be
// safe to call concurrently for distinct replicates.
template <class Fn>
std::vector<BatchStats> run_batches(std::uint64_t replicates, std::size_t outputs, Fn&& fn,
                                    BatchOptions options = {}) {
  if (replicates == 0) throw std::invalid_argument("run_batches: at least one replicate");
  const std::size_t batches =
      static_cast<std::size_t>(std::min<std::uint64_t>(std::max<std::size_t>(options.batches, 1), replicates));
  const unsigned threads = std::max(1u, std::min<unsigned>(options.threads ? options.threads : default_threads(),
                                                           static_cast<unsigned>(batches)));
  auto batch_begin = [&](std::size_t b) { return replicates * b / batches; };

  std::vector<double> sums(batches * outputs, 0.0);
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;

  auto worker = [&]() {
    std::vector<double> out(outputs);
    for (;;) {
      const std::size_t b = next.fetch_add(1);
      if (b >= batches) return;
      try {
        double* acc = &sums[b * outputs];
        for (std::uint64_t r = batch_begin(b); r < batch_begin(b + 1); ++r) {
          std::fill(out.begin(), out.end(), 0.0);
          fn(r, std::span<double>(out));
          for (std::size_t k = 0; k < outputs; ++k) acc[k] += out[k];
        }
      } catch (...) {
        std::lock_guard lock(failure_mutex);
        if (!failure) failure = std::current_exception();
        next.store(batches);
        return;
      }
    }
  };

  if (threads == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (unsigned t = 0; t < threads; ++t) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }
  if (failure) std::rethrow_exception(failure);

  std::vector<BatchStats> stats(outputs);
  for (std::size_t k = 0; k < outputs; ++k) {
    auto& s = stats[k];
    s.replicates = replicates;
    s.batch_means.resize(batches);
    double total = 0.0;
    for (std::size_t b = 0; b < batches; ++b) {
      const double count = static_cast<double>(batch_begin(b + 1) - batch_begin(b));
      total += sums[b * outputs + k];
      s.batch_means[b] = sums[b * outputs + k] / count;
    }
    s.mean = total / static_cast<double>(replicates);
    if (batches > 1) {
      double bm = 0.0;
      for (double v : s.batch_means) bm += v;
      bm /= static_cast<double>(batches);
      double ss = 0.0;
      for (double v : s.batch_means) ss += (v - bm) * (v - bm);
      s.std_error = std::sqrt(ss / static_cast<double>(batches - 1) / static_cast<double>(batches));
    }
  }
  return stats;
}

template <class Fn>
BatchStats run_batches_scalar(std::uint64_t replicates, Fn&& fn, BatchOptions options = {}) {
  return run_batches(
      replicates, 1, [&](std::uint64_t r, std::span<double> out) { out[0] = fn(r); }, options)[0];
}

}  // namespace vecext
