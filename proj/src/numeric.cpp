#include "eot/numeric.hpp"

#include <algorithm>
#include <limits>
#include <thread>
#include <vector>

namespace eot {

double compensated_sum(std::span<const double> xs) noexcept {
  CompensatedSum acc;
  for (double x : xs) acc.add(x);
  return acc.value();
}

double compensated_dot(std::span<const double> a, std::span<const double> b) noexcept {
  CompensatedSum acc;
  const std::size_t n = std::min(a.size(), b.size());
  for (std::size_t k = 0; k < n; ++k) acc.add(a[k] * b[k]);
  return acc.value();
}

double log_sum_exp(std::span<const double> xs) noexcept {
  double top = -std::numeric_limits<double>::infinity();
  for (double x : xs) top = std::max(top, x);
  if (!std::isfinite(top)) return top;
  CompensatedSum acc;
  for (double x : xs) acc.add(std::exp(x - top));
  return top + std::log(acc.value());
}

void parallel_for(std::size_t count, std::size_t work_per_item, unsigned threads,
                  const std::function<void(std::size_t, std::size_t)>& body) {
  constexpr std::size_t kMinWorkPerThread = 1 << 16;
  if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
  const std::size_t total_work = count * std::max<std::size_t>(work_per_item, 1);
  const std::size_t useful =
      std::max<std::size_t>(1, std::min<std::size_t>(threads, total_work / kMinWorkPerThread));
  const std::size_t workers = std::min(useful, count);
  if (workers <= 1) {
    if (count > 0) body(0, count);
    return;
  }
  const std::size_t chunk = (count + workers - 1) / workers;
  std::vector<std::jthread> pool;
  pool.reserve(workers - 1);
  for (std::size_t w = 1; w < workers; ++w) {
    const std::size_t begin = w * chunk;
    const std::size_t end = std::min(count, begin + chunk);
    if (begin >= end) break;
    pool.emplace_back([&body, begin, end] { body(begin, end); });
  }
  body(0, std::min(count, chunk));
}

}  // namespace eot
