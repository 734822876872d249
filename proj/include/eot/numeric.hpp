#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>

namespace eot {

/// Neumaier-compensated accumulator. Additions happen in call order, so a
/// fixed loop order gives bit-reproducible totals.
class CompensatedSum {
 public:
  void add(double x) noexcept {
    const double t = sum_ + x;
    if (std::fabs(sum_) >= std::fabs(x)) {
      comp_ += (sum_ - t) + x;
    } else {
      comp_ += (x - t) + sum_;
    }
    sum_ = t;
  }
  double value() const noexcept { return sum_ + comp_; }

 private:
  double sum_ = 0.0;
  double comp_ = 0.0;
};

/// Compensated sum of a span in index order.
double compensated_sum(std::span<const double> xs) noexcept;

/// Compensated Σ a_k b_k in index order.
double compensated_dot(std::span<const double> a, std::span<const double> b) noexcept;

/// log Σ exp(x_k) with max-subtraction. -inf entries contribute nothing; an
/// all -inf input yields -inf.
double log_sum_exp(std::span<const double> xs) noexcept;

/// Runs body(begin, end) over [0, count) split into contiguous chunks.
/// Each index is handled by exactly one call, so results that depend only on
/// the index are independent of `threads`. threads == 0 means hardware
/// concurrency; small workloads run inline.
void parallel_for(std::size_t count, std::size_t work_per_item, unsigned threads,
                  const std::function<void(std::size_t, std::size_t)>& body);

/// Uniform double in [0, 1) built from the top 53 bits of a 64-bit draw.
/// Unlike std::uniform_real_distribution this is identical on every platform.
inline double unit_interval(std::uint64_t bits) noexcept {
  return static_cast<double>(bits >> 11) * 0x1.0p-53;
}

}  // namespace eot
