#pragma once

#include <algorithm>
#include <cmath>

#include "flowda/core.hpp"

namespace flowda {

// Linear schedule for the curriculum hyperparameter N.
struct AcwSchedule {
  double n_start = 1.0;
  double n_end = 5.0;
  long total_steps = 1;

  void validate() const {
    require(n_end >= n_start, "AcwSchedule: n_end must be >= n_start");
    require(total_steps >= 1, "AcwSchedule: total_steps must be >= 1");
  }
};

inline double current_N(long step, const AcwSchedule& sched) {
  sched.validate();
  require(step >= 0, "current_N: negative step");
  const double t = std::min(static_cast<double>(step) / static_cast<double>(sched.total_steps), 1.0);
  return sched.n_start + (sched.n_end - sched.n_start) * t;
}

// Per-pixel learning-difficulty mask: 1 where valid and EPE <= mu + N*sigma,
// with mu and sigma taken over the valid region (population standard
// deviation, computed per sample). Non-differentiable by contract.
inline BinaryMask acw_mask(const EpeMap& epe, double N, const BinaryMask& valid) {
  require(epe.h == valid.h && epe.w == valid.w, "acw_mask: valid mask shape mismatch");
  require(N >= 0.0, "acw_mask: N must be >= 0");
  double sum = 0.0;
  std::size_t count = 0;
  for (int y = 0; y < epe.h; ++y)
    for (int x = 0; x < epe.w; ++x)
      if (valid.at(y, x)) {
        sum += epe.at(y, x);
        ++count;
      }
  require(count > 0, "acw_mask: valid mask has no ones, no statistics computable");
  const double mu = sum / static_cast<double>(count);
  double var = 0.0;
  for (int y = 0; y < epe.h; ++y)
    for (int x = 0; x < epe.w; ++x)
      if (valid.at(y, x)) {
        const double d = epe.at(y, x) - mu;
        var += d * d;
      }
  var /= static_cast<double>(count);
  const double threshold = mu + N * std::sqrt(var);

  BinaryMask mask(epe.h, epe.w);
  for (int y = 0; y < epe.h; ++y)
    for (int x = 0; x < epe.w; ++x) mask.at(y, x) = (valid.at(y, x) && epe.at(y, x) <= threshold) ? 1 : 0;
  return mask;
}

}  // namespace flowda
