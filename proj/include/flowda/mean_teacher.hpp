#pragma once

#include "flowda/errors.hpp"
#include "flowda/params.hpp"

namespace flowda {

// Teacher parameter vector phi, maintained as an exponential moving average
// of the student's theta. Teacher forwards are evaluation-only; no gradient
// ever reaches phi.
struct TeacherState {
  ParamStore phi;
  long step_count = 0;
};

// Both models start from the same weights: phi is an exact copy of theta.
inline TeacherState init_teacher(const ParamStore& student) {
  require(!student.empty(), "init_teacher: empty student parameter store");
  return TeacherState{student, 0};
}

// phi <- lambda * phi + (1 - lambda) * theta, elementwise; covers every
// tensor in the store uniformly. Applied once per optimizer step.
inline void ema_update(TeacherState& state, const ParamStore& student, double lambda) {
  require(lambda >= 0.0 && lambda <= 1.0, "ema_update: lambda must be in [0, 1]");
  require(state.phi.same_layout(student), "ema_update: student layout does not match teacher");
  auto it = state.phi.begin();
  auto jt = student.begin();
  for (; it != state.phi.end(); ++it, ++jt) {
    ad::Tensor& phi = it->second;
    const ad::Tensor& theta = jt->second;
    for (std::size_t i = 0; i < phi.size(); ++i) phi.x[i] = lambda * phi.x[i] + (1.0 - lambda) * theta.x[i];
  }
  ++state.step_count;
}

}  // namespace flowda
