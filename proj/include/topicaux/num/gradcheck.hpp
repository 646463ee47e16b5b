#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <string>

#include "topicaux/num/tape.hpp"

namespace topicaux::num {

/// Builds a scalar loss on the given tape from the current parameter values.
/// Must be deterministic: reuse the same random draws on every call.
using Objective = std::function<Var(Tape&)>;

struct GradCheckOptions {
  double h = 1e-5;
  double tol = 1e-6;
  /// Denominator floor of the relative error, so coordinates whose true
  /// gradient is ~0 are judged by absolute error instead.
  double abs_floor = 1e-8;
};

struct GradCheckResult {
  bool passed = false;
  double max_rel_error = 0.0;
  double max_abs_error = 0.0;
  std::string worst_param;
  std::size_t worst_index = 0;
  std::size_t coordinates = 0;
};

/// Relative error |a - b| / max(|a|, |b|, floor).
double relative_error(double a, double b, double floor);

/// Compares tape gradients of f against central differences, coordinate by
/// coordinate, at the current parameter values (which are restored).
GradCheckResult finite_diff_check(const Objective& f, std::span<Parameter* const> params,
                                  const GradCheckOptions& options = {});

}  // namespace topicaux::num
