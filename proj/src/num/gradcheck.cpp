#include "topicaux/num/gradcheck.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

namespace topicaux::num {

double relative_error(double a, double b, double floor) {
  return std::abs(a - b) / std::max({std::abs(a), std::abs(b), floor});
}

namespace {

double evaluate(const Objective& f) {
  Tape tape;
  return f(tape).value()[0];
}

}  // namespace

GradCheckResult finite_diff_check(const Objective& f, std::span<Parameter* const> params,
                                  const GradCheckOptions& options) {
  for (Parameter* p : params) p->zero_grad();
  {
    Tape tape;
    tape.backward(f(tape));
  }
  std::vector<Matrix> analytic;
  analytic.reserve(params.size());
  for (const Parameter* p : params) analytic.push_back(p->grad);

  GradCheckResult result;
  for (std::size_t k = 0; k < params.size(); ++k) {
    Parameter& p = *params[k];
    for (std::size_t i = 0; i < p.value.size(); ++i) {
      const double x0 = p.value[i];
      p.value[i] = x0 + options.h;
      const double f_plus = evaluate(f);
      p.value[i] = x0 - options.h;
      const double f_minus = evaluate(f);
      p.value[i] = x0;
      const double numeric = (f_plus - f_minus) / (2.0 * options.h);
      const double rel = relative_error(analytic[k][i], numeric, options.abs_floor);
      result.max_abs_error = std::max(result.max_abs_error, std::abs(analytic[k][i] - numeric));
      if (rel > result.max_rel_error || result.coordinates == 0) {
        result.max_rel_error = std::max(rel, result.max_rel_error);
        result.worst_param = p.name;
        result.worst_index = i;
      }
      ++result.coordinates;
    }
  }
  result.passed = result.max_rel_error <= options.tol;
  return result;
}

}  // namespace topicaux::num
