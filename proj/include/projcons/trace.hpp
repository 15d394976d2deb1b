#pragma once

#include <cmath>
#include <cstdio>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "projcons/linalg.hpp"

namespace projcons {

struct TraceStep {
  long t = 0;
  std::vector<Vector> states;
  std::vector<double> per_agent_error;
  double disagreement = 0.0;
  double residual = 0.0;

  double max_error() const {
    double best = 0.0;
    for (double e : per_agent_error) best = std::max(best, e);
    return best;
  }
};

// Time-indexed record of one run.  per_agent_error is measured against the
// known solution when the problem has one, otherwise against the run's own
// final consensus point.
struct Trace {
  std::vector<TraceStep> steps;
  bool converged = false;
  std::optional<long> converged_at;
  std::optional<double> empirical_rate;

  const TraceStep& final_step() const { return steps.back(); }
};

// max over agent pairs of |x_i - x_j|_2.
inline double disagreement(const std::vector<Vector>& states) {
  double best = 0.0;
  for (std::size_t i = 0; i < states.size(); ++i)
    for (std::size_t j = i + 1; j < states.size(); ++j)
      best = std::max(best, (states[i] - states[j]).norm());
  return best;
}

inline Vector agent_average(const std::vector<Vector>& states) {
  Vector avg = Vector::Zero(states.front().size());
  for (const auto& x : states) avg += x;
  return avg / static_cast<double>(states.size());
}

struct LineFit {
  double slope = 0.0;
  double intercept = 0.0;
  double r_squared = 0.0;
  long points = 0;
};

inline LineFit linear_fit(const std::vector<double>& xs, const std::vector<double>& ys) {
  LineFit fit;
  fit.points = static_cast<long>(xs.size());
  if (xs.size() != ys.size() || xs.size() < 2) return fit;
  const double n = static_cast<double>(xs.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0, syy = 0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    sx += xs[i];
    sy += ys[i];
    sxx += xs[i] * xs[i];
    sxy += xs[i] * ys[i];
    syy += ys[i] * ys[i];
  }
  const double denom = n * sxx - sx * sx;
  if (denom == 0.0) return fit;
  fit.slope = (n * sxy - sx * sy) / denom;
  fit.intercept = (sy - fit.slope * sx) / n;
  double ss_res = 0, ss_tot = 0;
  const double mean_y = sy / n;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double pred = fit.slope * xs[i] + fit.intercept;
    ss_res += (ys[i] - pred) * (ys[i] - pred);
    ss_tot += (ys[i] - mean_y) * (ys[i] - mean_y);
  }
  fit.r_squared = (ss_tot == 0.0) ? 1.0 : 1.0 - ss_res / ss_tot;
  return fit;
}

// Slope of log(max_i error) against t, fitted over the last half of the
// trace.  Steps whose max error is zero are skipped.
inline LineFit fit_log_decay(const Trace& trace) {
  std::vector<double> ts, logs;
  const std::size_t start = trace.steps.size() / 2;
  for (std::size_t i = start; i < trace.steps.size(); ++i) {
    const double e = trace.steps[i].max_error();
    if (e <= 0.0) continue;
    ts.push_back(static_cast<double>(trace.steps[i].t));
    logs.push_back(std::log(e));
  }
  return linear_fit(ts, logs);
}

// 17 significant digits, enough to round-trip any double exactly.
inline std::string format_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

// Long-form CSV: header `t,agent,err,disagreement,residual`, one row per
// (t, agent) with 1-based agent ids and LF line endings.
inline void write_trace_csv(const Trace& trace, std::ostream& os) {
  os << "t,agent,err,disagreement,residual\n";
  for (const auto& step : trace.steps) {
    for (std::size_t i = 0; i < step.per_agent_error.size(); ++i) {
      os << step.t << ',' << (i + 1) << ',' << format_double(step.per_agent_error[i]) << ','
         << format_double(step.disagreement) << ',' << format_double(step.residual) << '\n';
    }
  }
}

}  // namespace projcons
