#pragma once

#include <algorithm>
#include <cmath>
#include <vector>

#include "errors.hpp"

namespace epibifi {

/// Steps from t = 0 to t_end with a fixed dt, shortening the last step so the
/// run lands exactly on t_end. `output_times` (ascending, within (0, t_end])
/// are reached the same way and reported through `on_output`.
template <class Step, class Output>
long advance_to(double t_end, double dt, const std::vector<double>& output_times, Step&& step, Output&& on_output) {
  if (!(t_end > 0.0)) throw ConfigError("run: t_end must be positive");
  if (!(dt > 0.0)) throw ConfigError("run: dt must be positive");
  std::vector<double> stops = output_times;
  std::sort(stops.begin(), stops.end());
  stops.erase(std::remove_if(stops.begin(), stops.end(), [&](double s) { return !(s > 0.0) || s > t_end; }),
              stops.end());
  double t = 0.0;
  long n = 0;
  std::size_t next = 0;
  // Relative slack so a step ending within rounding of a stop counts as reaching it.
  const double slack = 1e-12 * t_end;
  while (t < t_end - slack) {
    double target = t_end;
    if (next < stops.size()) target = stops[next];
    const double h = (t + dt >= target - slack) ? target - t : dt;
    step(t, h, n);
    t = (t + dt >= target - slack) ? target : t + h;
    ++n;
    while (next < stops.size() && t >= stops[next] - slack) on_output(stops[next++]);
  }
  return n;
}

}  // namespace epibifi
