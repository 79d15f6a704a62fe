#pragma once

#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "errors.hpp"

namespace epibifi {

/// Uniform periodic finite-volume mesh on [0, L).
class Grid1D {
 public:
  Grid1D(double domain_length, int n_cells) : length_(domain_length), n_(n_cells) {
    if (n_cells < 3) throw ConfigError("Grid1D: need at least 3 cells");
    if (!(domain_length > 0.0)) throw ConfigError("Grid1D: domain length must be positive");
    dx_ = length_ / n_;
  }

  double domain_length() const { return length_; }
  int n_cells() const { return n_; }
  double dx() const { return dx_; }
  double center(int i) const { return (i + 0.5) * dx_; }

  std::vector<double> cell_centers() const {
    std::vector<double> x(n_);
    for (int i = 0; i < n_; ++i) x[i] = center(i);
    return x;
  }

  int left(int i) const { return i == 0 ? n_ - 1 : i - 1; }
  int right(int i) const { return i == n_ - 1 ? 0 : i + 1; }

  /// Midpoint-rule integral of a cell-average field.
  double integrate(std::span<const double> field) const {
    check_length(field, "integrate");
    double s = 0.0;
    for (double v : field) s += v;
    return s * dx_;
  }

  void check_length(std::span<const double> field, const char* who) const {
    if (static_cast<int>(field.size()) != n_)
      throw ConfigError(std::string(who) + ": field length " + std::to_string(field.size()) +
                        " does not match grid with " + std::to_string(n_) + " cells");
  }

 private:
  double length_;
  int n_;
  double dx_;
};

inline double minmod(double a, double b) {
  if (a * b <= 0.0) return 0.0;
  return std::abs(a) < std::abs(b) ? a : b;
}

/// Minmod-limited slopes (already divided by dx) with periodic wrap.
inline void reconstruct(std::span<const double> field, const Grid1D& grid, std::span<double> slopes) {
  grid.check_length(field, "reconstruct");
  const int n = grid.n_cells();
  const double inv_dx = 1.0 / grid.dx();
  for (int i = 0; i < n; ++i) {
    const double fl = field[grid.left(i)];
    const double fr = field[grid.right(i)];
    slopes[i] = minmod(field[i] - fl, fr - field[i]) * inv_dx;
  }
}

inline std::vector<double> reconstruct(std::span<const double> field, const Grid1D& grid) {
  std::vector<double> slopes(field.size());
  reconstruct(field, grid, slopes);
  return slopes;
}

/// Total variation of cell averages on the periodic mesh.
inline double total_variation(std::span<const double> field) {
  const std::size_t n = field.size();
  double tv = 0.0;
  for (std::size_t i = 0; i < n; ++i) tv += std::abs(field[(i + 1) % n] - field[i]);
  return tv;
}

/// Total variation of the piecewise-linear reconstruction, counting the
/// in-cell variation and the jumps at every interface.
inline double reconstructed_total_variation(std::span<const double> field, std::span<const double> slopes,
                                            double dx) {
  const std::size_t n = field.size();
  double tv = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t ip = (i + 1) % n;
    tv += std::abs(slopes[i]) * dx;
    const double left_state = field[i] + 0.5 * dx * slopes[i];
    const double right_state = field[ip] - 0.5 * dx * slopes[ip];
    tv += std::abs(right_state - left_state);
  }
  return tv;
}

}  // namespace epibifi
