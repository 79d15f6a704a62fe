#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <functional>
#include <string>
#include <vector>

#include "collocation.hpp"
#include "errors.hpp"

namespace epibifi {

/// Snapshots stored column-wise, with the discrete inner product ⟨u, v⟩ = w Σ u_k v_k.
struct SnapshotSet {
  std::vector<RandomSample> samples;
  Eigen::MatrixXd vectors;
  double weight = 1.0;

  static SnapshotSet from_columns(std::vector<RandomSample> samples, const std::vector<std::vector<double>>& columns,
                                  double weight) {
    if (samples.size() != columns.size()) throw ConfigError("SnapshotSet: one snapshot per sample");
    if (!(weight > 0.0)) throw ConfigError("SnapshotSet: inner-product weight must be positive");
    SnapshotSet s;
    s.samples = std::move(samples);
    s.weight = weight;
    const Eigen::Index rows = columns.empty() ? 0 : static_cast<Eigen::Index>(columns.front().size());
    s.vectors.resize(rows, static_cast<Eigen::Index>(columns.size()));
    for (std::size_t c = 0; c < columns.size(); ++c) {
      if (static_cast<Eigen::Index>(columns[c].size()) != rows) throw ConfigError("SnapshotSet: snapshots differ in length");
      s.vectors.col(static_cast<Eigen::Index>(c)) = Eigen::Map<const Eigen::VectorXd>(columns[c].data(), rows);
    }
    return s;
  }

  int size() const { return static_cast<int>(vectors.cols()); }
  Eigen::MatrixXd gramian() const { return weight * vectors.transpose() * vectors; }
};

/// Greedy-selected low-fidelity basis with the paired high-fidelity snapshots.
struct BiFiBasis {
  std::vector<int> selected_indices;
  std::vector<RandomSample> points;
  Eigen::MatrixXd lf_basis;
  Eigen::MatrixXd hf_snapshots;
  Eigen::MatrixXd gramian_chol;
  std::vector<double> selection_distances;
  double weight = 1.0;

  int size() const { return static_cast<int>(selected_indices.size()); }
  bool has_hf() const { return hf_snapshots.cols() == size() && size() > 0; }

  /// The first n picks. The leading block of a pivoted Cholesky factor is the
  /// factor of the leading Gramian block, so nothing is recomputed.
  BiFiBasis truncated(int n) const {
    if (n < 0 || n > size()) throw ConfigError("BiFiBasis::truncated: n out of range");
    BiFiBasis b;
    b.selected_indices.assign(selected_indices.begin(), selected_indices.begin() + n);
    b.points.assign(points.begin(), points.begin() + n);
    b.lf_basis = lf_basis.leftCols(n);
    if (hf_snapshots.cols() >= n) b.hf_snapshots = hf_snapshots.leftCols(n);
    b.gramian_chol = gramian_chol.topLeftCorner(n, n);
    b.selection_distances.assign(selection_distances.begin(), selection_distances.begin() + n);
    b.weight = weight;
    return b;
  }

  Eigen::MatrixXd gramian() const { return weight * lf_basis.transpose() * lf_basis; }
};

inline constexpr double rank_tolerance = 1e-14;

/// Picks n snapshots, each the one farthest from the span of those already
/// picked. Pivoted Cholesky on the candidate Gramian: the remaining diagonal
/// holds the squared distances. Columns are formed lazily. Ties go to the
/// lowest index.
inline BiFiBasis greedy_select(const SnapshotSet& candidates, int n) {
  const int N = candidates.size();
  if (n < 0 || n > N) throw ConfigError("greedy_select: n must lie in [0, number of candidates]");
  const Eigen::MatrixXd& U = candidates.vectors;
  const double w = candidates.weight;
  Eigen::VectorXd diag = w * U.colwise().squaredNorm().transpose();
  Eigen::MatrixXd L = Eigen::MatrixXd::Zero(N, n);
  std::vector<bool> taken(N, false);

  BiFiBasis basis;
  basis.weight = w;
  for (int k = 0; k < n; ++k) {
    int p = -1;
    for (int i = 0; i < N; ++i)
      if (!taken[i] && (p < 0 || diag[i] > diag[p])) p = i;
    if (p < 0 || !(diag[p] >= rank_tolerance))
      throw RankDeficiencyError("greedy_select: candidate Gramian has numerical rank " + std::to_string(k) +
                                    ", fewer than the requested " + std::to_string(n),
                                k);
    const double pivot = std::sqrt(diag[p]);
    Eigen::VectorXd col = w * (U.transpose() * U.col(p));
    if (k > 0) col -= L.leftCols(k) * L.row(p).head(k).transpose();
    col /= pivot;
    col[p] = pivot;
    L.col(k) = col;
    for (int i = 0; i < N; ++i) diag[i] = taken[i] ? 0.0 : diag[i] - col[i] * col[i];
    diag[p] = 0.0;
    taken[p] = true;
    basis.selected_indices.push_back(p);
    basis.points.push_back(candidates.samples.empty() ? RandomSample{} : candidates.samples[p]);
    basis.selection_distances.push_back(pivot);
  }

  basis.lf_basis.resize(U.rows(), n);
  basis.gramian_chol = Eigen::MatrixXd::Zero(n, n);
  for (int k = 0; k < n; ++k) {
    const int p = basis.selected_indices[k];
    basis.lf_basis.col(k) = U.col(p);
    basis.gramian_chol.row(k).head(k + 1) = L.row(p).head(k + 1);
  }
  return basis;
}

/// Refactors the Gramian of an explicit basis (used when a basis is loaded).
inline Eigen::MatrixXd gramian_factor(const Eigen::MatrixXd& lf_basis, double weight) {
  const int n = static_cast<int>(lf_basis.cols());
  const Eigen::MatrixXd G = weight * lf_basis.transpose() * lf_basis;
  Eigen::MatrixXd L = Eigen::MatrixXd::Zero(n, n);
  for (int j = 0; j < n; ++j) {
    double d = G(j, j) - L.row(j).head(j).squaredNorm();
    if (!(d >= rank_tolerance)) throw ConditioningError("gramian_factor: Gramian is numerically singular");
    L(j, j) = std::sqrt(d);
    for (int i = j + 1; i < n; ++i) L(i, j) = (G(i, j) - L.row(i).head(j).dot(L.row(j).head(j))) / L(j, j);
  }
  return L;
}

/// Solution of G c = f with f_k = ⟨u, u^L(z_k)⟩. The same least-squares
/// problem is solved by Householder QR of the basis, so the error grows with
/// cond(U) and not cond(U)^2 as through the Gramian factor.
inline Eigen::VectorXd project_coefficients(const Eigen::VectorXd& u_lf, const BiFiBasis& basis) {
  const int n = basis.size();
  if (n == 0) return Eigen::VectorXd();
  if (u_lf.size() != basis.lf_basis.rows()) throw ConfigError("project_coefficients: snapshot length mismatch");
  for (int k = 0; k < n; ++k)
    if (!(std::abs(basis.gramian_chol(k, k)) >= std::sqrt(rank_tolerance)))
      throw ConditioningError("project_coefficients: Gramian factor is ill-conditioned");
  return basis.lf_basis.householderQr().solve(u_lf);
}

inline Eigen::VectorXd project_coefficients(const std::vector<double>& u_lf, const BiFiBasis& basis) {
  return project_coefficients(Eigen::Map<const Eigen::VectorXd>(u_lf.data(), static_cast<Eigen::Index>(u_lf.size())),
                              basis);
}

/// u^B = Σ_k c_k u^H(z_k).
inline std::vector<double> bifi_combine(const Eigen::VectorXd& coeffs, const BiFiBasis& basis) {
  if (!basis.has_hf()) throw ConfigError("bifi: basis has no high-fidelity snapshots");
  const Eigen::VectorXd u = basis.hf_snapshots * coeffs;
  return std::vector<double>(u.data(), u.data() + u.size());
}

using LowFidelityModel = std::function<std::vector<double>(const RandomSample&)>;

inline std::vector<double> bifi_eval(const RandomSample& z, const BiFiBasis& basis, const LowFidelityModel& lf_solver) {
  if (!basis.has_hf()) throw ConfigError("bifi_eval: basis has no high-fidelity snapshots");
  return bifi_combine(project_coefficients(lf_solver(z), basis), basis);
}

/// How the bi-fidelity standard deviation is formed.
enum class StdMethod {
  /// Mean procedure applied to Σ w u², with the basis {u(z_k)²}.
  SecondMoment,
  /// Quadrature statistics of the surrogate u^B evaluated at the rule nodes.
  SurrogateNodes,
};

inline StatField bifi_stats(const BiFiBasis& basis, const QuadratureRule& rule,
                            const std::vector<std::vector<double>>& lf_evals,
                            StdMethod method = StdMethod::SurrogateNodes) {
  if (!basis.has_hf()) throw ConfigError("bifi_stats: basis has no high-fidelity snapshots");
  const StatField lf = estimate_stats(lf_evals, rule);
  StatField out;
  out.mean = bifi_combine(project_coefficients(lf.mean, basis), basis);
  const std::size_t m = out.mean.size();
  out.std.assign(m, 0.0);

  if (method == StdMethod::SurrogateNodes) {
    std::vector<std::vector<double>> surrogate;
    surrogate.reserve(lf_evals.size());
    for (const auto& u : lf_evals) surrogate.push_back(bifi_combine(project_coefficients(u, basis), basis));
    out.std = estimate_stats(surrogate, rule).std;
    return out;
  }

  std::vector<double> m2(lf_evals.front().size(), 0.0);
  for (std::size_t i = 0; i < lf_evals.size(); ++i)
    for (std::size_t k = 0; k < m2.size(); ++k) m2[k] += rule.weights[i] * lf_evals[i][k] * lf_evals[i][k];
  BiFiBasis squares = basis;
  squares.lf_basis = basis.lf_basis.cwiseProduct(basis.lf_basis);
  squares.hf_snapshots = basis.hf_snapshots.cwiseProduct(basis.hf_snapshots);
  squares.gramian_chol = gramian_factor(squares.lf_basis, basis.weight);
  const std::vector<double> m2b = bifi_combine(project_coefficients(m2, squares), squares);
  for (std::size_t k = 0; k < m; ++k) out.std[k] = std::sqrt(std::max(0.0, m2b[k] - out.mean[k] * out.mean[k]));
  return out;
}

/// ‖approx - reference‖ / ‖reference‖ in the dx-weighted discrete L2 norm.
inline double relative_l2_error(const std::vector<double>& approx, const std::vector<double>& reference, double dx) {
  if (approx.size() != reference.size()) throw ConfigError("relative_l2_error: length mismatch");
  double num = 0.0, den = 0.0;
  for (std::size_t k = 0; k < approx.size(); ++k) {
    const double d = approx[k] - reference[k];
    num += dx * d * d;
    den += dx * reference[k] * reference[k];
  }
  if (!(den > 0.0)) throw UndefinedErrorNorm("relative_l2_error: reference has zero norm");
  return std::sqrt(num) / std::sqrt(den);
}

}  // namespace epibifi
