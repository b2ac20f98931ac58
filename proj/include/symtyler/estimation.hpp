#pragma once

// Tyler's fixed-point shape estimator and its group-symmetric variant
// (STyler), which is Tyler's iteration run on the orbit G X of the data.

#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "symtyler/sampling.hpp"

namespace symtyler {

struct EstimatorConfig {
  double tol = 1e-10;  // relative Frobenius step between unit-trace iterates
  int max_iter = 1000;
  std::optional<CMatrix> init;  // identity when empty

  void validate(Index p) const {
    require(tol > 0.0 && std::isfinite(tol), ErrorKind::InvalidArgument, "tol must be positive");
    require(max_iter >= 1, ErrorKind::InvalidArgument, "max_iter must be at least 1");
    if (init) {
      require(init->rows() == p && init->cols() == p, ErrorKind::DimMismatch,
              "initial matrix has the wrong dimension");
      require_positive_definite(HermitianEigen(*init), "initial matrix");
    }
  }
};

enum class EstimatorStatus { converged, max_iter, diverged };

constexpr std::string_view to_string(EstimatorStatus s) noexcept {
  switch (s) {
    case EstimatorStatus::converged: return "converged";
    case EstimatorStatus::max_iter: return "max_iter";
    case EstimatorStatus::diverged: return "diverged";
  }
  return "unknown";
}

struct EstimatorReport {
  CMatrix estimate;                       // unit trace (last valid iterate)
  int iterations = 0;
  std::vector<double> step_norms;         // ||T_{j+1} - T_j||_F / ||T_{j+1}||_F
  std::vector<double> residuals;          // ||T_j - map(T_j)||_F, map = normalized update
  std::vector<double> objective_values;   // objective at T_0, T_1, ..., T_final
  double fixed_point_residual = std::numeric_limits<double>::quiet_NaN();
  EstimatorStatus status = EstimatorStatus::max_iter;
  std::string diagnostic;

  double relative_residual() const { return fixed_point_residual / estimate.norm(); }
  bool converged() const { return status == EstimatorStatus::converged; }
  ShapeMatrix shape() const { return ShapeMatrix::normalized(estimate); }
};

namespace detail {

inline void check_vectors(const CMatrix& x) {
  for (Index i = 0; i < x.cols(); ++i) {
    const double nrm = x.col(i).norm();
    require(std::isfinite(nrm), ErrorKind::InvalidArgument,
            "sample " + std::to_string(i) + " has non-finite entries");
    require(nrm > 0.0, ErrorKind::ZeroVector, "sample " + std::to_string(i) + " is the zero vector");
  }
}

/// Columns K x_i for every K in G, element-major.
inline CMatrix orbit_matrix(const CMatrix& x, const GroupSpec& g) {
  require(x.rows() == g.dim(), ErrorKind::DimMismatch,
          "sample dimension " + std::to_string(x.rows()) + " vs group dimension " +
              std::to_string(g.dim()));
  const Index n = x.cols();
  CMatrix out(x.rows(), n * static_cast<Index>(g.order()));
  for (std::size_t k = 0; k < g.order(); ++k)
    out.middleCols(static_cast<Index>(k) * n, n) = g.elements()[k].apply(x);
  return out;
}

inline constexpr double kMinQuadratic = 1e-300;

/// Quadratic forms z^H Theta^{-1} z for the columns of z, plus log|Theta|.
struct QuadraticForms {
  Eigen::VectorXd q;
  double log_det = 0.0;
};

inline std::optional<QuadraticForms> quadratic_forms(const CMatrix& z, const CMatrix& theta) {
  Eigen::LLT<CMatrix> llt(theta);
  if (llt.info() != Eigen::Success) return std::nullopt;
  const CMatrix& l = llt.matrixLLT();
  QuadraticForms out;
  for (Index i = 0; i < l.rows(); ++i) {
    const double d = l(i, i).real();
    if (!(d > 0.0)) return std::nullopt;
    out.log_det += 2.0 * std::log(d);
  }
  const CMatrix y = llt.matrixL().solve(z);
  out.q = y.colwise().squaredNorm().transpose();
  return out;
}

/// (p/N) sum_k z_k z_k^H / q_k
inline CMatrix weighted_scatter(const CMatrix& z, const Eigen::VectorXd& q) {
  const Eigen::VectorXd w = q.cwiseInverse();
  CMatrix psi = (z * w.asDiagonal()) * z.adjoint();
  psi *= static_cast<double>(z.rows()) / static_cast<double>(z.cols());
  return hermitian_part(psi);
}

inline bool usable(const Eigen::VectorXd& q) {
  return q.allFinite() && q.minCoeff() >= kMinQuadratic;
}

/// Normalized fixed-point iteration on the columns of z.
inline EstimatorReport iterate(const CMatrix& z, const EstimatorConfig& cfg) {
  const Index p = z.rows();
  const double scale = static_cast<double>(p) / static_cast<double>(z.cols());
  EstimatorReport report;
  CMatrix theta = cfg.init ? unit_trace(*cfg.init) : CMatrix(CMatrix::Identity(p, p) / static_cast<double>(p));
  report.estimate = theta;

  auto breakdown = [&](const std::string& why) {
    report.status = EstimatorStatus::diverged;
    report.diagnostic = std::string(to_string(ErrorKind::NumericalBreakdown)) + ": " + why;
    return report;
  };

  report.status = EstimatorStatus::max_iter;
  for (int j = 0; j < cfg.max_iter; ++j) {
    auto forms = quadratic_forms(z, theta);
    if (!forms) return breakdown("iterate lost positive definiteness at iteration " + std::to_string(j));
    if (!usable(forms->q)) return breakdown("quadratic form below 1e-300 at iteration " + std::to_string(j));
    report.objective_values.push_back(scale * forms->q.array().log().sum() + forms->log_det);

    CMatrix next = unit_trace(weighted_scatter(z, forms->q));
    const double step = (next - theta).norm();
    report.residuals.push_back(step);
    report.step_norms.push_back(step / next.norm());
    ++report.iterations;
    theta = std::move(next);
    report.estimate = theta;
    if (!theta.allFinite()) return breakdown("non-finite iterate");
    if (report.step_norms.back() <= cfg.tol) {
      report.status = EstimatorStatus::converged;
      break;
    }
  }

  auto forms = quadratic_forms(z, theta);
  if (!forms || !usable(forms->q)) return breakdown("final iterate is singular");
  report.objective_values.push_back(scale * forms->q.array().log().sum() + forms->log_det);
  report.fixed_point_residual = (theta - unit_trace(weighted_scatter(z, forms->q))).norm();
  return report;
}

}  // namespace detail

/// Tyler's estimator, normalized to unit trace. Requires n > p.
inline EstimatorReport tyler_estimate(const SampleSet& x, const EstimatorConfig& cfg = {}) {
  const Index p = x.dim(), n = x.size();
  cfg.validate(p);
  require(n > p, ErrorKind::InsufficientSamples,
          "Tyler's estimator needs n > p (n=" + std::to_string(n) + ", p=" + std::to_string(p) + ")");
  detail::check_vectors(x.vectors());
  return detail::iterate(x.vectors(), cfg);
}

/// Group-symmetric Tyler estimator. Requires n > delta(G) p.
inline EstimatorReport styler_estimate(const SampleSet& x, const GroupSpec& g,
                                       const StructureInfo& s, const EstimatorConfig& cfg = {}) {
  const Index p = x.dim(), n = x.size();
  require(g.dim() == p && s.dim() == p, ErrorKind::DimMismatch,
          "sample, group and structure dimensions differ");
  cfg.validate(p);
  require(s.admits(n), ErrorKind::InsufficientSamples,
          "STyler needs n > delta(G) p = " + std::to_string(s.delta() * static_cast<double>(p)) +
              " (n=" + std::to_string(n) + ")");
  detail::check_vectors(x.vectors());
  return detail::iterate(detail::orbit_matrix(x.vectors(), g), cfg);
}

/// Unnormalized right-hand side (p/(n|G|)) sum_i sum_K K x x^H K^H / (x^H K^H Theta^{-1} K x).
inline CMatrix fixed_point_map(const SampleSet& x, const GroupSpec& g, const CMatrix& theta) {
  require(theta.rows() == x.dim() && theta.cols() == x.dim(), ErrorKind::DimMismatch,
          "theta and sample dimensions differ");
  detail::check_vectors(x.vectors());
  const CMatrix z = detail::orbit_matrix(x.vectors(), g);
  auto forms = detail::quadratic_forms(z, hermitian_part(theta));
  require(forms.has_value(), ErrorKind::NotPositiveDefinite, "theta is not positive definite");
  require(detail::usable(forms->q), ErrorKind::NumericalBreakdown, "quadratic form below 1e-300");
  return detail::weighted_scatter(z, forms->q);
}

/// ||Theta - RHS(Theta)||_F for the unnormalized Tyler equation. No sample-size gate.
inline double tyler_residual(const SampleSet& x, const CMatrix& theta) {
  return (theta - fixed_point_map(x, close_group(std::vector<UnitaryMatrix>{}, x.dim()), theta)).norm();
}

inline double styler_residual(const SampleSet& x, const GroupSpec& g, const CMatrix& theta) {
  return (theta - fixed_point_map(x, g, theta)).norm();
}

/// (p/n) sum_i log(x_i^H Theta^{-1} x_i) + log|Theta|
inline double objective_F(const CMatrix& theta, const SampleSet& x) {
  require(theta.rows() == x.dim() && theta.cols() == x.dim(), ErrorKind::DimMismatch,
          "theta and sample dimensions differ");
  detail::check_vectors(x.vectors());
  auto forms = detail::quadratic_forms(x.vectors(), hermitian_part(theta));
  require(forms.has_value(), ErrorKind::NotPositiveDefinite, "theta is not positive definite");
  const double p = static_cast<double>(x.dim()), n = static_cast<double>(x.size());
  return p / n * forms->q.array().log().sum() + forms->log_det;
}

/// (p/(n|G|)) sum_i sum_K log(x_i^H K^H Theta^{-1} K x_i) + log|Theta|, for invariant Theta.
inline double objective_FG(const CMatrix& theta, const SampleSet& x, const GroupSpec& g) {
  require(theta.rows() == x.dim() && g.dim() == x.dim(), ErrorKind::DimMismatch,
          "theta, group and sample dimensions differ");
  require(is_invariant(theta, g, tolerance::structure * std::max(1.0, theta.norm())),
          ErrorKind::NotInvariant, "theta is not G-invariant");
  detail::check_vectors(x.vectors());
  const CMatrix z = detail::orbit_matrix(x.vectors(), g);
  auto forms = detail::quadratic_forms(z, hermitian_part(theta));
  require(forms.has_value(), ErrorKind::NotPositiveDefinite, "theta is not positive definite");
  const double p = static_cast<double>(x.dim()), count = static_cast<double>(z.cols());
  return p / count * forms->q.array().log().sum() + forms->log_det;
}

/// Least n with n > delta(G) p, i.e. max_i floor(s_i / p_i) + 1.
inline int min_samples(const StructureInfo& s) {
  int worst = 0;
  for (const auto& c : s.components()) worst = std::max(worst, c.block_size / c.replication);
  return worst + 1;
}

}  // namespace symtyler
