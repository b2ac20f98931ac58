#pragma once

// Error metrics, the high-probability error bound for the inverse STyler,
// and the Monte Carlo harness comparing estimators across sample sizes.

#include <algorithm>
#include <atomic>
#include <cstdio>
#include <functional>
#include <ostream>
#include <thread>

#include "symtyler/estimation.hpp"

namespace symtyler {

// ---------------------------------------------------------------------------
// Metrics
// ---------------------------------------------------------------------------

/// ||est^{-1} - truth^{-1}||_F after rescaling est so Tr(est^{-1}) = Tr(truth^{-1}).
inline double frob_error_inverse(const CMatrix& estimate, const CMatrix& truth) {
  require_same_dim(estimate, truth, "frob_error_inverse");
  const CMatrix omega_hat = pd_inverse(estimate);
  const CMatrix omega = pd_inverse(truth);
  const CMatrix matched = omega_hat * (real_trace(omega) / real_trace(omega_hat));
  return (matched - omega).norm();
}

inline double frob_error_inverse(const ShapeMatrix& estimate, const ShapeMatrix& truth) {
  return frob_error_inverse(estimate.matrix(), truth.matrix());
}

/// Squared Frobenius distance between the unit-trace versions of both.
inline double mse_error(const CMatrix& estimate, const CMatrix& truth) {
  require_same_dim(estimate, truth, "mse_error");
  require_positive_definite(HermitianEigen(estimate), "estimate");
  require_positive_definite(HermitianEigen(truth), "truth");
  return (unit_trace(estimate) - unit_trace(truth)).squaredNorm();
}

inline double mse_error(const ShapeMatrix& estimate, const ShapeMatrix& truth) {
  return mse_error(estimate.matrix(), truth.matrix());
}

/// (1/n) sum x_i x_i^H
inline CMatrix sample_covariance(const SampleSet& x) {
  require(x.size() >= 1, ErrorKind::InvalidArgument, "need at least one sample");
  return hermitian_part(x.vectors() * x.vectors().adjoint() / static_cast<double>(x.size()));
}

/// (1/(n|G|)) sum_i sum_K K x_i x_i^H K^H, accumulated over the orbit directly.
inline CMatrix group_sample_covariance(const SampleSet& x, const GroupSpec& g) {
  require(x.size() >= 1, ErrorKind::InvalidArgument, "need at least one sample");
  const CMatrix z = detail::orbit_matrix(x.vectors(), g);
  return hermitian_part(z * z.adjoint() / static_cast<double>(z.cols()));
}

// ---------------------------------------------------------------------------
// Error bound
// ---------------------------------------------------------------------------

struct BoundInputs {
  CMatrix theta0;
  double rho = 1.0;
  double delta = 1.0;
  long long n = 0;
  double theta = 0.0;
  // derived
  double lambda_min = 0.0;
  double cos_phi0 = 0.0;

  /// cos(phi0) = Tr(Omega0) / (sqrt(p) ||Omega0||_F) with Omega0 = Theta0^{-1}.
  static BoundInputs make(const CMatrix& theta0, double rho, double delta, long long n,
                          double theta) {
    require(rho > 0.0 && rho <= 1.0, ErrorKind::InvalidArgument, "rho must lie in (0, 1]");
    require(delta > 0.0 && delta <= 1.0, ErrorKind::InvalidArgument, "delta must lie in (0, 1]");
    require(theta >= 0.0 && std::isfinite(theta), ErrorKind::InvalidArgument, "theta must be >= 0");
    HermitianEigen eig(theta0);
    require_positive_definite(eig, "Theta0");
    BoundInputs b;
    b.theta0 = hermitian_part(theta0);
    b.rho = rho;
    b.delta = delta;
    b.n = n;
    b.theta = theta;
    b.lambda_min = eig.min();
    const CMatrix omega = eig.apply([](double v) { return 1.0 / v; });
    b.cos_phi0 = real_trace(omega) /
                 (std::sqrt(static_cast<double>(theta0.rows())) * omega.norm());
    return b;
  }

  Index p() const { return theta0.rows(); }
};

struct BoundResult {
  double error_bound = 0.0;
  double failure_prob = 1.0;      // clamped sum of both terms
  double deviation_term = 0.0;    // 2 exp(-theta^2 / (2 (1 + 1.7 theta / sqrt(rho n))))
  double concentration_term = 0.0;
};

inline BoundResult evaluate_bound(const BoundInputs& b) {
  const double p = static_cast<double>(b.p());
  const double n = static_cast<double>(b.n);
  require(b.n >= 1 && n > b.delta * p + 1e-9, ErrorKind::InsufficientSamples,
          "bound needs n > delta * p");
  require(b.theta >= 0.0, ErrorKind::InvalidArgument, "theta must be >= 0");
  const double c2 = b.cos_phi0 * b.cos_phi0;
  BoundResult r;
  r.error_bound = std::sqrt(b.rho) * (10.0 * b.theta / (b.lambda_min * c2)) * (p + 1.0) / std::sqrt(n);
  r.deviation_term =
      2.0 * std::exp(-b.theta * b.theta / (2.0 * (1.0 + 1.7 * b.theta / std::sqrt(b.rho * n))));
  const double inv = 1.0 + 1.0 / p;
  r.concentration_term = 2.0 * p * p * std::exp(-n * c2 / (80.0 * std::log(7.0 * p) * inv)) *
                         (1.0 + 8e3 * std::pow(inv, 4) / (n * std::pow(c2, 4)));
  r.failure_prob = std::clamp(r.deviation_term + r.concentration_term, 0.0, 1.0);
  return r;
}

/// Smallest theta (to 1e-9 relative) with failure_prob <= target, or nothing
/// when the theta-independent term alone already exceeds the target.
inline std::optional<double> theta_for_failure(BoundInputs b, double target) {
  require(target > 0.0 && target < 1.0, ErrorKind::InvalidArgument, "target must lie in (0, 1)");
  b.theta = 0.0;
  const BoundResult floor = evaluate_bound(b);
  if (floor.concentration_term >= target) return std::nullopt;
  auto fails = [&](double theta) {
    b.theta = theta;
    return evaluate_bound(b).deviation_term + floor.concentration_term > target;
  };
  double lo = 0.0, hi = 1.0;
  while (fails(hi)) {
    lo = hi;
    hi *= 2.0;
  }
  while (hi - lo > 1e-9 * hi) {
    const double mid = 0.5 * (lo + hi);
    (fails(mid) ? lo : hi) = mid;
  }
  return hi;
}

// ---------------------------------------------------------------------------
// Experiment harness
// ---------------------------------------------------------------------------

enum class EstimatorKind { tyler, styler, scm, scm_reynolds };

constexpr std::string_view to_string(EstimatorKind e) noexcept {
  switch (e) {
    case EstimatorKind::tyler: return "tyler";
    case EstimatorKind::styler: return "styler";
    case EstimatorKind::scm: return "scm";
    case EstimatorKind::scm_reynolds: return "scm_reynolds";
  }
  return "unknown";
}

inline EstimatorKind parse_estimator(std::string_view s) {
  for (auto e : {EstimatorKind::tyler, EstimatorKind::styler, EstimatorKind::scm,
                 EstimatorKind::scm_reynolds})
    if (to_string(e) == s) return e;
  throw Error(ErrorKind::InvalidArgument, "unknown estimator '" + std::string(s) + "'");
}

struct ExperimentSpec {
  GroupKind group;
  Index p = 8;
  std::vector<int> n_grid;
  int trials = 200;
  std::vector<EstimatorKind> estimators{EstimatorKind::tyler, EstimatorKind::styler};
  std::optional<Texture> texture;  // CAE draws when empty
  std::uint64_t master_seed = 1;
  double cond_target = 10.0;
  bool truth_per_trial = false;
  double tol = 1e-10;
  int max_iter = 1000;

  void validate() const {
    require(p >= 1, ErrorKind::InvalidArgument, "p must be positive");
    require(trials >= 1, ErrorKind::InvalidArgument, "trials must be at least 1");
    require(!n_grid.empty(), ErrorKind::InvalidArgument, "n-grid must not be empty");
    require(n_grid.front() >= 1, ErrorKind::InvalidArgument, "n-grid entries must be positive");
    require(std::is_sorted(n_grid.begin(), n_grid.end()) &&
                std::adjacent_find(n_grid.begin(), n_grid.end()) == n_grid.end(),
            ErrorKind::InvalidArgument, "n-grid must be strictly ascending");
    require(!estimators.empty(), ErrorKind::InvalidArgument, "estimator set must not be empty");
    require(cond_target >= 1.0, ErrorKind::InvalidArgument, "cond_target must be >= 1");
    require(tol > 0.0 && max_iter >= 1, ErrorKind::InvalidArgument, "bad estimator config");
    if (texture) texture->validate();
    detail::check_builtin_size(group, p);
  }
};

struct TrialRecord {
  EstimatorKind estimator = EstimatorKind::tyler;
  int n = 0;
  int trial = 0;
  std::uint64_t seed = 0;
  std::string status;  // converged | max_iter | diverged | ok | infeasible | error:<Kind>
  double mse = std::numeric_limits<double>::quiet_NaN();
  double frob_inv_err = std::numeric_limits<double>::quiet_NaN();
  int iterations = 0;

  bool succeeded() const { return status == "converged" || status == "ok"; }
};

struct SummaryRow {
  EstimatorKind estimator = EstimatorKind::tyler;
  int n = 0;
  double median_mse = std::numeric_limits<double>::quiet_NaN();
  double mean_mse = std::numeric_limits<double>::quiet_NaN();
  int fail_count = 0;
  std::optional<double> baseline;
};

struct ExperimentResult {
  ExperimentSpec spec;
  std::vector<TrialRecord> trials;  // ordered by (n, estimator, trial)
  std::vector<SummaryRow> summary;  // ordered by (n, estimator)
  bool complete = true;
  std::size_t completed_units = 0;
  std::size_t total_units = 0;

  const SummaryRow* find(EstimatorKind e, int n) const {
    for (const auto& row : summary)
      if (row.estimator == e && row.n == n) return &row;
    return nullptr;
  }
};

/// Optional user curve overlaid in the summary (e.g. an externally computed CRB).
using BaselineHook = std::function<std::optional<double>(EstimatorKind, int n)>;

struct RunOptions {
  int workers = 1;
  const std::atomic<bool>* cancel = nullptr;
  BaselineHook baseline;
};

namespace detail {

/// Stream index layout: 0 is the shared truth; 1 + unit for each (n, trial).
inline std::uint64_t unit_seed(std::uint64_t master, std::size_t unit) {
  return derive_seed(master, 1 + static_cast<std::uint64_t>(unit));
}

inline std::uint64_t truth_seed(std::uint64_t master, std::size_t unit, bool per_trial) {
  return per_trial ? derive_seed(master ^ 0xA5A5A5A5A5A5A5A5ull, unit) : derive_seed(master, 0);
}

inline bool gate(EstimatorKind e, const StructureInfo& s, int n) {
  switch (e) {
    case EstimatorKind::tyler: return n > s.dim();
    case EstimatorKind::styler: return s.admits(n);
    case EstimatorKind::scm: return n >= s.dim();
    case EstimatorKind::scm_reynolds: {
      // full rank iff n * p_i >= s_i for every component
      return std::all_of(s.components().begin(), s.components().end(),
                         [n](const Component& c) { return static_cast<long long>(n) * c.replication >= c.block_size; });
    }
  }
  return false;
}

inline void score(TrialRecord& rec, const CMatrix& estimate, const CMatrix& truth) {
  rec.mse = mse_error(estimate, truth);
  rec.frob_inv_err = frob_error_inverse(estimate, truth);
}

inline double median(std::vector<double> v) {
  if (v.empty()) return std::numeric_limits<double>::quiet_NaN();
  const std::size_t mid = v.size() / 2;
  std::nth_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(mid), v.end());
  const double upper = v[mid];
  if (v.size() % 2 == 1) return upper;
  const double lower = *std::max_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(mid));
  return 0.5 * (lower + upper);
}

}  // namespace detail

/// Runs every (n, trial) unit, each estimator on the same draw. Results depend
/// only on the spec, never on worker count or scheduling order.
inline ExperimentResult run_experiment(const ExperimentSpec& spec, const RunOptions& options = {}) {
  spec.validate();
  const GroupSpec group = builtin_group(spec.group, spec.p);
  const StructureInfo structure = builtin_structure(spec.group, spec.p);
  const std::size_t trials = static_cast<std::size_t>(spec.trials);
  const std::size_t units = spec.n_grid.size() * trials;
  const std::size_t per_unit = spec.estimators.size();

  std::optional<ShapeMatrix> shared_truth;
  if (!spec.truth_per_trial)
    shared_truth = random_invariant_shape(structure, spec.cond_target,
                                          detail::truth_seed(spec.master_seed, 0, false));

  std::vector<TrialRecord> records(units * per_unit);
  std::vector<char> done(units, 0);

  auto run_unit = [&](std::size_t unit) {
    const std::size_t n_index = unit / trials;
    const int trial = static_cast<int>(unit % trials);
    const int n = spec.n_grid[n_index];
    const std::uint64_t seed = detail::unit_seed(spec.master_seed, unit);
    const ShapeMatrix truth =
        shared_truth ? *shared_truth
                     : random_invariant_shape(structure, spec.cond_target,
                                              detail::truth_seed(spec.master_seed, unit, true));
    const SampleSet data = spec.texture ? sample_elliptical(truth, *spec.texture, n, seed)
                                        : sample_cae(truth, n, seed);
    EstimatorConfig cfg;
    cfg.tol = spec.tol;
    cfg.max_iter = spec.max_iter;

    for (std::size_t e = 0; e < per_unit; ++e) {
      TrialRecord& rec = records[unit * per_unit + e];
      rec.estimator = spec.estimators[e];
      rec.n = n;
      rec.trial = trial;
      rec.seed = seed;
      if (!detail::gate(rec.estimator, structure, n)) {
        rec.status = "infeasible";
        continue;
      }
      try {
        switch (rec.estimator) {
          case EstimatorKind::tyler:
          case EstimatorKind::styler: {
            const EstimatorReport report = rec.estimator == EstimatorKind::tyler
                                               ? tyler_estimate(data, cfg)
                                               : styler_estimate(data, group, structure, cfg);
            rec.status = std::string(to_string(report.status));
            rec.iterations = report.iterations;
            if (report.converged()) detail::score(rec, report.estimate, truth.matrix());
            break;
          }
          case EstimatorKind::scm:
            detail::score(rec, sample_covariance(data), truth.matrix());
            rec.status = "ok";
            break;
          case EstimatorKind::scm_reynolds:
            detail::score(rec, group_sample_covariance(data, group), truth.matrix());
            rec.status = "ok";
            break;
        }
      } catch (const Error& err) {
        rec.status = "error:" + std::string(to_string(err.kind()));
        rec.mse = rec.frob_inv_err = std::numeric_limits<double>::quiet_NaN();
      }
    }
    done[unit] = 1;
  };

  std::atomic<std::size_t> next{0};
  auto worker = [&]() {
    while (true) {
      if (options.cancel && options.cancel->load()) return;
      const std::size_t unit = next.fetch_add(1);
      if (unit >= units) return;
      run_unit(unit);
    }
  };
  const int workers = std::max(1, options.workers);
  if (workers == 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (int w = 0; w < workers; ++w) pool.emplace_back(worker);
  }

  ExperimentResult result;
  result.spec = spec;
  result.total_units = units;
  // Reorder to (n, estimator, trial) and drop unfinished units.
  for (std::size_t n_index = 0; n_index < spec.n_grid.size(); ++n_index) {
    for (std::size_t e = 0; e < per_unit; ++e) {
      SummaryRow row;
      row.estimator = spec.estimators[e];
      row.n = spec.n_grid[n_index];
      std::vector<double> mses;
      std::size_t finished = 0;
      for (std::size_t t = 0; t < trials; ++t) {
        const std::size_t unit = n_index * trials + t;
        if (!done[unit]) continue;
        ++finished;
        const TrialRecord& rec = records[unit * per_unit + e];
        result.trials.push_back(rec);
        if (rec.succeeded() && std::isfinite(rec.mse))
          mses.push_back(rec.mse);
        else
          ++row.fail_count;
      }
      if (finished == 0) continue;
      if (!mses.empty()) {
        row.median_mse = detail::median(mses);
        double sum = 0.0;
        for (double v : mses) sum += v;
        row.mean_mse = sum / static_cast<double>(mses.size());
      }
      if (options.baseline) row.baseline = options.baseline(row.estimator, row.n);
      result.summary.push_back(row);
    }
  }
  result.completed_units = static_cast<std::size_t>(std::count(done.begin(), done.end(), 1));
  result.complete = result.completed_units == units;
  return result;
}

/// Least-squares slope of log(median MSE) against log(n) for one estimator
/// over the given n values.
inline double log_log_slope(const ExperimentResult& r, EstimatorKind e, const std::vector<int>& ns) {
  std::vector<std::pair<double, double>> pts;
  for (int n : ns) {
    const SummaryRow* row = r.find(e, n);
    require(row != nullptr && std::isfinite(row->median_mse) && row->median_mse > 0.0,
            ErrorKind::InvalidArgument, "no finite median MSE at n=" + std::to_string(n));
    pts.emplace_back(std::log(static_cast<double>(n)), std::log(row->median_mse));
  }
  require(pts.size() >= 2, ErrorKind::InvalidArgument, "slope needs at least two points");
  double mx = 0, my = 0;
  for (auto [x, y] : pts) mx += x, my += y;
  mx /= static_cast<double>(pts.size());
  my /= static_cast<double>(pts.size());
  double sxy = 0, sxx = 0;
  for (auto [x, y] : pts) sxy += (x - mx) * (y - my), sxx += (x - mx) * (x - mx);
  return sxy / sxx;
}

// ---------------------------------------------------------------------------
// CSV output
// ---------------------------------------------------------------------------

inline std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

/// Lines of `comment` are written first, each prefixed with "# ".
inline void write_comment(std::ostream& out, const std::string& comment) {
  if (comment.empty()) return;
  std::size_t start = 0;
  while (start <= comment.size()) {
    const std::size_t end = comment.find('\n', start);
    out << "# " << comment.substr(start, end - start) << '\n';
    if (end == std::string::npos) break;
    start = end + 1;
  }
}

inline void write_trials_csv(std::ostream& out, const ExperimentResult& r, const std::string& comment = {}) {
  write_comment(out, comment);
  out << "group,p,n,estimator,trial,seed,status,mse,frob_inv_err,iterations\n";
  const std::string group = r.spec.group.to_string();
  for (const auto& t : r.trials) {
    out << group << ',' << r.spec.p << ',' << t.n << ',' << to_string(t.estimator) << ',' << t.trial
        << ',' << t.seed << ',' << t.status << ',' << format_double(t.mse) << ','
        << format_double(t.frob_inv_err) << ',' << t.iterations << '\n';
  }
}

inline void write_summary_csv(std::ostream& out, const ExperimentResult& r, const std::string& comment = {}) {
  write_comment(out, comment);
  const bool with_baseline = std::any_of(r.summary.begin(), r.summary.end(),
                                         [](const SummaryRow& s) { return s.baseline.has_value(); });
  out << "group,p,n,estimator,median_mse,mean_mse,fail_count" << (with_baseline ? ",baseline" : "")
      << '\n';
  const std::string group = r.spec.group.to_string();
  for (const auto& s : r.summary) {
    out << group << ',' << r.spec.p << ',' << s.n << ',' << to_string(s.estimator) << ','
        << format_double(s.median_mse) << ',' << format_double(s.mean_mse) << ',' << s.fail_count;
    if (with_baseline)
      out << ',' << format_double(s.baseline.value_or(std::numeric_limits<double>::quiet_NaN()));
    out << '\n';
  }
}

/// One row per n, one median-MSE column per estimator.
inline void write_wide_summary_csv(std::ostream& out, const ExperimentResult& r,
                                   const std::string& comment = {}) {
  write_comment(out, comment);
  out << 'n';
  for (auto e : r.spec.estimators) out << ',' << to_string(e);
  out << '\n';
  for (int n : r.spec.n_grid) {
    if (!r.find(r.spec.estimators.front(), n)) continue;
    out << n;
    for (auto e : r.spec.estimators) {
      const SummaryRow* row = r.find(e, n);
      out << ',' << format_double(row ? row->median_mse : std::numeric_limits<double>::quiet_NaN());
    }
    out << '\n';
  }
}

}  // namespace symtyler
