#pragma once

// Shape matrices, sample sets and seeded samplers for complex angular
// elliptical (CAE) and compound-Gaussian data.

#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <variant>

#include "symtyler/structure.hpp"

namespace symtyler {

// ---------------------------------------------------------------------------
// Random streams
// ---------------------------------------------------------------------------

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ull;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
  return x ^ (x >> 31);
}

/// Seed of the independent stream `index` under `master`. Streams depend only
/// on (master, index), so work can be scheduled in any order.
inline std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index) {
  return splitmix64(splitmix64(master) ^ splitmix64(index + 0x632BE59BD9B4E019ull));
}

class RandomStream {
 public:
  explicit RandomStream(std::uint64_t seed) : engine_(splitmix64(seed)) {}

  double normal() { return normal_(engine_); }

  /// Circular complex normal with E|z|^2 = 1.
  cplx complex_normal() {
    const double re = normal_(engine_);
    const double im = normal_(engine_);
    return cplx(re, im) * std::sqrt(0.5);
  }

  double gamma(double shape, double scale) {
    return std::gamma_distribution<double>(shape, scale)(engine_);
  }

  std::mt19937_64& engine() { return engine_; }

 private:
  std::mt19937_64 engine_;
  std::normal_distribution<double> normal_;
};

// ---------------------------------------------------------------------------
// Shape matrices
// ---------------------------------------------------------------------------

enum class ScaleConvention { unit_trace, inverse_trace_matched, raw };

/// Hermitian positive-definite matrix with a declared scale convention.
class ShapeMatrix {
 public:
  ShapeMatrix() = default;

  /// Validates Hermitian (1e-12) and positive definite; stores the exact
  /// Hermitian part.
  explicit ShapeMatrix(const CMatrix& m, ScaleConvention convention = ScaleConvention::raw,
                       double reference_inverse_trace = 0.0)
      : convention_(convention), reference_inverse_trace_(reference_inverse_trace) {
    require_square(m, "shape matrix");
    require(m.rows() >= 1, ErrorKind::InvalidArgument, "shape matrix must be nonempty");
    require(is_hermitian(m, 1e-12 * std::max(1.0, m.norm())), ErrorKind::InvalidArgument,
            "shape matrix is not Hermitian");
    entries_ = hermitian_part(m);
    HermitianEigen eig(entries_);
    require_positive_definite(eig, "shape matrix");
    if (convention_ == ScaleConvention::unit_trace)
      require(std::abs(real_trace(entries_) - 1.0) <= 1e-10, ErrorKind::InvalidArgument,
              "unit_trace shape matrix has trace " + std::to_string(real_trace(entries_)));
  }

  static ShapeMatrix normalized(const CMatrix& m) {
    return ShapeMatrix(unit_trace(m), ScaleConvention::unit_trace);
  }

  /// Rescaled so that Tr(result^{-1}) = Tr(reference^{-1}).
  static ShapeMatrix inverse_trace_matched(const CMatrix& m, const CMatrix& reference) {
    const double target = real_trace(pd_inverse(reference));
    const double current = real_trace(pd_inverse(m));
    return ShapeMatrix(m * (current / target), ScaleConvention::inverse_trace_matched, target);
  }

  Index dim() const { return entries_.rows(); }
  const CMatrix& matrix() const { return entries_; }
  ScaleConvention convention() const { return convention_; }
  double reference_inverse_trace() const { return reference_inverse_trace_; }

 private:
  CMatrix entries_;
  ScaleConvention convention_ = ScaleConvention::raw;
  double reference_inverse_trace_ = 0.0;
};

// ---------------------------------------------------------------------------
// Sample sets
// ---------------------------------------------------------------------------

struct Provenance {
  std::string distribution;  // "cae", "gaussian", "student_t", "k_dist", "external", ...
  std::uint64_t seed = 0;
  std::optional<double> texture_param;
  std::optional<CMatrix> truth;

  friend bool operator==(const Provenance& a, const Provenance& b) {
    const bool truths = a.truth.has_value() == b.truth.has_value() &&
                        (!a.truth || (a.truth->rows() == b.truth->rows() &&
                                      a.truth->cols() == b.truth->cols() && *a.truth == *b.truth));
    return a.distribution == b.distribution && a.seed == b.seed &&
           a.texture_param == b.texture_param && truths;
  }
};

/// n complex p-vectors stored as the columns of a p x n matrix.
class SampleSet {
 public:
  SampleSet() = default;

  SampleSet(CMatrix vectors, Provenance provenance)
      : vectors_(std::move(vectors)), provenance_(std::move(provenance)) {
    require(vectors_.rows() >= 1, ErrorKind::InvalidArgument, "sample dimension must be positive");
    if (provenance_.distribution == "cae") {
      for (Index i = 0; i < vectors_.cols(); ++i)
        require(std::abs(vectors_.col(i).norm() - 1.0) <= 1e-12, ErrorKind::NotUnitNorm,
                "CAE sample " + std::to_string(i) + " is not unit norm");
    }
  }

  Index dim() const { return vectors_.rows(); }
  Index size() const { return vectors_.cols(); }
  const CMatrix& vectors() const { return vectors_; }
  const Provenance& provenance() const { return provenance_; }

  /// Same data with each vector scaled to unit norm (tagged "cae").
  SampleSet normalized() const {
    CMatrix out = vectors_;
    for (Index i = 0; i < out.cols(); ++i) {
      const double nrm = out.col(i).norm();
      require(nrm > 0.0, ErrorKind::ZeroVector, "sample " + std::to_string(i) + " is zero");
      out.col(i) /= nrm;
    }
    Provenance prov = provenance_;
    prov.distribution = "cae";
    return SampleSet(std::move(out), std::move(prov));
  }

  friend bool operator==(const SampleSet& a, const SampleSet& b) {
    return a.vectors_.rows() == b.vectors_.rows() && a.vectors_.cols() == b.vectors_.cols() &&
           a.vectors_ == b.vectors_ && a.provenance_ == b.provenance_;
  }

 private:
  CMatrix vectors_;
  Provenance provenance_;
};

inline RankReport orbit_span_rank(const SampleSet& x, const GroupSpec& g, const StructureInfo& s) {
  return orbit_span_rank(x.vectors(), g, s);
}

// ---------------------------------------------------------------------------
// Samplers
// ---------------------------------------------------------------------------

namespace detail {

/// Theta^{1/2} via Hermitian eigendecomposition.
inline CMatrix shape_root(const ShapeMatrix& theta) { return pd_power(theta.matrix(), 0.5); }

inline CVector complex_gaussian(const CMatrix& root, RandomStream& rng) {
  CVector w(root.cols());
  for (Index j = 0; j < w.size(); ++j) w(j) = rng.complex_normal();
  return root * w;
}

}  // namespace detail

/// x = z / ||z|| with z circular complex normal, E[z z^H] = Theta0.
inline SampleSet sample_cae(const ShapeMatrix& theta, Index n, std::uint64_t seed) {
  require(n >= 1, ErrorKind::InvalidArgument, "n must be positive");
  const CMatrix root = detail::shape_root(theta);
  RandomStream rng(seed);
  CMatrix out(theta.dim(), n);
  for (Index i = 0; i < n; ++i) {
    CVector z = detail::complex_gaussian(root, rng);
    const double nrm = z.norm();
    require(nrm > 0.0, ErrorKind::NumericalBreakdown, "zero Gaussian draw");
    out.col(i) = z / nrm;
  }
  return SampleSet(std::move(out), Provenance{"cae", seed, std::nullopt, theta.matrix()});
}

/// Texture law of a compound-Gaussian vector z = sqrt(tau) * g.
struct Texture {
  enum class Kind { gaussian, student_t, k_dist };
  Kind kind = Kind::gaussian;
  double param = 0.0;  // nu for student_t, shape for k_dist

  static Texture gaussian() { return {Kind::gaussian, 0.0}; }
  static Texture student_t(double nu) { return {Kind::student_t, nu}; }
  static Texture k_dist(double shape) { return {Kind::k_dist, shape}; }

  std::string name() const {
    switch (kind) {
      case Kind::gaussian: return "gaussian";
      case Kind::student_t: return "student_t";
      case Kind::k_dist: return "k_dist";
    }
    return "unknown";
  }

  void validate() const {
    if (kind != Kind::gaussian)
      require(param > 0.0 && std::isfinite(param), ErrorKind::InvalidArgument,
              name() + " texture parameter must be positive, got " + std::to_string(param));
  }

  /// gaussian: tau = 1; student_t(nu): tau = nu / chi2_nu; k_dist(a): tau ~ Gamma(a, 1/a).
  double draw(RandomStream& rng) const {
    switch (kind) {
      case Kind::gaussian: return 1.0;
      case Kind::student_t: return param / rng.gamma(0.5 * param, 2.0);
      case Kind::k_dist: return rng.gamma(param, 1.0 / param);
    }
    return 1.0;
  }
};

inline SampleSet sample_elliptical(const ShapeMatrix& theta, const Texture& texture, Index n,
                                   std::uint64_t seed) {
  require(n >= 1, ErrorKind::InvalidArgument, "n must be positive");
  texture.validate();
  const CMatrix root = detail::shape_root(theta);
  RandomStream rng(seed);
  CMatrix out(theta.dim(), n);
  for (Index i = 0; i < n; ++i) {
    const double tau = texture.draw(rng);
    out.col(i) = std::sqrt(tau) * detail::complex_gaussian(root, rng);
  }
  std::optional<double> param;
  if (texture.kind != Texture::Kind::gaussian) param = texture.param;
  return SampleSet(std::move(out), Provenance{texture.name(), seed, param, theta.matrix()});
}

/// log of (p-1)!/pi^p / (|Theta0| (x^H Theta0^{-1} x)^p). The normalizing
/// constant makes this a probability density against half the surface
/// measure of the unit sphere in C^p, whose total mass is pi^p/(p-1)!.
inline double cae_log_density(const CVector& x, const ShapeMatrix& theta) {
  require(x.size() == theta.dim(), ErrorKind::DimMismatch, "vector and shape dimensions differ");
  require(std::abs(x.norm() - 1.0) <= 1e-9, ErrorKind::NotUnitNorm,
          "x has norm " + std::to_string(x.norm()));
  const double p = static_cast<double>(theta.dim());
  Eigen::LLT<CMatrix> llt(theta.matrix());
  require(llt.info() == Eigen::Success, ErrorKind::NotPositiveDefinite,
          "shape matrix is not positive definite");
  const double quad = llt.matrixL().solve(x).squaredNorm();
  return std::lgamma(p) - p * std::log(std::numbers::pi) - pd_log_det(theta.matrix()) -
         p * std::log(quad);
}

/// Total mass of the reference measure under which cae_log_density integrates to one.
inline double cae_reference_mass(Index p) {
  return std::exp(static_cast<double>(p) * std::log(std::numbers::pi) -
                  std::lgamma(static_cast<double>(p)));
}

/// Random unit-trace G-invariant shape matrix: random I_{p_i} (x) B_i blocks in
/// the structure basis, spectrum mapped affinely onto [1, cond_target].
inline ShapeMatrix random_invariant_shape(const StructureInfo& s, double cond_target,
                                          std::uint64_t seed) {
  require(cond_target >= 1.0 && std::isfinite(cond_target), ErrorKind::InvalidArgument,
          "cond_target must be >= 1");
  const Index p = s.dim();
  std::mt19937_64 rng(splitmix64(seed));
  std::vector<HermitianEigen> blocks;
  double lo = std::numeric_limits<double>::infinity();
  double hi = -lo;
  for (const auto& c : s.components()) {
    blocks.emplace_back(detail::random_hermitian(c.block_size, rng));
    lo = std::min(lo, blocks.back().min());
    hi = std::max(hi, blocks.back().max());
  }
  const double span = hi - lo;
  CMatrix local = CMatrix::Zero(p, p);
  for (std::size_t i = 0; i < s.m(); ++i) {
    const auto& c = s.components()[i];
    const CMatrix block = blocks[i].apply([&](double v) {
      return span > 0.0 ? 1.0 + (cond_target - 1.0) * (v - lo) / span : 1.0;
    });
    const Index base = s.component_offset(i);
    for (int a = 0; a < c.replication; ++a) {
      const Index off = base + static_cast<Index>(a) * c.block_size;
      local.block(off, off, c.block_size, c.block_size) = block;
    }
  }
  return ShapeMatrix::normalized(s.basis() * local * s.basis().adjoint());
}

}  // namespace symtyler
