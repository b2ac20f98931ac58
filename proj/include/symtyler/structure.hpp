#pragma once

// Commutant structure of a finite unitary group: the Reynolds projection, the
// block-diagonal basis in which every invariant matrix reads
// diag(I_{p_1} (x) B_1, ..., I_{p_m} (x) B_m), and quantities derived from it.

#include <numeric>
#include <random>
#include <vector>

#include "symtyler/matgroup.hpp"

namespace symtyler {

/// One isotypic component: `replication` copies (p_i) of an s_i x s_i block.
struct Component {
  int replication = 1;
  int block_size = 1;

  friend bool operator==(const Component&, const Component&) = default;
  friend auto operator<=>(const Component&, const Component&) = default;
};

class StructureInfo {
 public:
  StructureInfo() = default;

  /// Validates sum p_i s_i = dim and unitarity of the basis; computes rho and delta.
  StructureInfo(Index dim, std::vector<Component> components, CMatrix basis)
      : dim_(dim), components_(std::move(components)), basis_(std::move(basis)) {
    require(dim_ >= 1 && !components_.empty(), ErrorKind::InvalidArgument,
            "structure needs a positive dimension and at least one component");
    Index total = 0;
    long long nonzeros = 0;
    double worst_ratio = 0.0;
    for (const auto& c : components_) {
      require(c.replication >= 1 && c.block_size >= 1, ErrorKind::InvalidArgument,
              "component sizes must be positive");
      total += static_cast<Index>(c.replication) * c.block_size;
      nonzeros += static_cast<long long>(c.replication) * c.block_size * c.block_size;
      worst_ratio = std::max(worst_ratio, static_cast<double>(c.block_size) / c.replication);
    }
    require(total == dim_, ErrorKind::InvalidArgument,
            "sum of p_i*s_i is " + std::to_string(total) + ", expected " + std::to_string(dim_));
    require(basis_.rows() == dim_ && basis_.cols() == dim_, ErrorKind::DimMismatch,
            "basis must be dim x dim");
    const double defect = (basis_.adjoint() * basis_ - CMatrix::Identity(dim_, dim_)).norm();
    require(defect <= tolerance::unitary * std::max<double>(1.0, static_cast<double>(dim_)),
            ErrorKind::NotUnitary, "structure basis is not unitary (defect " +
                                       std::to_string(defect) + ")");
    rho_ = static_cast<double>(nonzeros) / static_cast<double>(dim_ * dim_);
    delta_ = worst_ratio / static_cast<double>(dim_);

    owner_.resize(dim_);
    Index offset = 0;
    for (std::size_t i = 0; i < components_.size(); ++i) {
      const auto& c = components_[i];
      for (int a = 0; a < c.replication; ++a)
        for (int b = 0; b < c.block_size; ++b) owner_[offset++] = {static_cast<int>(i), a};
    }
  }

  Index dim() const { return dim_; }
  std::size_t m() const { return components_.size(); }
  const std::vector<Component>& components() const { return components_; }
  const CMatrix& basis() const { return basis_; }
  double rho() const { return rho_; }
  double delta() const { return delta_; }

  /// First basis column of component i.
  Index component_offset(std::size_t i) const {
    Index offset = 0;
    for (std::size_t k = 0; k < i; ++k)
      offset += static_cast<Index>(components_[k].replication) * components_[k].block_size;
    return offset;
  }

  /// True where an invariant matrix may be nonzero in basis coordinates.
  bool in_mask(Index i, Index j) const { return owner_[i] == owner_[j]; }

  Eigen::Matrix<bool, Eigen::Dynamic, Eigen::Dynamic> mask() const {
    Eigen::Matrix<bool, Eigen::Dynamic, Eigen::Dynamic> out(dim_, dim_);
    for (Index j = 0; j < dim_; ++j)
      for (Index i = 0; i < dim_; ++i) out(i, j) = in_mask(i, j);
    return out;
  }

  /// Components sorted, for comparisons that ignore ordering.
  std::vector<Component> component_multiset() const {
    auto sorted = components_;
    std::sort(sorted.begin(), sorted.end());
    return sorted;
  }

  /// Existence threshold: n > delta * p  <=>  n * p_i > s_i for every component.
  bool admits(long long n) const {
    return std::all_of(components_.begin(), components_.end(), [n](const Component& c) {
      return n * c.replication > c.block_size;
    });
  }

 private:
  struct Slot {
    int component = -1;
    int replica = -1;
    friend bool operator==(const Slot&, const Slot&) = default;
  };

  Index dim_ = 0;
  std::vector<Component> components_;
  CMatrix basis_;
  double rho_ = 1.0;
  double delta_ = 1.0;
  std::vector<Slot> owner_;
};

/// (1/|G|) sum_K K M K^H, the orthogonal projection onto the commutant.
inline CMatrix reynolds_project(const CMatrix& m, const GroupSpec& g) {
  require_square(m, "matrix");
  require(m.rows() == g.dim(), ErrorKind::DimMismatch,
          "matrix dimension " + std::to_string(m.rows()) + " vs group dimension " +
              std::to_string(g.dim()));
  CMatrix acc = CMatrix::Zero(m.rows(), m.cols());
  for (const auto& k : g.elements()) acc += k.conjugate(m);
  return hermitian_part(acc / static_cast<double>(g.order()));
}

/// Known commutant bases and parameters of the built-in families.
inline StructureInfo builtin_structure(const GroupKind& kind, Index p) {
  using F = GroupKind::Family;
  detail::check_builtin_size(kind, p);
  const int pi = static_cast<int>(p);
  switch (kind.family) {
    case F::trivial: return StructureInfo(p, {{1, pi}}, CMatrix::Identity(p, p));
    case F::circulant:
      return StructureInfo(p, std::vector<Component>(p, Component{1, 1}), fft_matrix(p));
    case F::block_circulant: {
      const Index d = kind.param;
      return StructureInfo(p, std::vector<Component>(p / d, Component{1, static_cast<int>(d)}),
                           kron(fft_matrix(p / d), CMatrix::Identity(d, d)));
    }
    case F::permutation: {
      if (p == 1) return StructureInfo(p, {{1, 1}}, CMatrix::Identity(1, 1));
      return StructureInfo(p, {{1, 1}, {pi - 1, 1}}, fft_matrix(p));
    }
    case F::perhermitian: {
      // Symmetric vectors (e_i + e_{p-1-i})/sqrt(2) [plus the middle e_i for
      // odd p], then the antisymmetric ones.
      const Index half = p / 2;
      const bool odd = p % 2 == 1;
      CMatrix q = CMatrix::Zero(p, p);
      const double r = std::sqrt(0.5);
      for (Index i = 0; i < half; ++i) {
        q(i, i) = r;
        q(p - 1 - i, i) = r;
      }
      Index col = half;
      if (odd) q(half, col++) = 1.0;
      for (Index i = 0; i < half; ++i, ++col) {
        q(i, col) = r;
        q(p - 1 - i, col) = -r;
      }
      const int sym = static_cast<int>(half + (odd ? 1 : 0));
      return StructureInfo(p, {{1, sym}, {1, static_cast<int>(half)}}, q);
    }
    case F::proper_quaternion: {
      CMatrix h(2, 2);
      const double r = std::sqrt(0.5);
      h << cplx(r, 0), cplx(-r, 0), cplx(0, r), cplx(0, r);
      const int half = pi / 2;
      return StructureInfo(p, {{1, half}, {1, half}}, kron(h, CMatrix::Identity(p / 2, p / 2)));
    }
    case F::equicorrelation: {
      const Index k = kind.param, rest = p - k;
      CMatrix q = CMatrix::Zero(p, p);
      q.topLeftCorner(k, k) = fft_matrix(k);
      if (rest > 0) q.bottomRightCorner(rest, rest).setIdentity();
      std::vector<Component> comps{{1, 1}};
      if (k > 1) comps.push_back({static_cast<int>(k - 1), 1});
      if (rest > 0) comps.push_back({static_cast<int>(rest), 1});
      return StructureInfo(p, std::move(comps), q);
    }
  }
  throw Error(ErrorKind::InvalidArgument, "unknown group family");
}

namespace detail {

inline CMatrix random_hermitian(Index p, std::mt19937_64& rng) {
  std::normal_distribution<double> normal;
  CMatrix a(p, p);
  for (Index j = 0; j < p; ++j)
    for (Index i = 0; i < p; ++i) a(i, j) = cplx(normal(rng), normal(rng));
  return hermitian_part(a);
}

inline CMatrix orthonormalize(const CMatrix& cols) {
  Eigen::HouseholderQR<CMatrix> qr(cols);
  CMatrix q = qr.householderQ() * CMatrix::Identity(cols.rows(), cols.cols());
  return q;
}

}  // namespace detail

/// Numerically recovers the commutant basis of G.
///
/// Two seeded random Hermitian matrices are projected onto the commutant (R1,
/// R2). Eigenspaces of R1 each have dimension p_i; R2 couples only eigenspaces
/// that belong to the same isotypic component, so the connected components of
/// the coupling graph are the isotypic components and s_i is the number of
/// eigenspaces in each. Inside a component, basis vectors are carried from the
/// first eigenspace to the others through R2 so that both projections read
/// I_{p_i} (x) B_i in the returned basis.
///
/// `tol` is relative to the unit-Frobenius-normalized projections. Gaps in
/// (tol, 100*tol] make the clustering ambiguous and raise DegenerateSpectrum.
inline StructureInfo discover_structure(const GroupSpec& g, std::uint64_t seed,
                                        double tol = 1e-9) {
  require(tol > 0.0, ErrorKind::InvalidArgument, "tol must be positive");
  const Index p = g.dim();
  std::mt19937_64 rng(seed);
  CMatrix r1 = reynolds_project(detail::random_hermitian(p, rng), g);
  CMatrix r2 = reynolds_project(detail::random_hermitian(p, rng), g);
  r1 /= r1.norm();
  r2 /= r2.norm();

  HermitianEigen eig(r1);
  struct Space {
    Index first;
    Index size;
  };
  std::vector<Space> spaces;
  for (Index i = 0; i < p; ++i) {
    if (i > 0) {
      const double gap = eig.values(i) - eig.values(i - 1);
      require(gap <= tol || gap > 100.0 * tol, ErrorKind::DegenerateSpectrum,
              "eigenvalue gap " + std::to_string(gap) + " is ambiguous at tol " +
                  std::to_string(tol) + "; retry with another seed");
      if (gap <= tol) {
        ++spaces.back().size;
        continue;
      }
    }
    spaces.push_back({i, 1});
  }

  const std::size_t count = spaces.size();
  std::vector<CMatrix> bases(count), projectors(count);
  for (std::size_t s = 0; s < count; ++s) {
    bases[s] = eig.vectors.middleCols(spaces[s].first, spaces[s].size);
    projectors[s] = bases[s] * bases[s].adjoint();
  }
  std::vector<std::vector<double>> coupling(count, std::vector<double>(count, 0.0));
  for (std::size_t a = 0; a < count; ++a)
    for (std::size_t b = a + 1; b < count; ++b)
      coupling[a][b] = coupling[b][a] = (bases[a].adjoint() * r2 * bases[b]).norm();

  std::vector<int> label(count, -1);
  std::vector<std::vector<std::size_t>> members;
  std::vector<std::vector<std::size_t>> parent_of;
  for (std::size_t root = 0; root < count; ++root) {
    if (label[root] >= 0) continue;
    // Maximum spanning tree (Prim) over links above tol, rooted at the
    // lowest-eigenvalue eigenspace of the component.
    const int id = static_cast<int>(members.size());
    members.push_back({root});
    parent_of.push_back({root});
    label[root] = id;
    while (true) {
      double best = tol;
      std::size_t best_node = count, best_parent = count;
      for (std::size_t u : members.back())
        for (std::size_t v = 0; v < count; ++v)
          if (label[v] < 0 && coupling[u][v] > best) {
            best = coupling[u][v];
            best_node = v;
            best_parent = u;
          }
      if (best_node == count) break;
      label[best_node] = id;
      members.back().push_back(best_node);
      parent_of.back().push_back(best_parent);
    }
  }

  std::vector<Component> components;
  CMatrix basis(p, p);
  Index column = 0;
  for (std::size_t c = 0; c < members.size(); ++c) {
    const auto& nodes = members[c];
    const Index replication = spaces[nodes.front()].size;
    for (std::size_t node : nodes)
      require(spaces[node].size == replication, ErrorKind::InconsistentMultiplicity,
              "eigenspaces of one component have dimensions " + std::to_string(replication) +
                  " and " + std::to_string(spaces[node].size));

    // Transport an orthonormal basis of the root eigenspace along the tree.
    // Order of members is a valid traversal order (parents come first).
    std::vector<CMatrix> carried(count);
    carried[nodes.front()] = detail::orthonormalize(bases[nodes.front()]);
    for (std::size_t k = 1; k < nodes.size(); ++k) {
      const std::size_t node = nodes[k];
      CMatrix moved = projectors[node] * r2 * carried[parent_of[c][k]];
      for (Index a = 0; a < moved.cols(); ++a) moved.col(a).normalize();
      carried[node] = std::move(moved);
    }

    // Sort the component's eigenspaces by eigenvalue for the block layout.
    std::vector<std::size_t> order = nodes;
    std::sort(order.begin(), order.end());
    const Index block = static_cast<Index>(order.size());
    for (Index a = 0; a < replication; ++a)
      for (Index b = 0; b < block; ++b) basis.col(column++) = carried[order[b]].col(a);
    components.push_back({static_cast<int>(replication), static_cast<int>(block)});
  }

  // Re-orthonormalize away round-off while keeping column directions.
  {
    Eigen::HouseholderQR<CMatrix> qr(basis);
    CMatrix q = qr.householderQ() * CMatrix::Identity(p, p);
    const CMatrix r = q.adjoint() * basis;
    for (Index j = 0; j < p; ++j) {
      const cplx d = r(j, j);
      q.col(j) *= d / std::abs(d);
    }
    const double drift = (q - basis).norm();
    require(drift < 1e-6, ErrorKind::DegenerateSpectrum,
            "transported basis is far from orthonormal (" + std::to_string(drift) +
                "); retry with another seed");
    basis = q;
  }

  StructureInfo info(p, std::move(components), basis);
  for (const CMatrix* r : {&r1, &r2}) {
    const CMatrix local = basis.adjoint() * (*r) * basis;
    double off = 0.0;
    for (Index j = 0; j < p; ++j)
      for (Index i = 0; i < p; ++i)
        if (!info.in_mask(i, j)) off += std::norm(local(i, j));
    require(std::sqrt(off) <= std::max(tolerance::structure, 1e3 * tol),
            ErrorKind::DegenerateSpectrum,
            "recovered basis leaves off-block mass " + std::to_string(std::sqrt(off)));
  }
  return info;
}

/// Retries discover_structure with derived seeds on DegenerateSpectrum.
inline StructureInfo discover_structure_retry(const GroupSpec& g, std::uint64_t seed,
                                              double tol = 1e-9, int attempts = 8) {
  for (int k = 0;; ++k) {
    try {
      return discover_structure(g, seed + 0x9E3779B97F4A7C15ull * static_cast<std::uint64_t>(k), tol);
    } catch (const Error& e) {
      if (e.kind() != ErrorKind::DegenerateSpectrum || k + 1 >= attempts) throw;
    }
  }
}

/// Q (mask .* (Q^H M Q)) Q^H: drops everything outside the block pattern.
inline CMatrix mask_project(const CMatrix& m, const StructureInfo& s) {
  require_square(m, "matrix");
  require(m.rows() == s.dim(), ErrorKind::DimMismatch,
          "matrix dimension " + std::to_string(m.rows()) + " vs structure dimension " +
              std::to_string(s.dim()));
  CMatrix local = s.basis().adjoint() * m * s.basis();
  for (Index j = 0; j < s.dim(); ++j)
    for (Index i = 0; i < s.dim(); ++i)
      if (!s.in_mask(i, j)) local(i, j) = 0.0;
  return hermitian_part(s.basis() * local * s.basis().adjoint());
}

/// Sum of squared magnitudes outside the mask, square-rooted, in basis coordinates.
inline double off_mask_norm(const CMatrix& m, const StructureInfo& s) {
  const CMatrix local = s.basis().adjoint() * m * s.basis();
  double off = 0.0;
  for (Index j = 0; j < s.dim(); ++j)
    for (Index i = 0; i < s.dim(); ++i)
      if (!s.in_mask(i, j)) off += std::norm(local(i, j));
  return std::sqrt(off);
}

/// Largest deviation of the diagonal blocks from the I_{p_i} (x) B_i form
/// (all replicas equal to the first), in basis coordinates.
inline double replication_defect(const CMatrix& m, const StructureInfo& s) {
  const CMatrix local = s.basis().adjoint() * m * s.basis();
  double worst = 0.0;
  for (std::size_t i = 0; i < s.m(); ++i) {
    const auto& c = s.components()[i];
    const Index base = s.component_offset(i);
    const CMatrix first = local.block(base, base, c.block_size, c.block_size);
    for (int a = 1; a < c.replication; ++a) {
      const Index off = base + static_cast<Index>(a) * c.block_size;
      worst = std::max(worst, (local.block(off, off, c.block_size, c.block_size) - first).norm());
    }
  }
  return worst;
}

/// Rank of each diagonal component block and of the whole matrix.
struct RankReport {
  std::vector<int> per_component;
  int total = 0;
};

inline int numeric_rank(const CMatrix& m, double relative_tol, double reference) {
  if (m.size() == 0 || reference <= 0.0) return 0;
  Eigen::JacobiSVD<CMatrix> svd(m);
  int rank = 0;
  for (Index i = 0; i < svd.singularValues().size(); ++i)
    if (svd.singularValues()(i) > relative_tol * reference) ++rank;
  return rank;
}

inline RankReport matrix_rank_by_component(const CMatrix& m, const StructureInfo& s,
                                           double relative_tol = tolerance::rank) {
  require(m.rows() == s.dim() && m.cols() == s.dim(), ErrorKind::DimMismatch,
          "matrix and structure dimensions differ");
  RankReport out;
  Eigen::JacobiSVD<CMatrix> svd(m);
  const double sigma_max = svd.singularValues().size() ? svd.singularValues()(0) : 0.0;
  out.total = numeric_rank(m, relative_tol, sigma_max);
  const CMatrix local = s.basis().adjoint() * m * s.basis();
  for (std::size_t i = 0; i < s.m(); ++i) {
    const auto& c = s.components()[i];
    const Index size = static_cast<Index>(c.replication) * c.block_size;
    const Index base = s.component_offset(i);
    out.per_component.push_back(
        numeric_rank(local.block(base, base, size, size), relative_tol, sigma_max));
  }
  return out;
}

/// Almost-sure rank of the Reynolds-averaged sample covariance of n generic
/// samples: p_i * min(s_i, n * p_i) per component.
inline RankReport expected_orbit_rank(const StructureInfo& s, long long n) {
  RankReport out;
  for (const auto& c : s.components()) {
    const long long r = static_cast<long long>(c.replication) *
                        std::min<long long>(c.block_size, n * c.replication);
    out.per_component.push_back(static_cast<int>(r));
    out.total += static_cast<int>(r);
  }
  return out;
}

/// Numeric rank of the Reynolds-averaged sample covariance of the columns of
/// `samples`, per component of `s` and in total.
inline RankReport orbit_span_rank(const CMatrix& samples, const GroupSpec& g,
                                  const StructureInfo& s) {
  require(samples.cols() >= 1, ErrorKind::InvalidArgument, "need at least one sample");
  require(samples.rows() == g.dim() && g.dim() == s.dim(), ErrorKind::DimMismatch,
          "sample, group and structure dimensions differ");
  const CMatrix scm = samples * samples.adjoint() / static_cast<double>(samples.cols());
  return matrix_rank_by_component(reynolds_project(scm, g), s);
}

/// Geodesic M0^{1/2} (M0^{-1/2} M1 M0^{-1/2})^t M0^{1/2} on the
/// positive-definite cone.
inline CMatrix geodesic(const CMatrix& m0, const CMatrix& m1, double t) {
  require_square(m0, "M0");
  require_same_dim(m0, m1, "geodesic endpoints");
  HermitianEigen e0(m0);
  require_positive_definite(e0, "M0");
  HermitianEigen e1(m1);
  require_positive_definite(e1, "M1");
  const CMatrix root = e0.apply([](double v) { return std::sqrt(std::max(v, tolerance::eigen_clamp)); });
  const CMatrix inv_root =
      e0.apply([](double v) { return 1.0 / std::sqrt(std::max(v, tolerance::eigen_clamp)); });
  const CMatrix inner = pd_power(inv_root * m1 * inv_root, t);
  return hermitian_part(root * inner * root);
}

}  // namespace symtyler
