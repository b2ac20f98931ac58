#pragma once

// Finite unitary matrix groups stored as explicit element lists.
//
// Elements are identified up to a global unit phase: K and c*K (|c| = 1) act
// identically by conjugation, and conjugation is the only action the
// estimators use. This makes e.g. the quaternion generator Y (Y*Y = -I) a
// group of order two.

#include <algorithm>
#include <charconv>
#include <cstdint>
#include <map>
#include <optional>
#include <random>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "symtyler/linalg.hpp"

namespace symtyler {

inline constexpr std::size_t kDefaultMaxOrder = 5040;

class UnitaryMatrix {
 public:
  explicit UnitaryMatrix(CMatrix m, double tol = tolerance::unitary) : m_(std::move(m)) {
    require(m_.rows() == m_.cols() && m_.rows() > 0, ErrorKind::DimMismatch,
            "unitary matrix must be square and nonempty");
    const double defect =
        (m_.adjoint() * m_ - CMatrix::Identity(m_.rows(), m_.cols())).norm();
    require(defect <= tol, ErrorKind::NotUnitary,
            "||K^H K - I||_F = " + std::to_string(defect) + " exceeds " + std::to_string(tol));
    detect_monomial();
  }

  static UnitaryMatrix identity(Index p) { return UnitaryMatrix(CMatrix::Identity(p, p)); }

  Index dim() const { return m_.rows(); }
  const CMatrix& matrix() const { return m_; }
  bool is_monomial() const { return monomial_; }

  /// K * v for a vector or a block of column vectors.
  CMatrix apply(const CMatrix& cols) const {
    if (!monomial_) return m_ * cols;
    CMatrix out(cols.rows(), cols.cols());
    for (Index i = 0; i < dim(); ++i) out.row(i) = phase_[i] * cols.row(perm_[i]);
    return out;
  }

  /// K M K^H
  CMatrix conjugate(const CMatrix& m) const {
    if (!monomial_) return m_ * m * m_.adjoint();
    const Index p = dim();
    CMatrix out(p, p);
    for (Index j = 0; j < p; ++j)
      for (Index i = 0; i < p; ++i)
        out(i, j) = phase_[i] * m(perm_[i], perm_[j]) * std::conj(phase_[j]);
    return out;
  }

  /// K^H M K
  CMatrix conjugate_adjoint(const CMatrix& m) const {
    if (!monomial_) return m_.adjoint() * m * m_;
    const Index p = dim();
    CMatrix out(p, p);
    for (Index b = 0; b < p; ++b)
      for (Index a = 0; a < p; ++a) {
        const Index ia = inverse_[a], ib = inverse_[b];
        out(a, b) = std::conj(phase_[ia]) * m(ia, ib) * phase_[ib];
      }
    return out;
  }

  friend UnitaryMatrix operator*(const UnitaryMatrix& a, const UnitaryMatrix& b) {
    return UnitaryMatrix(a.m_ * b.m_, 10.0 * tolerance::unitary);
  }

 private:
  void detect_monomial() {
    const Index p = dim();
    perm_.assign(p, 0);
    inverse_.assign(p, -1);
    phase_.assign(p, cplx{});
    monomial_ = true;
    for (Index i = 0; i < p && monomial_; ++i) {
      Index hit = -1;
      for (Index j = 0; j < p; ++j) {
        if (std::abs(m_(i, j)) > 1e-12) {
          if (hit >= 0) {
            monomial_ = false;
            break;
          }
          hit = j;
        }
      }
      if (!monomial_ || hit < 0 || inverse_[hit] >= 0) {
        monomial_ = false;
        break;
      }
      perm_[i] = hit;
      inverse_[hit] = i;
      phase_[i] = m_(i, hit);
    }
    if (!monomial_) {
      perm_.clear();
      inverse_.clear();
      phase_.clear();
    }
  }

  CMatrix m_;
  std::vector<Index> perm_;
  std::vector<Index> inverse_;
  std::vector<cplx> phase_;
  bool monomial_ = false;
};

/// Frobenius distance between A and the closest unit-phase multiple of B.
inline double projective_distance(const CMatrix& a, const CMatrix& b) {
  // Align the phase first; the closed form ||A||^2 + ||B||^2 - 2|<A,B>| cancels to ~sqrt(eps).
  const cplx overlap = (a.conjugate().array() * b.array()).sum();
  const double mag = std::abs(overlap);
  const cplx phase = mag > 0.0 ? overlap / mag : cplx(1.0, 0.0);
  return (phase * a - b).norm();
}

namespace detail {

// Membership index keyed by a phase-invariant random projection
// f(K) = |<w, K>|^2 with ||w||_F = 1. Matrices within distance tol (modulo
// phase) have keys within 2*sqrt(p)*tol + tol^2, so a range query over that
// window followed by an exact distance test finds every match.
class ProjectiveIndex {
 public:
  ProjectiveIndex(Index p, double tol) : tol_(tol) {
    std::mt19937_64 rng(0x5EEDu + static_cast<std::uint64_t>(p));
    std::normal_distribution<double> normal;
    weights_.resize(p, p);
    for (Index j = 0; j < p; ++j)
      for (Index i = 0; i < p; ++i) weights_(i, j) = cplx(normal(rng), normal(rng));
    weights_ /= weights_.norm();
    window_ = 2.0 * std::sqrt(static_cast<double>(p)) * tol + tol * tol + 1e-15;
  }

  std::optional<std::size_t> find(const CMatrix& k, const std::vector<UnitaryMatrix>& pool) const {
    const double key = key_of(k);
    for (auto it = keys_.lower_bound(key - window_); it != keys_.end() && it->first <= key + window_;
         ++it) {
      if (projective_distance(pool[it->second].matrix(), k) <= tol_) return it->second;
    }
    return std::nullopt;
  }

  void insert(const CMatrix& k, std::size_t position) { keys_.emplace(key_of(k), position); }

 private:
  double key_of(const CMatrix& k) const {
    return std::norm((weights_.conjugate().array() * k.array()).sum());
  }

  double tol_;
  double window_;
  CMatrix weights_;
  std::multimap<double, std::size_t> keys_;
};

}  // namespace detail

/// Result of an exhaustive check of the group axioms.
struct AxiomReport {
  bool has_identity = false;
  bool closed_under_product = false;
  bool closed_under_inverse = false;
  bool no_duplicates = false;

  bool ok() const { return has_identity && closed_under_product && closed_under_inverse && no_duplicates; }
};

class GroupSpec {
 public:
  Index dim() const { return dim_; }
  std::size_t order() const { return elements_.size(); }
  const std::vector<UnitaryMatrix>& elements() const { return elements_; }
  const std::vector<UnitaryMatrix>& generators() const { return generators_; }
  const std::string& name() const { return name_; }

  /// Builds a group from an explicit element list; throws InvalidArgument if
  /// the list violates any axiom at `tol`.
  static GroupSpec from_elements(std::vector<UnitaryMatrix> elements, std::string name = {},
                                 double tol = tolerance::group) {
    require(!elements.empty(), ErrorKind::InvalidArgument, "group needs at least one element");
    GroupSpec g;
    g.dim_ = elements.front().dim();
    for (const auto& e : elements)
      require(e.dim() == g.dim_, ErrorKind::DimMismatch, "group elements differ in dimension");
    g.elements_ = std::move(elements);
    g.name_ = std::move(name);
    const AxiomReport report = g.check_axioms(tol);
    require(report.ok(), ErrorKind::InvalidArgument, "element list is not a group");
    return g;
  }

  AxiomReport check_axioms(double tol = tolerance::group) const {
    AxiomReport r;
    detail::ProjectiveIndex index(dim_, tol);
    r.no_duplicates = true;
    for (std::size_t i = 0; i < elements_.size(); ++i) {
      if (index.find(elements_[i].matrix(), elements_)) r.no_duplicates = false;
      index.insert(elements_[i].matrix(), i);
    }
    r.has_identity = index.find(CMatrix::Identity(dim_, dim_), elements_).has_value();
    r.closed_under_inverse = std::all_of(elements_.begin(), elements_.end(), [&](const auto& e) {
      return index.find(e.matrix().adjoint(), elements_).has_value();
    });
    r.closed_under_product = true;
    for (const auto& a : elements_) {
      for (const auto& b : elements_) {
        if (!index.find(a.matrix() * b.matrix(), elements_)) {
          r.closed_under_product = false;
          return r;
        }
      }
    }
    return r;
  }

 private:
  friend GroupSpec close_group(const std::vector<UnitaryMatrix>&, Index, std::size_t, std::string);

  Index dim_ = 0;
  std::vector<UnitaryMatrix> elements_;
  std::vector<UnitaryMatrix> generators_;
  std::string name_;
};

/// Smallest set containing the identity and the generators that is closed
/// under products (modulo phase). Finite groups are closed under inverses
/// automatically, so multiplying by generators suffices.
inline GroupSpec close_group(const std::vector<UnitaryMatrix>& generators, Index dim,
                             std::size_t max_order = kDefaultMaxOrder, std::string name = {}) {
  require(dim >= 1, ErrorKind::InvalidArgument, "group dimension must be positive");
  require(max_order >= 1, ErrorKind::InvalidArgument, "max_order must be at least 1");
  for (const auto& g : generators)
    require(g.dim() == dim, ErrorKind::DimMismatch,
            "generator of dimension " + std::to_string(g.dim()) + " in a group of dimension " +
                std::to_string(dim));

  GroupSpec group;
  group.dim_ = dim;
  group.name_ = std::move(name);
  group.generators_ = generators;
  detail::ProjectiveIndex index(dim, tolerance::group);
  group.elements_.push_back(UnitaryMatrix::identity(dim));
  index.insert(group.elements_.front().matrix(), 0);

  for (std::size_t cursor = 0; cursor < group.elements_.size(); ++cursor) {
    for (const auto& g : generators) {
      UnitaryMatrix product = g * group.elements_[cursor];
      if (index.find(product.matrix(), group.elements_)) continue;
      require(group.elements_.size() < max_order, ErrorKind::ClosureOverflow,
              "closure exceeds max_order " + std::to_string(max_order));
      index.insert(product.matrix(), group.elements_.size());
      group.elements_.push_back(std::move(product));
    }
  }
  return group;
}

/// Overload for raw matrices; raises NotUnitary for a non-unitary generator.
inline GroupSpec close_group(const std::vector<CMatrix>& generators, Index dim,
                             std::size_t max_order = kDefaultMaxOrder, std::string name = {}) {
  std::vector<UnitaryMatrix> checked;
  checked.reserve(generators.size());
  for (const auto& g : generators) checked.emplace_back(g);
  return close_group(checked, dim, max_order, std::move(name));
}

/// Built-in symmetry families. `param` is d for block_circulant and k for
/// equicorrelation; it is ignored otherwise.
struct GroupKind {
  enum class Family {
    trivial,
    circulant,
    block_circulant,
    permutation,
    perhermitian,
    proper_quaternion,
    equicorrelation,
  };

  Family family = Family::trivial;
  int param = 0;

  static GroupKind parse(std::string_view text) {
    std::string_view base = text;
    int param = 0;
    bool has_param = false;
    if (auto pos = text.find_first_of(":("); pos != std::string_view::npos) {
      base = text.substr(0, pos);
      std::string_view rest = text.substr(pos + 1);
      if (!rest.empty() && rest.back() == ')') rest.remove_suffix(1);
      auto [ptr, ec] = std::from_chars(rest.data(), rest.data() + rest.size(), param);
      require(ec == std::errc{} && ptr == rest.data() + rest.size(), ErrorKind::InvalidArgument,
              "bad group parameter in '" + std::string(text) + "'");
      has_param = true;
    }
    static const std::pair<std::string_view, Family> table[] = {
        {"trivial", Family::trivial},
        {"circulant", Family::circulant},
        {"block_circulant", Family::block_circulant},
        {"permutation", Family::permutation},
        {"perhermitian", Family::perhermitian},
        {"proper_quaternion", Family::proper_quaternion},
        {"quaternion", Family::proper_quaternion},
        {"equicorrelation", Family::equicorrelation},
    };
    for (const auto& [label, family] : table) {
      if (label != base) continue;
      const bool needs = family == Family::block_circulant || family == Family::equicorrelation;
      require(needs == has_param, ErrorKind::InvalidArgument,
              needs ? "group '" + std::string(base) + "' needs a parameter, e.g. " +
                          std::string(base) + ":2"
                    : "group '" + std::string(base) + "' takes no parameter");
      return GroupKind{family, param};
    }
    throw Error(ErrorKind::InvalidArgument, "unknown group kind '" + std::string(text) + "'");
  }

  std::string to_string() const {
    switch (family) {
      case Family::trivial: return "trivial";
      case Family::circulant: return "circulant";
      case Family::block_circulant: return "block_circulant:" + std::to_string(param);
      case Family::permutation: return "permutation";
      case Family::perhermitian: return "perhermitian";
      case Family::proper_quaternion: return "proper_quaternion";
      case Family::equicorrelation: return "equicorrelation:" + std::to_string(param);
    }
    return "unknown";
  }

  friend bool operator==(const GroupKind&, const GroupKind&) = default;
};

namespace detail {

inline std::size_t factorial_capped(Index k, std::size_t cap) {
  std::size_t f = 1;
  for (Index i = 2; i <= k; ++i) {
    f *= static_cast<std::size_t>(i);
    if (f > cap) return cap + 1;
  }
  return f;
}

inline CMatrix transposition(Index p, Index a, Index b) {
  CMatrix t = CMatrix::Identity(p, p);
  t(a, a) = t(b, b) = 0.0;
  t(a, b) = t(b, a) = 1.0;
  return t;
}

inline CMatrix embed(const CMatrix& block, Index offset, Index p) {
  CMatrix out = CMatrix::Identity(p, p);
  out.block(offset, offset, block.rows(), block.cols()) = block;
  return out;
}

inline CMatrix clock_matrix(Index d) {
  CMatrix z = CMatrix::Zero(d, d);
  for (Index j = 0; j < d; ++j)
    z(j, j) = std::polar(1.0, 2.0 * std::numbers::pi * static_cast<double>(j) / static_cast<double>(d));
  return z;
}

inline void check_builtin_size(const GroupKind& kind, Index p) {
  using F = GroupKind::Family;
  const std::string label = kind.to_string() + " with p=" + std::to_string(p);
  require(p >= 1, ErrorKind::UnsupportedSize, label + ": p must be positive");
  switch (kind.family) {
    case F::trivial:
    case F::circulant:
    case F::permutation: break;
    case F::block_circulant:
      require(kind.param >= 1 && p % kind.param == 0, ErrorKind::UnsupportedSize,
              label + ": d must divide p");
      break;
    case F::perhermitian:
      require(p >= 2, ErrorKind::UnsupportedSize, label + ": needs p >= 2");
      break;
    case F::proper_quaternion:
      require(p >= 2 && p % 2 == 0, ErrorKind::UnsupportedSize, label + ": p must be even");
      break;
    case F::equicorrelation:
      require(kind.param >= 1 && kind.param <= p, ErrorKind::UnsupportedSize,
              label + ": k must lie in [1, p]");
      break;
  }
}

}  // namespace detail

/// The group order a built-in will have, without building it (saturates at
/// max_order + 1).
inline std::size_t builtin_group_order(const GroupKind& kind, Index p,
                                       std::size_t max_order = kDefaultMaxOrder) {
  using F = GroupKind::Family;
  detail::check_builtin_size(kind, p);
  switch (kind.family) {
    case F::trivial: return 1;
    case F::circulant: return static_cast<std::size_t>(p);
    case F::block_circulant: return static_cast<std::size_t>(p / kind.param);
    case F::permutation: return detail::factorial_capped(p, max_order);
    case F::perhermitian:
    case F::proper_quaternion: return 2;
    case F::equicorrelation: {
      const Index rest = p - kind.param;
      const std::size_t head = detail::factorial_capped(kind.param, max_order);
      const std::size_t tail =
          rest == 0 ? 1 : rest == 1 ? 2 : static_cast<std::size_t>(rest * rest * rest);
      return head > max_order || tail > max_order ? max_order + 1
                                                  : std::min(head * tail, max_order + 1);
    }
  }
  return 0;
}

/// Closed built-in group. equicorrelation(k) is the finite stand-in for
/// S_k x U(p-k): permutations of the first k coordinates times the
/// clock-and-shift group on the remaining p-k (a sign flip when p-k = 1),
/// which acts irreducibly there and forces the trailing block to c*I.
inline GroupSpec builtin_group(const GroupKind& kind, Index p,
                               std::size_t max_order = kDefaultMaxOrder) {
  using F = GroupKind::Family;
  detail::check_builtin_size(kind, p);
  require(builtin_group_order(kind, p, max_order) <= max_order, ErrorKind::ClosureOverflow,
          kind.to_string() + " with p=" + std::to_string(p) + " exceeds max_order " +
              std::to_string(max_order));

  std::vector<CMatrix> gens;
  switch (kind.family) {
    case F::trivial: break;
    case F::circulant:
      if (p > 1) gens.push_back(shift_matrix(p));
      break;
    case F::block_circulant: {
      CMatrix s = CMatrix::Identity(p, p);
      const CMatrix base = shift_matrix(p);
      for (int i = 0; i < kind.param; ++i) s = s * base;
      if (p / kind.param > 1) gens.push_back(s);
      break;
    }
    case F::permutation:
      if (p > 1) {
        gens.push_back(shift_matrix(p));
        gens.push_back(detail::transposition(p, 0, 1));
      }
      break;
    case F::perhermitian: gens.push_back(exchange_matrix(p)); break;
    case F::proper_quaternion: {
      CMatrix rot(2, 2);
      rot << 0.0, -1.0, 1.0, 0.0;
      gens.push_back(kron(rot, CMatrix::Identity(p / 2, p / 2)));
      break;
    }
    case F::equicorrelation: {
      const Index k = kind.param, rest = p - k;
      if (k > 1) {
        gens.push_back(detail::embed(shift_matrix(k), 0, p));
        gens.push_back(detail::transposition(p, 0, 1));
      }
      if (rest == 1) {
        gens.push_back(detail::embed(-CMatrix::Identity(1, 1), k, p));
      } else if (rest > 1) {
        gens.push_back(detail::embed(shift_matrix(rest), k, p));
        gens.push_back(detail::embed(detail::clock_matrix(rest), k, p));
      }
      break;
    }
  }
  return close_group(gens, p, max_order, kind.to_string());
}

/// max over K in G of ||K^H M K - M||_F.
inline double invariance_defect(const CMatrix& m, const GroupSpec& g) {
  require_square(m, "matrix");
  require(m.rows() == g.dim(), ErrorKind::DimMismatch,
          "matrix dimension " + std::to_string(m.rows()) + " vs group dimension " +
              std::to_string(g.dim()));
  double worst = 0.0;
  for (const auto& k : g.elements()) worst = std::max(worst, (k.conjugate_adjoint(m) - m).norm());
  return worst;
}

inline bool is_invariant(const CMatrix& m, const GroupSpec& g, double tol = tolerance::structure) {
  return invariance_defect(m, g) <= tol;
}

}  // namespace symtyler
