#include "test_util.hpp"

using namespace symtyler;
using testing_util::throws_kind;

namespace {

GroupSpec group_of(const char* kind, int p) { return builtin_group(GroupKind::parse(kind), p); }
StructureInfo structure_of(const char* kind, int p) { return builtin_structure(GroupKind::parse(kind), p); }

}  // namespace

TEST(Reynolds, IdentityIsFixed) {
  for (const auto& kind : testing_util::builtins_for(6)) {
    const CMatrix r = reynolds_project(CMatrix::Identity(6, 6), builtin_group(kind, 6));
    EXPECT_LT((r - CMatrix::Identity(6, 6)).norm(), 1e-13) << kind.to_string();
  }
}

TEST(Reynolds, TrivialGroupLeavesMatrixAlone) {
  std::mt19937_64 rng(1);
  const CMatrix m = oracle::random_hermitian(5, rng);
  EXPECT_LT((reynolds_project(m, group_of("trivial", 5)) - m).norm(), 1e-14);
}

TEST(Reynolds, RankOneUnderCirculantAveragesToScaledIdentity) {
  CMatrix e1 = CMatrix::Zero(4, 4);
  e1(0, 0) = 1.0;
  const CMatrix want = oracle::brute_reynolds(e1, oracle::cyclic_group(4));
  EXPECT_LT((want - CMatrix::Identity(4, 4) / 4.0).norm(), 1e-15);
  EXPECT_LT((reynolds_project(e1, group_of("circulant", 4)) - want).norm(), 1e-14);
}

TEST(Reynolds, MatchesBruteForceSum) {
  std::mt19937_64 rng(2);
  for (int p : {3, 5, 8}) {
    const CMatrix m = oracle::random_hermitian(p, rng);
    EXPECT_LT((reynolds_project(m, group_of("circulant", p)) -
               oracle::brute_reynolds(m, oracle::cyclic_group(p)))
                  .norm(),
              1e-12);
  }
}

TEST(Reynolds, RejectsDimensionMismatch) {
  EXPECT_TRUE(throws_kind([] { reynolds_project(CMatrix::Identity(3, 3), group_of("circulant", 4)); },
                          ErrorKind::DimMismatch));
}

TEST(ReynoldsProperty, IdempotentSelfAdjointInvariant) {
  std::mt19937_64 rng(3);
  for (int p : {4, 6}) {
    for (const auto& kind : testing_util::builtins_for(p)) {
      const GroupSpec g = builtin_group(kind, p);
      for (int rep = 0; rep < 4; ++rep) {
        const CMatrix a = oracle::random_hermitian(p, rng);
        const CMatrix b = oracle::random_hermitian(p, rng);
        const CMatrix pa = reynolds_project(a, g);
        EXPECT_LT((reynolds_project(pa, g) - pa).norm(), 1e-8);
        EXPECT_NEAR(std::real((a * reynolds_project(b, g)).trace()), std::real((pa * b).trace()), 1e-8);
        EXPECT_TRUE(is_invariant(pa, g));
        EXPECT_TRUE(is_hermitian(pa, 1e-14));
      }
    }
  }
}

TEST(BuiltinStructure, KnownParameters) {
  const auto c8 = structure_of("circulant", 8);
  EXPECT_EQ(c8.m(), 8u);
  EXPECT_DOUBLE_EQ(c8.rho(), 0.125);
  EXPECT_DOUBLE_EQ(c8.delta(), 0.125);
  const auto ph = structure_of("perhermitian", 8);
  EXPECT_EQ(ph.m(), 2u);
  EXPECT_DOUBLE_EQ(ph.rho(), 0.5);
  EXPECT_DOUBLE_EQ(ph.delta(), 0.5);
  const auto bc = structure_of("block_circulant:2", 8);
  EXPECT_EQ(bc.m(), 4u);
  EXPECT_DOUBLE_EQ(bc.rho(), 0.25);
  EXPECT_DOUBLE_EQ(bc.delta(), 0.25);
  const auto q = structure_of("proper_quaternion", 8);
  EXPECT_EQ(q.m(), 2u);
  EXPECT_EQ(q.components()[0], (Component{1, 4}));
  EXPECT_DOUBLE_EQ(q.rho(), 0.5);
  const auto perm = structure_of("permutation", 6);
  EXPECT_EQ(perm.component_multiset(), (std::vector<Component>{{1, 1}, {5, 1}}));
  EXPECT_DOUBLE_EQ(perm.rho(), 1.0 / 6.0);
  EXPECT_DOUBLE_EQ(perm.delta(), 1.0 / 6.0);
  const auto t = structure_of("trivial", 5);
  EXPECT_EQ(t.components()[0], (Component{1, 5}));
  EXPECT_DOUBLE_EQ(t.rho(), 1.0);
  EXPECT_DOUBLE_EQ(t.delta(), 1.0);
}

TEST(StructureInfo, ValidatesInvariants) {
  EXPECT_TRUE(throws_kind([] { StructureInfo(4, {{1, 3}}, CMatrix::Identity(4, 4)); },
                          ErrorKind::InvalidArgument));
  EXPECT_TRUE(throws_kind([] { StructureInfo(2, {{1, 2}}, CMatrix::Ones(2, 2)); }, ErrorKind::NotUnitary));
  const StructureInfo s(6, {{2, 1}, {1, 4}}, CMatrix::Identity(6, 6));
  EXPECT_DOUBLE_EQ(s.rho(), (2.0 + 16.0) / 36.0);
  EXPECT_DOUBLE_EQ(s.delta(), 4.0 / 6.0);
  EXPECT_TRUE(s.admits(5));
  EXPECT_FALSE(s.admits(4));
}

TEST(StructureProperty, BuiltinBasesBlockDiagonalizeTheCommutant) {
  std::mt19937_64 rng(4);
  for (int p : {2, 3, 4, 5, 6, 8, 9, 12}) {
    for (const auto& kind : testing_util::builtins_for(p)) {
      if (builtin_group_order(kind, p) > 800) continue;
      const GroupSpec g = builtin_group(kind, p);
      const StructureInfo s = builtin_structure(kind, p);
      double total = 0.0;
      for (const auto& c : s.components()) total += static_cast<double>(c.replication) * c.block_size * c.block_size;
      EXPECT_DOUBLE_EQ(s.rho(), total / (p * p));
      const CMatrix m = reynolds_project(oracle::random_hermitian(p, rng), g);
      EXPECT_LT(off_mask_norm(m, s), 1e-8) << kind.to_string() << " p=" << p;
      EXPECT_LT(replication_defect(m, s), 1e-8) << kind.to_string() << " p=" << p;
      // dimension count: the commutant has sum s_i^2 real parameters
      EXPECT_LT((mask_project(m, s) - m).norm(), 1e-8);
    }
  }
}

TEST(Discovery, CirculantFour) {
  const StructureInfo s = discover_structure(group_of("circulant", 4), 1);
  EXPECT_EQ(s.m(), 4u);
  for (const auto& c : s.components()) EXPECT_EQ(c, (Component{1, 1}));
  EXPECT_DOUBLE_EQ(s.rho(), 0.25);
  EXPECT_DOUBLE_EQ(s.delta(), 0.25);
}

TEST(Discovery, TrivialThree) {
  const StructureInfo s = discover_structure(group_of("trivial", 3), 1);
  ASSERT_EQ(s.m(), 1u);
  EXPECT_EQ(s.components()[0], (Component{1, 3}));
  EXPECT_DOUBLE_EQ(s.rho(), 1.0);
}

TEST(Discovery, ExchangeGroup) {
  const GroupSpec g = close_group(std::vector<CMatrix>{exchange_matrix(4)}, 4);
  const StructureInfo s = discover_structure(g, 9);
  EXPECT_EQ(s.component_multiset(), (std::vector<Component>{{1, 2}, {1, 2}}));
}

TEST(DiscoveryProperty, ReproducesBuiltins) {
  std::mt19937_64 rng(5);
  for (int p : {2, 3, 4, 5, 6, 8}) {
    for (const auto& kind : testing_util::builtins_for(p)) {
      const GroupSpec g = builtin_group(kind, p);
      const StructureInfo want = builtin_structure(kind, p);
      for (std::uint64_t seed : {1u, 2u, 3u}) {
        const StructureInfo got = discover_structure_retry(g, seed);
        EXPECT_EQ(got.m(), want.m()) << kind.to_string() << " p=" << p;
        EXPECT_EQ(got.component_multiset(), want.component_multiset()) << kind.to_string() << " p=" << p;
        EXPECT_NEAR(got.rho(), want.rho(), 1e-15);
        EXPECT_NEAR(got.delta(), want.delta(), 1e-15);
        const CMatrix m = reynolds_project(oracle::random_hermitian(p, rng), g);
        EXPECT_LT(off_mask_norm(m, got), 1e-8);
        EXPECT_LT(replication_defect(m, got), 1e-8) << kind.to_string() << " p=" << p;
      }
    }
  }
}

TEST(Discovery, AmbiguousToleranceIsReported) {
  // A tolerance above the smallest eigenvalue gap but not far enough above it
  // to merge clusters cleanly must not silently return a wrong structure.
  const GroupSpec g = group_of("circulant", 8);
  int degenerate = 0;
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    try {
      const StructureInfo s = discover_structure(g, seed, 5e-2);
      EXPECT_LE(s.m(), 8u);
    } catch (const Error& e) {
      EXPECT_TRUE(e.kind() == ErrorKind::DegenerateSpectrum || e.kind() == ErrorKind::InconsistentMultiplicity)
          << e.what();
      ++degenerate;
    }
  }
  EXPECT_GT(degenerate, 0);
}

TEST(MaskProject, InvariantMatrixUnchanged) {
  std::mt19937_64 rng(6);
  const GroupSpec g = group_of("perhermitian", 6);
  const StructureInfo s = structure_of("perhermitian", 6);
  const CMatrix m = reynolds_project(oracle::random_hermitian(6, rng), g);
  EXPECT_LT((mask_project(m, s) - m).norm(), 1e-8);
}

TEST(MaskProject, TrivialMaskKeepsEverything) {
  std::mt19937_64 rng(7);
  const CMatrix m = oracle::random_hermitian(4, rng);
  EXPECT_LT((mask_project(m, structure_of("trivial", 4)) - m).norm(), 1e-13);
}

TEST(MaskProject, CirculantMatchesEntrywiseFourierOracle) {
  CMatrix m = CMatrix::Zero(4, 4);
  m(0, 1) = m(1, 0) = 1.0;
  const CMatrix got = mask_project(m, structure_of("circulant", 4));
  EXPECT_LT((got - oracle::fourier_diagonal_part(m)).norm(), 1e-13);
  EXPECT_LT((mask_project(got, structure_of("circulant", 4)) - got).norm(), 1e-13);
}

TEST(MaskProject, RejectsDimensionMismatch) {
  EXPECT_TRUE(throws_kind([] { mask_project(CMatrix::Identity(3, 3), structure_of("trivial", 4)); },
                          ErrorKind::DimMismatch));
}

TEST(OrbitSpanRank, CirculantSingleSampleIsFullRank) {
  const SampleSet x = testing_util::unit_samples(4, 1, 8);
  const RankReport r = orbit_span_rank(x, group_of("circulant", 4), structure_of("circulant", 4));
  EXPECT_EQ(r.total, 4);
}

TEST(OrbitSpanRank, PerHermitianSingleSample) {
  const SampleSet x = testing_util::unit_samples(4, 1, 9);
  const auto s = structure_of("perhermitian", 4);
  const RankReport r = orbit_span_rank(x, group_of("perhermitian", 4), s);
  EXPECT_EQ(r.total, 2);
  EXPECT_EQ(r.total, expected_orbit_rank(s, 1).total);
  EXPECT_EQ(r.per_component, (std::vector<int>{1, 1}));
}

TEST(OrbitSpanRank, AllOnesVectorIsDegenerate) {
  CMatrix x = CMatrix::Ones(4, 1) / 2.0;
  const SampleSet xs(x, {"cae", 0, {}, {}});
  EXPECT_EQ(orbit_span_rank(xs, group_of("circulant", 4), structure_of("circulant", 4)).total, 1);
}

TEST(OrbitSpanRankProperty, MatchesRankFormula) {
  for (int p : {4, 6, 8}) {
    for (const auto& kind : testing_util::builtins_for(p)) {
      if (builtin_group_order(kind, p) > 800) continue;
      const GroupSpec g = builtin_group(kind, p);
      const StructureInfo s = builtin_structure(kind, p);
      const int top = static_cast<int>(std::ceil(s.delta() * p)) + 2;
      for (int n = 1; n <= top; ++n) {
        const SampleSet x = testing_util::unit_samples(p, n, 100 * p + n);
        const RankReport got = orbit_span_rank(x, g, s);
        const RankReport want = expected_orbit_rank(s, n);
        EXPECT_EQ(got.total, want.total) << kind.to_string() << " p=" << p << " n=" << n;
        EXPECT_EQ(got.per_component, want.per_component) << kind.to_string() << " p=" << p << " n=" << n;
      }
    }
  }
}

TEST(Geodesic, IdenticalEndpoints) {
  std::mt19937_64 rng(10);
  const CMatrix m = oracle::random_pd(5, rng);
  EXPECT_LT((geodesic(m, m, 0.5) - m).norm(), 1e-12 * m.norm());
}

TEST(Geodesic, CommutingCaseIsScalarPower) {
  CMatrix d = CMatrix::Zero(3, 3);
  d.diagonal() << 2.0, 5.0, 0.3;
  for (double t : {0.0, 0.3, 1.0, 1.7}) {
    const CMatrix got = geodesic(CMatrix::Identity(3, 3), d, t);
    for (int i = 0; i < 3; ++i) EXPECT_NEAR(got(i, i).real(), std::pow(d(i, i).real(), t), 1e-12);
    EXPECT_LT((got - CMatrix(got.diagonal().asDiagonal())).norm(), 1e-12);
  }
}

TEST(Geodesic, MidpointMatchesDenmanBeavers) {
  std::mt19937_64 rng(11);
  for (int rep = 0; rep < 10; ++rep) {
    const CMatrix m0 = oracle::random_pd(6, rng), m1 = oracle::random_pd(6, rng);
    EXPECT_LT((geodesic(m0, m1, 0.5) - oracle::geodesic_dyadic(m0, m1, 1)).norm(), 1e-10);
    EXPECT_LT((geodesic(m0, m1, 0.25) - oracle::geodesic_dyadic(m0, m1, 2)).norm(), 1e-10);
  }
}

TEST(Geodesic, EndpointsAndErrors) {
  std::mt19937_64 rng(12);
  const CMatrix m0 = oracle::random_pd(4, rng), m1 = oracle::random_pd(4, rng);
  EXPECT_LT((geodesic(m0, m1, 0.0) - m0).norm(), 1e-10);
  EXPECT_LT((geodesic(m0, m1, 1.0) - m1).norm(), 1e-10);
  CMatrix bad = m1;
  bad(0, 0) = -5.0;
  EXPECT_TRUE(throws_kind([&] { geodesic(m0, bad, 0.5); }, ErrorKind::NotPositiveDefinite));
}

TEST(GeodesicProperty, InvariantPairsStayInvariant) {
  std::mt19937_64 rng(13);
  for (const auto& kind : testing_util::builtins_for(6)) {
    const GroupSpec g = builtin_group(kind, 6);
    for (int rep = 0; rep < 3; ++rep) {
      const CMatrix m0 = reynolds_project(oracle::random_pd(6, rng), g);
      const CMatrix m1 = reynolds_project(oracle::random_pd(6, rng), g);
      for (double t : {0.25, 0.5, 0.75}) EXPECT_TRUE(is_invariant(geodesic(m0, m1, t), g)) << kind.to_string();
    }
  }
}
