#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "lcc/cost.hpp"
#include "lcc/decompose.hpp"
#include "lcc/random.hpp"

using namespace lcc;

namespace {

double rel_diff(const Row& a, const Row& b) {
  double num = 0.0, den = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    num += (a[i] - b[i]) * (a[i] - b[i]);
    den += b[i] * b[i];
  }
  return den == 0.0 ? std::sqrt(num) : std::sqrt(num / den);
}

Row random_x(std::mt19937_64& rng, std::size_t k) {
  std::normal_distribution<double> g;
  Row x(k);
  for (double& v : x) v = g(rng);
  return x;
}

DecomposeConfig exact(Algorithm a) {
  DecomposeConfig c = a == Algorithm::fp ? DecomposeConfig::fp_default() : DecomposeConfig{};
  c.algorithm = a;
  c.target_sqnr_db = 200;
  return c;
}

}  // namespace

TEST(Fs, IdentityNeedsNothing) {
  TargetMatrix t{{1, 0}, {0, 1}};
  DecompositionResult r = fs_decompose(t, DecomposeConfig{});
  EXPECT_EQ(r.sqnr_db, kInfiniteSqnr);
  EXPECT_EQ(r.dag.num_internal(), 0u);
  EXPECT_TRUE(r.converged());
}

TEST(Fs, ThreeAndOne) {
  TargetMatrix t{{3, 0}, {0, 1}};
  DecompositionResult r = fs_decompose(t, exact(Algorithm::fs));
  ASSERT_EQ(r.dag.num_internal(), 1u);
  EXPECT_EQ(dense_value(r.dag, 2), (Row{3, 0}));
  EXPECT_EQ(count_additions(r.dag), 1u);
  EXPECT_EQ(r.sqnr_db, kInfiniteSqnr);
}

TEST(Fs, PowerOfTwoDiagonal) {
  TargetMatrix t{{4, 0, 0}, {0, -0.25, 0}, {0, 0, 1}};
  DecompositionResult r = fs_decompose(t, exact(Algorithm::fs));
  EXPECT_EQ(r.dag.num_internal(), 0u);
  EXPECT_EQ(r.sqnr_db, kInfiniteSqnr);
}

TEST(Fs, AdditionsBoundedBySchedule) {
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    TargetMatrix t = gen_gaussian_matrix(16, 4, seed);
    DecompositionResult r = fs_decompose(t, DecomposeConfig{});
    std::size_t full = 0;
    for (VertexId v = r.dag.num_inputs(); v < r.dag.size(); ++v) {
      EXPECT_GE(r.dag.indegree(v), 2u);
      EXPECT_LE(r.dag.indegree(v), 2u);
      full += r.dag.indegree(v) == 2;
    }
    EXPECT_EQ(count_additions(r.dag), r.dag.num_internal() * (2 - 1));
    EXPECT_EQ(full, r.dag.num_internal());
  }
}

TEST(Fs, ReachesTargetOrReportsWhy) {
  TargetMatrix t = gen_gaussian_matrix(16, 4, 9);
  DecomposeConfig cfg;
  cfg.target_sqnr_db = 30;
  DecompositionResult r = fs_decompose(t, cfg);
  EXPECT_TRUE(r.converged());
  EXPECT_GT(r.sqnr_db, 30.0);

  cfg.target_sqnr_db = 100;
  cfg.max_vertices = 3;
  r = fs_decompose(t, cfg);
  EXPECT_EQ(r.status, Status::vertex_cap);
  EXPECT_EQ(r.dag.num_internal(), 3u);
}

TEST(Decompose, SqnrLogIsMonotone) {
  for (Algorithm a : {Algorithm::fs, Algorithm::fp, Algorithm::ma}) {
    for (std::uint64_t seed = 1; seed <= 3; ++seed) {
      TargetMatrix t = gen_gaussian_matrix(16, 4, seed);
      DecomposeConfig cfg = a == Algorithm::fp   ? DecomposeConfig::fp_default()
                            : a == Algorithm::ma ? DecomposeConfig::ma_default(1)
                                                 : DecomposeConfig{};
      DecompositionResult r = decompose(t, cfg);
      ASSERT_FALSE(r.log.empty());
      for (std::size_t i = 1; i < r.log.size(); ++i) {
        EXPECT_GE(r.log[i].sqnr_db, r.log[i - 1].sqnr_db) << to_string(a);
        EXPECT_GT(r.log[i].num_vertices, r.log[i - 1].num_vertices);
      }
      EXPECT_EQ(r.log.back().sqnr_db, r.sqnr_db);
      EXPECT_EQ(r.log.back().num_vertices, r.dag.size());
    }
  }
}

TEST(Decompose, ReportedErrorsMatchOutputs) {
  TargetMatrix t = gen_gaussian_matrix(12, 4, 17);
  for (Algorithm a : {Algorithm::fs, Algorithm::fp, Algorithm::ma, Algorithm::sliced, Algorithm::csd}) {
    DecomposeConfig cfg = a == Algorithm::fp ? DecomposeConfig::fp_default()
                          : a == Algorithm::ma ? DecomposeConfig::ma_default(0)
                                               : DecomposeConfig{};
    cfg.algorithm = a;
    cfg.slice_width = 2;
    DecompositionResult r = decompose(t, cfg);
    EXPECT_EQ(output_errors(t, r.dag), r.row_errors) << to_string(a);
    EXPECT_EQ(output_sqnr_db(t, r.dag), r.sqnr_db) << to_string(a);
  }
}

TEST(Decompose, SnapshotsReproduceLoggedSqnr) {
  TargetMatrix t = gen_gaussian_matrix(8, 3, 2);
  for (Algorithm a : {Algorithm::fs, Algorithm::fp, Algorithm::ma}) {
    DecomposeConfig cfg = a == Algorithm::fp   ? DecomposeConfig::fp_default()
                          : a == Algorithm::ma ? DecomposeConfig::ma_default(std::nullopt)
                                               : DecomposeConfig{};
    DecompositionResult r = decompose(t, cfg);
    for (std::size_t i = 0; i < r.log.size(); ++i) {
      ComputationDag s = snapshot(r, i);
      EXPECT_EQ(s.size(), r.log[i].num_vertices);
      EXPECT_EQ(output_sqnr_db(t, s), r.log[i].sqnr_db) << to_string(a) << " step " << i;
    }
  }
}

TEST(Decompose, RejectsBadConfigs) {
  TargetMatrix t = gen_gaussian_matrix(4, 4, 1);
  DecomposeConfig cfg;
  cfg.target_sqnr_db = INFINITY;
  EXPECT_THROW(decompose(t, cfg), Error);
  cfg = DecomposeConfig::ma_default(-1);
  EXPECT_THROW(decompose(t, cfg), Error);
  cfg = DecomposeConfig{};
  cfg.schedule.clear();
  EXPECT_THROW(decompose(t, cfg), Error);
  cfg = DecomposeConfig{};
  cfg.algorithm = Algorithm::sliced;
  cfg.slice_width = 0;
  EXPECT_THROW(decompose(t, cfg), Error);
  cfg.slice_width = 5;
  EXPECT_THROW(decompose(t, cfg), Error);
}

TEST(Fp, IdentityAndPowersOfTwo) {
  TargetMatrix id{{1, 0}, {0, 1}};
  DecompositionResult r = fp_decompose(id, DecomposeConfig::fp_default());
  EXPECT_EQ(r.sqnr_db, kInfiniteSqnr);
  EXPECT_EQ(r.dag.num_internal(), 0u);

  TargetMatrix pw{{0, 2}, {-0.5, 0}, {0, 8}};
  r = fp_decompose(pw, DecomposeConfig::fp_default());
  EXPECT_EQ(r.sqnr_db, kInfiniteSqnr);
  EXPECT_EQ(r.dag.num_internal(), 0u);
}

TEST(Fp, StrictlyLayered) {
  for (WiringSolver solver : {WiringSolver::dmp, WiringSolver::rs}) {
    TargetMatrix t = gen_gaussian_matrix(16, 4, 3);
    DecompositionResult r = fp_decompose(t, DecomposeConfig::fp_default(solver));
    const DepthTable d = compute_depths(r.dag);
    for (VertexId v = r.dag.num_inputs(); v < r.dag.size(); ++v)
      for (const WiringTerm& term : r.dag.terms(v).terms())
        EXPECT_EQ(d.vertex[term.source] + 1, d.vertex[v]);
    // outputs come from the last layer
    const int last = r.dag.num_internal() ? *std::max_element(d.vertex.begin(), d.vertex.end()) : 0;
    for (std::size_t n = 0; n < t.rows(); ++n)
      if (r.dag.output(n).is_assigned()) {
        EXPECT_EQ(d.output[n], last);
      }
  }
}

TEST(Fp, LayerCap) {
  TargetMatrix t = gen_gaussian_matrix(16, 4, 3);
  DecomposeConfig cfg = DecomposeConfig::fp_default();
  cfg.target_sqnr_db = 150;
  cfg.layers_max = 2;
  DecompositionResult r = fp_decompose(t, cfg);
  EXPECT_EQ(r.status, Status::layer_cap);
  EXPECT_EQ(r.log.size(), 3u);
}

TEST(Ma, UnboundedWithoutPenaltyMatchesFs) {
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    TargetMatrix t = gen_gaussian_matrix(16, 4, seed);
    DecomposeConfig m = DecomposeConfig::ma_default(std::nullopt);
    m.depth_penalty = false;
    DecomposeConfig f = m;
    f.algorithm = Algorithm::fs;
    DecompositionResult a = ma_decompose(t, m), b = fs_decompose(t, f);
    ASSERT_EQ(a.dag.size(), b.dag.size());
    for (VertexId v = a.dag.num_inputs(); v < a.dag.size(); ++v)
      EXPECT_EQ(a.dag.terms(v), b.dag.terms(v));
    EXPECT_EQ(a.sqnr_db, b.sqnr_db);
  }
}

TEST(Ma, DepthSpanRespected) {
  for (int delta : {0, 1, 2}) {
    TargetMatrix t = gen_gaussian_matrix(16, 4, 40 + delta);
    DecompositionResult r = ma_decompose(t, DecomposeConfig::ma_default(delta));
    const DepthTable d = compute_depths(r.dag);
    for (VertexId v = r.dag.num_inputs(); v < r.dag.size(); ++v) {
      int lo = 1 << 30, hi = -1;
      for (const WiringTerm& term : r.dag.terms(v).terms()) {
        lo = std::min(lo, d.vertex[term.source]);
        hi = std::max(hi, d.vertex[term.source]);
      }
      EXPECT_LE(hi - lo, delta);
    }
  }
}

TEST(Ma, ThreeAndOne) {
  TargetMatrix t{{3, 0}, {0, 1}};
  DecomposeConfig cfg = DecomposeConfig::ma_default(0);
  cfg.target_sqnr_db = 200;
  DecompositionResult r = ma_decompose(t, cfg);
  ASSERT_EQ(r.dag.num_internal(), 1u);
  EXPECT_EQ(dense_value(r.dag, 2), (Row{3, 0}));
}

TEST(Ma, DepthZeroSpanIsShallowerThanFs) {
  double ma_depth = 0, fs_depth = 0;
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    TargetMatrix t = gen_gaussian_matrix(16, 4, seed);
    const DepthTable a = compute_depths(ma_decompose(t, DecomposeConfig::ma_default(0)).dag);
    const DepthTable b = compute_depths(fs_decompose(t, DecomposeConfig{}).dag);
    ma_depth += *std::max_element(a.vertex.begin(), a.vertex.end());
    fs_depth += *std::max_element(b.vertex.begin(), b.vertex.end());
  }
  EXPECT_LT(ma_depth, fs_depth);
}

TEST(Sliced, SingleBlockEqualsInner) {
  TargetMatrix t = gen_gaussian_matrix(8, 4, 6);
  DecomposeConfig cfg;
  cfg.algorithm = Algorithm::sliced;
  cfg.slice_width = 4;
  DecompositionResult s = slice_decompose(t, cfg);
  DecompositionResult f = fs_decompose(t, DecomposeConfig{});
  ASSERT_EQ(s.dag.size(), f.dag.size());
  for (VertexId v = f.dag.num_inputs(); v < f.dag.size(); ++v) EXPECT_EQ(s.dag.terms(v), f.dag.terms(v));
  EXPECT_EQ(s.sqnr_db, f.sqnr_db);
}

TEST(Sliced, TwoBlocksExact) {
  TargetMatrix t{{3, 5, 1, 7}, {2, -1, 6, 3}, {1, 9, -3, 2}, {5, 2, 11, -1}};
  DecomposeConfig cfg = exact(Algorithm::sliced);
  cfg.slice_width = 2;
  DecompositionResult s = slice_decompose(t, cfg);
  EXPECT_EQ(s.sqnr_db, kInfiniteSqnr);

  std::size_t block_adds = 0;
  for (std::size_t first : {0u, 2u})
    block_adds += count_additions(
        fs_decompose(TargetMatrix(4, 2, t.column_block(first, 2)), exact(Algorithm::fs)).dag);
  EXPECT_EQ(count_additions(s.dag), block_adds + t.rows());

  std::mt19937_64 rng(3);
  for (int i = 0; i < 100; ++i) {
    Row x = random_x(rng, 4);
    EXPECT_LE(rel_diff(evaluate_dag(s.dag, x), t.multiply(x)), 1e-12);
  }
}

TEST(Sliced, SumOfBlockOutputs) {
  TargetMatrix t = gen_gaussian_matrix(8, 6, 12);
  DecomposeConfig cfg;
  cfg.algorithm = Algorithm::sliced;
  cfg.slice_width = 2;
  DecompositionResult s = slice_decompose(t, cfg);
  std::vector<DecompositionResult> parts;
  for (std::size_t first = 0; first < 6; first += 2)
    parts.push_back(fs_decompose(TargetMatrix(8, 2, t.column_block(first, 2)), DecomposeConfig{}));
  std::mt19937_64 rng(4);
  for (int i = 0; i < 100; ++i) {
    Row x = random_x(rng, 6);
    Row expect(8, 0.0);
    for (std::size_t b = 0; b < parts.size(); ++b) {
      Row y = evaluate_dag(parts[b].dag, std::span<const double>(x).subspan(2 * b, 2));
      for (std::size_t n = 0; n < 8; ++n) expect[n] += y[n];
    }
    EXPECT_LE(rel_diff(evaluate_dag(s.dag, x), expect), 1e-12);
  }
}

TEST(Sliced, SixteenBlockTree) {
  TargetMatrix t = gen_gaussian_matrix(64, 64, 8);
  DecomposeConfig cfg;
  cfg.algorithm = Algorithm::sliced;
  cfg.slice_width = 4;
  cfg.target_sqnr_db = 10;
  DecompositionResult s = slice_decompose(t, cfg);

  DecomposeConfig inner;
  inner.target_sqnr_db = 10;
  std::size_t block_adds = 0;
  int block_depth = 0;
  for (std::size_t first = 0; first < 64; first += 4) {
    DecompositionResult p = fs_decompose(TargetMatrix(64, 4, t.column_block(first, 4)), inner);
    block_adds += count_additions(p.dag);
    const DepthTable d = compute_depths(p.dag);
    block_depth = std::max(block_depth, *std::max_element(d.output.begin(), d.output.end()));
  }
  EXPECT_EQ(count_additions(s.dag), block_adds + 64 * 15);
  const DepthTable d = compute_depths(s.dag);
  const int out_depth = *std::max_element(d.output.begin(), d.output.end());
  EXPECT_LE(out_depth, block_depth + 4);
  EXPECT_GE(out_depth, 4);
}
