#include "rci/rci.hpp"
#include "rci/eval.hpp"
#include "rci/sem.hpp"
#include "test_util.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>

using namespace rci;

TEST(ShapleyScores, ElementwiseProducts) {
  LogisticModel m;
  m.delta = Vector(2);
  m.delta << 2, 3;
  Matrix e(1, 2);
  e << 1, -1;
  const auto s = shapley_scores(m, e, {0, 1}, 2);
  EXPECT_EQ(s.scores(0, 0), 2.0);
  EXPECT_EQ(s.scores(0, 1), -3.0);
  EXPECT_EQ(s.sample_ids, std::vector<std::string>{"1"});
}

TEST(ShapleyScores, ZeroDeltaAndUnkeptColumns) {
  LogisticModel m;
  m.delta = Vector::Zero(2);
  const auto s = shapley_scores(m, Matrix::Random(4, 2), {3, 1}, 5);
  EXPECT_TRUE(s.scores.isZero(0.0));
  m.delta << 1, 1;
  const Matrix e = Matrix::Random(4, 2);
  const auto t = shapley_scores(m, e, {3, 1}, 5);
  EXPECT_EQ(t.scores.col(3), e.col(0));
  EXPECT_EQ(t.scores.col(1), e.col(1));
  EXPECT_TRUE(t.scores.col(0).isZero(0.0) && t.scores.col(2).isZero(0.0) && t.scores.col(4).isZero(0.0));
  EXPECT_THROW(shapley_scores(m, Matrix::Random(4, 3), {3, 1}, 5), ParameterError);
}

TEST(ShapleyScores, InverseScalingInvariant) {
  LogisticModel m;
  m.delta = Vector::Random(3);
  const Matrix e = Matrix::Random(5, 3);
  const auto a = shapley_scores(m, e, {0, 1, 2}, 3);
  LogisticModel scaled = m;
  scaled.delta = m.delta / 4.0;
  const auto b = shapley_scores(scaled, e * 4.0, {0, 1, 2}, 3);
  EXPECT_LT((a.scores - b.scores).cwiseAbs().maxCoeff(), 1e-14);
}

TEST(RankRow, Examples) {
  Vector s(3);
  s << 0.5, -0.1, 0.9;
  const auto r = rank_row(s);
  EXPECT_EQ(r.order, (IndexList{2, 0, 1}));
  EXPECT_EQ(r.root_cause_count, 2u);
  const auto z = rank_row(Vector::Zero(4));
  EXPECT_EQ(z.order, (IndexList{0, 1, 2, 3}));
  EXPECT_EQ(z.root_cause_count, 0u);
  EXPECT_EQ(rank_row(Vector::Ones(2)).order, (IndexList{0, 1}));
  Vector bad(2);
  bad << 1.0, std::nan("");
  EXPECT_THROW(rank_row(bad), ParameterError);
}

TEST(RankRow, InvariantUnderPositiveRescaling) {
  for (int t = 0; t < 50; ++t) {
    const Vector s = Vector::Random(7);
    EXPECT_EQ(rank_row(s).order, rank_row((3.5 * s).eval()).order);
  }
}

TEST(RunRci, InSampleEqualsHeldOutPathOnTrainingRows) {
  const auto c = sample_cohort(generate_sem(6, 2.0, 3), 2000, 4);
  for (RciMode mode : {RciMode::Full, RciMode::LocalPlus}) {
    const auto a = run_rci(c.data, c.labels, 0.2, mode);
    const auto b = run_rci(c.data, c.labels, c.data, 0.2, mode);
    EXPECT_EQ(a.shapley.scores, b.shapley.scores);
  }
}

TEST(RunRci, FullModeKeepsEveryVariable) {
  const auto c = sample_cohort(generate_sem(6, 2.0, 5), 2000, 6);
  const auto r = run_rci(c.data, c.labels, 0.2, RciMode::Full);
  EXPECT_EQ(r.extraction.order.size(), 6u);
  EXPECT_EQ(r.model.delta.size(), 6);
}

TEST(RunRci, LocalPlusZeroOutsideKeptSet) {
  for (std::uint64_t s = 0; s < 10; ++s) {
    const auto c = sample_cohort(generate_sem(8, 2.0, s), 3000, s + 1);
    const auto r = run_rci(c.data, c.labels, 0.2, RciMode::LocalPlus);
    for (Eigen::Index i = 0; i < 8; ++i)
      if (std::find(r.extraction.order.begin(), r.extraction.order.end(), std::size_t(i)) == r.extraction.order.end())
        EXPECT_TRUE(r.shapley.scores.col(i).isZero(0.0));
  }
}

TEST(RunRci, EmptyKeptSetWarnsWithZeroScores) {
  // Labels unrelated to every column; with a tiny alpha everything is screened out.
  const auto sem = fixture::fixed_sem(Matrix::Zero(3, 3), Vector::Zero(3), ErrorDist::UniformSym);
  const auto c = sample_cohort(sem, 2000, 8);
  const auto r = run_rci(c.data, c.labels, 1e-9, RciMode::LocalPlus);
  EXPECT_TRUE(r.extraction.order.empty());
  EXPECT_TRUE(r.shapley.empty_kept_warning);
  EXPECT_TRUE(r.shapley.scores.isZero(0.0));
  EXPECT_EQ(r.shapley.scores.cols(), 3);
}

TEST(RunRci, HeldOutScoresTrackTruth) {
  const auto sem = generate_sem(6, 2.0, 21);
  const auto train = sample_cohort(sem, 20000, 22);
  const auto test = sample_cohort(sem, 2000, 23);
  const auto r = run_rci(train.data, train.labels, test.data, 0.2, RciMode::LocalPlus);
  EXPECT_EQ(r.shapley.scores.rows(), 2000);
  EXPECT_LT(mse_scores(r.shapley, true_shapley(sem, test.errors)), 0.02);
}

TEST(RunRci, NonAncestorScoresVanish) {
  double non_anc = 0.0;
  std::size_t count = 0;
  for (std::uint64_t s = 0; s < 10; ++s) {
    const auto sem = generate_sem(10, 2.0, 31 + s);
    const auto c = sample_cohort(sem, 10000, 41 + s);
    const auto r = run_rci(c.data, c.labels, 0.2, RciMode::LocalPlus);
    const auto anc = label_ancestors(sem);
    for (Eigen::Index i = 0; i < 10; ++i)
      if (std::find(anc.begin(), anc.end(), std::size_t(i)) == anc.end()) {
        non_anc += r.shapley.scores.col(i).cwiseAbs().sum();
        count += 10000;
      }
  }
  ASSERT_GT(count, 0u);
  EXPECT_LT(non_anc / double(count), 0.05);
}

TEST(RunRci, RejectsBadInputs) {
  const auto c = sample_cohort(generate_sem(3, 1.0, 1), 100, 2);
  EXPECT_THROW(run_rci(c.data, Labels::Zero(100)), ParameterError);
  EXPECT_THROW(run_rci(c.data, c.labels, Matrix::Zero(5, 4)), ParameterError);
}
