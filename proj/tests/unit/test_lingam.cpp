#include "rci/lingam.hpp"
#include "rci/sem.hpp"
#include "rci/stats.hpp"
#include "test_util.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>

using namespace rci;

namespace {

Matrix standardized_cohort(const GroundTruthSem& sem, std::size_t n, std::uint64_t seed, SampledCohort* out = nullptr) {
  SampledCohort c = sample_cohort(sem, n, seed);
  Matrix z = standardize(c.data).data;
  if (out) *out = std::move(c);
  return z;
}

IndexList all_indices(std::size_t p) {
  IndexList u(p);
  for (std::size_t i = 0; i < p; ++i) u[i] = i;
  return u;
}

}  // namespace

// Standardization ------------------------------------------------------------

TEST(Standardize, HandComputedColumn) {
  Matrix x(3, 1);
  x << 1, 2, 3;
  const auto s = standardize(x);
  const double v = std::sqrt(1.5);
  EXPECT_NEAR(s.data(0, 0), -v, 1e-15);
  EXPECT_NEAR(s.data(1, 0), 0.0, 1e-15);
  EXPECT_NEAR(s.data(2, 0), v, 1e-15);
  EXPECT_NEAR(s.params.means[0], 2.0, 1e-15);
  EXPECT_NEAR(s.params.stddevs[0], std::sqrt(2.0 / 3.0), 1e-15);
}

TEST(Standardize, IdempotentAndUnitMoments) {
  const auto c = sample_cohort(generate_sem(5, 2.0, 1), 1000, 2);
  const auto once = standardize(c.data);
  for (Eigen::Index j = 0; j < 5; ++j) {
    EXPECT_NEAR(once.data.col(j).mean(), 0.0, 1e-12);
    EXPECT_NEAR(stats::variance(once.data.col(j)), 1.0, 1e-12);
  }
  const auto twice = standardize(once.data);
  EXPECT_LT((twice.data - once.data).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(Standardize, ConstantColumnIsDegenerate) {
  Matrix x(4, 2);
  x << 1, 5, 2, 5, 3, 5, 4, 5;
  try {
    standardize(x);
    FAIL() << "expected DegenerateInputError";
  } catch (const DegenerateInputError& e) {
    EXPECT_NE(std::string(e.what()).find("column 2"), std::string::npos);
  }
}

TEST(ApplyStandardize, IdentityParamsAndReuse) {
  Matrix x = Matrix::Random(5, 3);
  StandardizationParams id{Vector::Zero(3), Vector::Ones(3)};
  EXPECT_EQ(apply_standardize(x, id), x);
  const auto s = standardize(x);
  EXPECT_EQ(apply_standardize(x, s.params), s.data);
  const Matrix row = apply_standardize(x.topRows(1), s.params);
  EXPECT_TRUE(row.allFinite());
  EXPECT_EQ(row, s.data.topRows(1));
  EXPECT_THROW(apply_standardize(Matrix::Zero(2, 4), s.params), ParameterError);
}

// Entropy --------------------------------------------------------------------

TEST(ApproxEntropy, GaussianReachesBound) {
  const Vector y = fixture::standardized(fixture::normal_vector(1000000, 7));
  EXPECT_NEAR(approx_entropy(y), 1.41894, 1e-3);
  EXPECT_NEAR(entropy_constants::gaussian_entropy, 1.4189385332046727, 1e-15);
}

TEST(ApproxEntropy, UniformStrictlyBelowGaussian) {
  const auto sem = fixture::fixed_sem(Matrix::Zero(1, 1), Vector::Ones(1), ErrorDist::UniformSym);
  const Vector y = fixture::standardized(sample_cohort(sem, 1000000, 3).errors.col(0));
  EXPECT_LT(approx_entropy(y), 1.41894 - 1e-3);
}

TEST(ApproxEntropy, NeverExceedsGaussianEntropy) {
  for (std::uint64_t s = 0; s < 200; ++s) {
    Vector y = fixture::normal_vector(200, s);
    if (s % 3 == 1) y = y.array().cube();
    if (s % 3 == 2) y = y.array().exp();
    EXPECT_LE(approx_entropy(fixture::standardized(y)), entropy_constants::gaussian_entropy);
  }
  EXPECT_THROW(approx_entropy(Vector()), ParameterError);
}

// Residuals and the pairwise measure -----------------------------------------

TEST(Residualize, HandExamples) {
  Vector xi(3), xj(3);
  xi << 1, 2, 3;
  xj << 1, 0, -1;
  EXPECT_LT(residualize(xi, xj).cwiseAbs().maxCoeff(), 1e-15);
  const Vector a = fixture::normal_vector(100, 1);
  EXPECT_LT(residualize((3.0 * a).eval(), a).cwiseAbs().maxCoeff(), 1e-12);
  EXPECT_THROW(residualize(a, Vector::Constant(100, 2.0)), DegenerateInputError);
}

TEST(Residualize, OrthogonalToRegressor) {
  for (std::uint64_t s = 0; s < 50; ++s) {
    const Vector a = fixture::normal_vector(500, s);
    const Vector b = (fixture::normal_vector(500, s + 1000).array() + 0.7 * a.array()).matrix();
    EXPECT_LT(std::fabs(stats::covariance(residualize(a, b), b)), 1e-10);
  }
}

TEST(PairwiseMeasure, Antisymmetric) {
  for (std::uint64_t s = 0; s < 100; ++s) {
    const auto c = standardized_cohort(generate_sem(4, 2.0, s), 300, s + 50);
    for (Eigen::Index i = 0; i < 4; ++i)
      for (Eigen::Index j = i + 1; j < 4; ++j)
        EXPECT_LT(std::fabs(pairwise_measure(c.col(i), c.col(j)) + pairwise_measure(c.col(j), c.col(i))), 1e-10);
  }
}

TEST(PairwiseMeasure, CausePositiveOverEffect) {
  const auto sem = fixture::chain_sem(2, 0.8, ErrorDist::UniformSym);
  const Matrix z = standardized_cohort(sem, 100000, 21);
  EXPECT_GT(pairwise_measure(z.col(0), z.col(1)), 0.0);
}

TEST(PairwiseMeasure, IdenticalInputsDegenerate) {
  const Vector a = fixture::standardized(fixture::normal_vector(100, 1));
  EXPECT_THROW(pairwise_measure(a, a), DegenerateInputError);
}

// Root search ----------------------------------------------------------------

TEST(FindRoot, SingletonNeedsNoEvaluations) {
  const Matrix z = standardized_cohort(generate_sem(3, 1.0, 1), 50, 2);
  for (RootFinder f : {RootFinder::Plain, RootFinder::Plus}) {
    const auto r = find_root(z, {2}, f);
    EXPECT_EQ(r.root, 2u);
    EXPECT_EQ(r.evaluations, 0u);
  }
}

TEST(FindRoot, ValidatesActiveSet) {
  const Matrix z = standardized_cohort(generate_sem(3, 1.0, 1), 50, 2);
  EXPECT_THROW(find_root(z, {}), ParameterError);
  EXPECT_THROW(find_root(z, {1, 0}), ParameterError);
  EXPECT_THROW(find_root_plus(z, {0, 3}), ParameterError);
}

TEST(FindRoot, ChainRootRecovered) {
  const auto sem = fixture::chain_sem(3, 0.8, ErrorDist::UniformSym);
  int hits = 0;
  for (std::uint64_t r = 0; r < 100; ++r) {
    const Matrix z = standardized_cohort(sem, 100000, derive_seed(3, r, StreamPurpose::Sample));
    hits += find_root(z, all_indices(3)).root == 0;
  }
  EXPECT_GE(hits, 99);
}

TEST(FindRoot, PairRootRecovered) {
  const auto sem = fixture::chain_sem(2, 0.8, ErrorDist::UniformSym);
  const Matrix z = standardized_cohort(sem, 100000, 4);
  EXPECT_EQ(find_root(z, {0, 1}).root, 0u);
  EXPECT_EQ(find_root_plus(z, {0, 1}).root, 0u);
}

TEST(FindRootPlus, MatchesExhaustiveSearch) {
  Engine pick = make_engine(77);
  std::uniform_int_distribution<std::size_t> pdist(3, 10);
  for (std::uint64_t s = 0; s < 300; ++s) {
    const std::size_t p = pdist(pick);
    const Matrix z = standardized_cohort(generate_sem(p, std::min(2.0, double(p - 1)), s), 500, s + 7);
    const IndexList u = all_indices(p);
    const auto plain = find_root(z, u);
    const auto plus = find_root_plus(z, u);
    EXPECT_EQ(plain.root, plus.root) << "seed " << s;
    EXPECT_EQ(plain.evaluations, p * (p - 1) / 2);
    EXPECT_LE(plus.evaluations, plain.evaluations);
  }
}

TEST(FindRootPlus, MatchesOnSubsetsAndTies) {
  // Independent Gaussian-free columns on a subset, and exact duplicates of a
  // column's distribution (tie pressure through equal scores is covered by
  // the all-zero start).
  const Matrix z = standardized_cohort(generate_sem(8, 3.0, 5), 400, 6);
  const IndexList u{1, 3, 4, 6, 7};
  EXPECT_EQ(find_root(z, u).root, find_root_plus(z, u).root);
  EXPECT_EQ(find_root(z, {2, 5}).root, find_root_plus(z, {2, 5}).root);
}

// Independence screen ---------------------------------------------------------

TEST(IndependencePvalue, UniformUnderNull) {
  const int reps = 1000;
  std::vector<double> ps;
  for (int r = 0; r < reps; ++r) {
    const Vector x = fixture::normal_vector(10000, 10000 + r);
    const Labels d = fixture::coin_labels(10000, 20000 + r);
    ps.push_back(independence_pvalue(x, d));
  }
  std::sort(ps.begin(), ps.end());
  double ks = 0.0;
  for (int i = 0; i < reps; ++i)
    ks = std::max({ks, std::fabs(ps[i] - double(i) / reps), std::fabs(ps[i] - double(i + 1) / reps)});
  EXPECT_LT(ks, 0.05);
}

TEST(IndependencePvalue, StrongDependence) {
  const Labels d = fixture::coin_labels(10000, 1);
  const Vector x = d.cast<double>() + 0.1 * fixture::normal_vector(10000, 2);
  EXPECT_LT(independence_pvalue(x, d), 1e-6);
  EXPECT_THROW(independence_pvalue(x, Labels::Ones(10000)), ParameterError);
}

// Extraction ------------------------------------------------------------------

TEST(DirectLingam, SingleVariable) {
  Matrix x(4, 1);
  x << 1, 3, 2, 6;
  const auto ex = direct_lingam(x);
  EXPECT_EQ(ex.order, IndexList{0});
  EXPECT_EQ(ex.errors, standardize(x).data);
}

TEST(DirectLingam, TwoVariableErrorsRecovered) {
  const auto sem = fixture::chain_sem(2, 0.8, ErrorDist::UniformSym);
  const auto c = sample_cohort(sem, 100000, 31);
  for (RootFinder f : {RootFinder::Plain, RootFinder::Plus}) {
    const auto ex = direct_lingam(c.data, f);
    ASSERT_EQ(ex.order, (IndexList{0, 1}));
    EXPECT_GT(stats::correlation(ex.errors.col(1), c.errors.col(1)), 0.99);
  }
}

TEST(DirectLingam, ErrorsMutuallyUncorrelated) {
  const auto c = sample_cohort(generate_sem(5, 2.0, 41), 100000, 42);
  const auto ex = direct_lingam(c.data);
  for (Eigen::Index i = 0; i < 5; ++i)
    for (Eigen::Index j = i + 1; j < 5; ++j)
      EXPECT_LT(std::fabs(stats::correlation(ex.errors.col(i), ex.errors.col(j))), 0.05);
}

TEST(DirectLingam, OrderConsistentWithGraph) {
  int ok = 0;
  for (std::uint64_t r = 0; r < 100; ++r) {
    const std::size_t p = 3 + r % 8;
    const auto sem = generate_sem(p, std::min(2.0, double(p - 1)), derive_seed(51, r, StreamPurpose::Structure));
    const auto c = sample_cohort(sem, 10000, derive_seed(51, r, StreamPurpose::Sample));
    ok += fixture::consistent_with(sem.theta, direct_lingam(c.data).order);
  }
  EXPECT_GE(ok, 95);
}

TEST(DirectLingam, PlainAndPlusAgree) {
  for (std::uint64_t s = 0; s < 30; ++s) {
    const auto c = sample_cohort(generate_sem(7, 2.0, s), 500, s + 3);
    const auto a = direct_lingam(c.data, RootFinder::Plain);
    const auto b = direct_lingam(c.data, RootFinder::Plus);
    EXPECT_EQ(a.order, b.order);
    EXPECT_EQ(a.errors, b.errors);
    EXPECT_LE(b.measure_evaluations, a.measure_evaluations);
  }
}

TEST(DirectLingam, CollinearColumnsRejected) {
  Matrix x(100, 2);
  x.col(0) = fixture::normal_vector(100, 1);
  x.col(1) = 2.0 * x.col(0);
  EXPECT_THROW(direct_lingam(x), DegenerateInputError);
}

TEST(Extraction, UnmixingReproducesTrainingErrorsExactly) {
  for (std::uint64_t s = 0; s < 20; ++s) {
    const auto c = sample_cohort(generate_sem(6, 2.0, s), 700, s + 9);
    const auto full = direct_lingam(c.data);
    EXPECT_EQ(apply_extraction(full, c.data), full.errors);
    const auto local = local_plus(c.data, c.labels);
    EXPECT_EQ(apply_extraction(local, c.data), local.errors);
    EXPECT_EQ(standardize(c.data).data * local.kept_unmixing(), local.errors);
  }
}

TEST(Extraction, HeldOutRowsRecoverTrueErrors) {
  const auto sem = generate_sem(6, 2.0, 61);
  const auto train = sample_cohort(sem, 20000, 62);
  const auto fresh = sample_cohort(sem, 10000, 63);
  const auto ex = direct_lingam(train.data);
  const Matrix e = apply_extraction(ex, fresh.data);
  for (std::size_t c = 0; c < ex.order.size(); ++c)
    EXPECT_GT(std::fabs(stats::correlation(e.col(Eigen::Index(c)), fresh.errors.col(Eigen::Index(ex.order[c])))), 0.98);
  const Matrix one = apply_extraction(ex, fresh.data.topRows(1));
  EXPECT_EQ(one.cols(), Eigen::Index(ex.order.size()));
  EXPECT_TRUE(one.allFinite());
  EXPECT_THROW(apply_extraction(ex, Matrix::Zero(2, 5)), ParameterError);
}

TEST(LocalPlus, DropsIsolatedVariable) {
  // X1 -> X2 -> D with X3 unrelated.
  Matrix theta = Matrix::Zero(3, 3);
  theta(0, 1) = 0.8;
  Vector beta = Vector::Zero(3);
  beta[1] = 1.0;
  const auto sem = fixture::fixed_sem(theta, beta, ErrorDist::UniformSym);
  int exact = 0;
  for (std::uint64_t r = 0; r < 100; ++r) {
    const auto c = sample_cohort(sem, 50000, derive_seed(71, r, StreamPurpose::Sample));
    IndexList k = local_plus(c.data, c.labels, 0.2).order;
    std::sort(k.begin(), k.end());
    exact += k == IndexList{0, 1};
  }
  EXPECT_GE(exact, 90);
}

TEST(LocalPlus, IsolatedVariableKeptAtMostAtAlphaRate) {
  Matrix theta = Matrix::Zero(3, 3);
  theta(0, 1) = 0.8;
  Vector beta = Vector::Zero(3);
  beta[1] = 1.0;
  const auto sem = fixture::fixed_sem(theta, beta, ErrorDist::UniformSym);
  const int reps = 200;
  int kept_isolated = 0, kept_ancestors = 0;
  for (int r = 0; r < reps; ++r) {
    const auto c = sample_cohort(sem, 20000, derive_seed(72, std::uint64_t(r), StreamPurpose::Sample));
    const IndexList k = local_plus(c.data, c.labels, 0.2).order;
    kept_isolated += std::find(k.begin(), k.end(), 2u) != k.end();
    kept_ancestors += std::find(k.begin(), k.end(), 0u) != k.end() && std::find(k.begin(), k.end(), 1u) != k.end();
  }
  EXPECT_EQ(kept_ancestors, reps);
  EXPECT_LE(kept_isolated, 0.2 * reps + 3 * std::sqrt(reps * 0.2 * 0.8));
}

TEST(LocalPlus, NullLabelsUsuallyKeepNothing) {
  const auto sem = fixture::fixed_sem(Matrix::Zero(4, 4), Vector::Zero(4), ErrorDist::StudentT5);
  int empty = 0;
  for (std::uint64_t r = 0; r < 200; ++r) {
    const auto c = sample_cohort(sem, 2000, derive_seed(81, r, StreamPurpose::Sample));
    empty += local_plus(c.data, c.labels, 0.2).order.empty();
  }
  // P(all four screened out at the first iteration) = 0.8^4 ~ 0.41.
  EXPECT_GE(empty, 200 * std::pow(0.8, 4) - 3 * std::sqrt(200 * 0.41 * 0.59));
}

TEST(LocalPlus, KeptErrorsMatchFullExtraction) {
  const auto sem = fixture::chain_sem(4, 0.7, ErrorDist::ChiSq3);
  const auto c = sample_cohort(sem, 100000, 91);
  const auto full = direct_lingam(c.data);
  const auto local = local_plus(c.data, c.labels);
  ASSERT_FALSE(local.order.empty());
  for (std::size_t k = 0; k < local.order.size(); ++k) {
    const auto pos = std::find(full.order.begin(), full.order.end(), local.order[k]) - full.order.begin();
    EXPECT_GT(std::fabs(stats::correlation(local.errors.col(Eigen::Index(k)), full.errors.col(pos))), 0.99);
  }
  EXPECT_LE(local.measure_evaluations, full.measure_evaluations);
}

TEST(LocalPlus, NeverMoreEvaluationsThanFull) {
  for (std::uint64_t s = 0; s < 30; ++s) {
    const auto c = sample_cohort(generate_sem(8, 2.0, s), 1000, s + 1);
    EXPECT_LE(local_plus(c.data, c.labels).measure_evaluations, direct_lingam(c.data).measure_evaluations);
    EXPECT_LE(extract(c.data, c.labels, ExtractionVariant::Local).measure_evaluations,
              extract(c.data, c.labels, ExtractionVariant::Original).measure_evaluations);
  }
}

TEST(LocalPlus, RejectsBadInputs) {
  const auto c = sample_cohort(generate_sem(3, 1.0, 1), 100, 2);
  EXPECT_THROW(local_plus(c.data, Labels::Zero(100)), ParameterError);
  EXPECT_THROW(local_plus(c.data, c.labels, 0.0), ParameterError);
  EXPECT_THROW(local_plus(c.data, c.labels.head(50)), ParameterError);
}
