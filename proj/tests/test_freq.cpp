// Copyright the phred authors.
// SPDX-License-Identifier: Apache-2.0

#include <algorithm>
#include <cmath>
#include <map>
#include <memory>
#include <random>
#include <gtest/gtest.h>
#include "phred/freq.hpp"
#include "phred/msd.hpp"
#include "test_util.hpp"

namespace phred
{
namespace
{

PHSystem FirstOrder(double gain)
{
  // H(s) = gain / (s + 1)
  Eigen::MatrixXd one = Eigen::MatrixXd::Ones(1, 1);
  return PHSystem(Eigen::MatrixXd::Zero(1, 1), one, one, std::sqrt(gain) * one);
}

TEST(LogSpace, EndpointsAndRatio)
{
  const auto w = LogSpace(1e-2, 1e2, 5);
  ASSERT_EQ(w.size(), 5u);
  EXPECT_DOUBLE_EQ(w.front(), 1e-2);
  EXPECT_DOUBLE_EQ(w.back(), 1e2);
  EXPECT_NEAR(w[2], 1.0, 1e-14);
  EXPECT_THROW(LogSpace(0.0, 1.0, 3), DomainError);
  EXPECT_THROW(LogSpace(1.0, 1.0, 3), DomainError);
}

TEST(ErrorAt, IdenticalModelsGiveZero)
{
  std::mt19937_64 rng(1);
  const PHSystem sys = Assemble(test::RandomDefiniteTheta(rng, 5, 2));
  auto fom = std::make_shared<FomResponse>(sys);
  const ErrorFunction e(fom, sys);
  for (double w : {1e-3, 0.7, 12.0})
  {
    EXPECT_LE(ErrorAt(e, w), 1e-12);
  }
}

TEST(ErrorAt, ScalarClosedForm)
{
  auto fom = std::make_shared<FomResponse>(FirstOrder(1.0));
  const ErrorFunction e(fom, FirstOrder(2.0));
  EXPECT_NEAR(ErrorAt(e, 1.0), 1.0 / std::sqrt(2.0), 1e-14);
  EXPECT_THROW(e(0.0), DomainError);
}

TEST(ErrorAt, MatchesFullSvd)
{
  std::mt19937_64 rng(2);
  const PHSystem a = Assemble(test::RandomDefiniteTheta(rng, 6, 2));
  const PHSystem b = Assemble(test::RandomDefiniteTheta(rng, 3, 2));
  auto fom = std::make_shared<FomResponse>(a);
  const ErrorFunction e(fom, b);
  for (double w : LogSpace(1e-2, 1e2, 15))
  {
    const Eigen::MatrixXcd E =
      test::TransferByInverse(a, Complex(0, w)) - test::TransferByInverse(b, Complex(0, w));
    Eigen::BDCSVD<Eigen::MatrixXcd> svd(E);
    EXPECT_NEAR(e(w), svd.singularValues()(0), 1e-11 * (1 + svd.singularValues()(0)));
  }
}

TEST(ErrorAt, RepeatedEvaluationIsBitIdentical)
{
  std::mt19937_64 rng(3);
  auto fom = std::make_shared<FomResponse>(Assemble(test::RandomDefiniteTheta(rng, 7, 2)));
  const ErrorFunction e(fom, Assemble(test::RandomDefiniteTheta(rng, 2, 2)));
  const double first = e(0.37);
  EXPECT_EQ(fom->CacheSize(), 1u);
  EXPECT_EQ(e(0.37), first);
  EXPECT_EQ(fom->CacheSize(), 1u);
}

TEST(FomResponse, TableLookupAndMiss)
{
  std::map<double, Eigen::MatrixXcd> table;
  table[1.0] = Eigen::MatrixXcd::Constant(1, 1, Complex(2, 0));
  FomResponse fom(1, table);
  EXPECT_EQ(fom(1.0)(0, 0), Complex(2, 0));
  EXPECT_THROW(fom(2.0), EvaluationError);
}

TEST(EstimateHinf, MonotoneDecayPeaksAtLowerEnd)
{
  auto fom = std::make_shared<FomResponse>(FirstOrder(1.0));
  const HinfEstimate h = EstimateHinf(ErrorFunction(fom), 1e-4, 1e4, 400);
  EXPECT_NEAR(h.value, 1.0, 1e-3);
  EXPECT_LT(h.omega, 1e-3);
}

TEST(EstimateHinf, IdenticalModelsGiveZero)
{
  std::mt19937_64 rng(4);
  const PHSystem sys = Assemble(test::RandomDefiniteTheta(rng, 4, 1));
  auto fom = std::make_shared<FomResponse>(sys);
  EXPECT_LE(EstimateHinf(ErrorFunction(fom, sys), 1e-3, 1e3, 200).value, 1e-12);
}

TEST(EstimateHinf, BenchmarkAgainstDenseGrid)
{
  auto fom = std::make_shared<FomResponse>(MassSpringDamperChain({}));
  const ErrorFunction e(fom);
  const HinfEstimate h = EstimateHinf(e, 1e-8, 1e5, 2000);

  // Dense oracle on the decades that contain the resonances.
  double dense = 0.0;
  for (double w : LogSpace(1e-8, 1e5, 100000))
  {
    if (w > 1e-3 && w < 1e2)
    {
      dense = std::max(dense, e(w));
    }
  }
  EXPECT_NEAR(h.value, dense, 1e-3 * dense);

  // Never below the coarse grid maximum.
  double coarse = 0.0;
  for (double w : LogSpace(1e-8, 1e5, 2000))
  {
    coarse = std::max(coarse, e(w));
  }
  EXPECT_GE(h.value, coarse);
}

TEST(ErrorAt, ConjugateSymmetry)
{
  std::mt19937_64 rng(5);
  const PHSystem a = Assemble(test::RandomDefiniteTheta(rng, 5, 2));
  const PHSystem b = Assemble(test::RandomDefiniteTheta(rng, 2, 2));
  for (double w : {0.1, 1.0, 10.0})
  {
    const Eigen::MatrixXcd Ep = TransferEval(a, Complex(0, w)) - TransferEval(b, Complex(0, w));
    const Eigen::MatrixXcd Em = TransferEval(a, Complex(0, -w)) - TransferEval(b, Complex(0, -w));
    EXPECT_NEAR(SigmaMax(Ep), SigmaMax(Em), 1e-12 * (1 + SigmaMax(Ep)));
  }
}

}  // namespace
}  // namespace phred
