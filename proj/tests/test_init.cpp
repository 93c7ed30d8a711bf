// Copyright the phred authors.
// SPDX-License-Identifier: Apache-2.0

#include <cmath>
#include <memory>
#include <random>
#include <gtest/gtest.h>
#include "phred/init.hpp"
#include "phred/msd.hpp"
#include "test_util.hpp"

namespace phred
{
namespace
{

void ExpectPHStructure(const PHSystem &sys)
{
  EXPECT_LE((sys.J() + sys.J().transpose()).cwiseAbs().maxCoeff(), kSkewTol);
  for (const Eigen::MatrixXd *M : {&sys.R(), &sys.Q()})
  {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(*M);
    EXPECT_GE(es.eigenvalues().minCoeff(), -1e-10 * (1 + es.eigenvalues().cwiseAbs().maxCoeff()));
  }
}

TEST(ProjectPH, StructureAndNormalization)
{
  std::mt19937_64 rng(1);
  for (int t = 0; t < 20; t++)
  {
    const PHSystem fom = Assemble(test::RandomDefiniteTheta(rng, 9, 2));
    Eigen::MatrixXd V = Eigen::MatrixXd::NullaryExpr(9, 4, [&] {
      return std::normal_distribution<double>()(rng);
    });
    const PHSystem rom = ProjectPH(fom, V);
    ExpectPHStructure(rom);
    // W^T V = I with W = Q V (V^T Q V)^{-1}.
    const Eigen::MatrixXd W = fom.Q() * V * (V.transpose() * fom.Q() * V).inverse();
    EXPECT_LE((W.transpose() * V - Eigen::MatrixXd::Identity(4, 4)).cwiseAbs().maxCoeff(), 1e-10);
  }
}

TEST(ProjectPH, SingularGramThrows)
{
  const PHSystem fom = MassSpringDamperChain({.n_masses = 3, .m_inputs = 1});
  Eigen::MatrixXd V = Eigen::MatrixXd::Zero(6, 2);
  V(0, 0) = V(0, 1) = 1.0;
  EXPECT_THROW(ProjectPH(fom, V), RankDeficiencyError);
}

TEST(GreedyInit, TangentialInterpolation)
{
  std::mt19937_64 rng(2);
  for (int t = 0; t < 5; t++)
  {
    const PHSystem fom = Assemble(test::RandomDefiniteTheta(rng, 8, 2));
    const InitResult init = GreedyInit(fom, nullptr, 6, {1e-3, 1e3, 400});
    ASSERT_EQ(init.points.size(), 3u);
    for (std::size_t k = 0; k < init.points.size(); k++)
    {
      const Complex s(0, init.points[k]);
      const Eigen::VectorXcd Hb = TransferEval(fom, s) * init.directions[k];
      const Eigen::VectorXcd Hrb = TransferEval(init.rom, s) * init.directions[k];
      EXPECT_LE((Hb - Hrb).norm(), 1e-8 * Hb.norm());
    }
  }
}

TEST(GreedyInit, FullOrderReproducesSystem)
{
  std::mt19937_64 rng(3);
  const PHSystem fom = Assemble(test::RandomDefiniteTheta(rng, 4, 1));
  const InitResult init = GreedyInit(fom, nullptr, 4, {1e-3, 1e3, 400});
  for (double w : {0.01, 0.3, 5.0})
  {
    const Complex s(0, w);
    EXPECT_LE(test::RelativeDeviation(TransferEval(init.rom, s), TransferEval(fom, s)), 1e-8);
  }
}

TEST(GreedyInit, FirstPointAtPeakOfFom)
{
  const PHSystem fom = MassSpringDamperChain({.n_masses = 5, .m_inputs = 1});
  auto response = std::make_shared<FomResponse>(fom);
  const InitResult init = GreedyInit(fom, response, 2, {1e-4, 1e2, 500});
  const HinfEstimate peak = EstimateHinf(ErrorFunction(response), 1e-4, 1e2, 500);
  EXPECT_DOUBLE_EQ(init.points[0], peak.omega);
}

TEST(GreedyInit, BenchmarkModelsAreStablePH)
{
  const PHSystem fom = MassSpringDamperChain({});
  auto response = std::make_shared<FomResponse>(fom);
  for (Eigen::Index r = 4; r <= 20; r += 4)
  {
    const InitResult init = GreedyInit(fom, response, r);
    ASSERT_EQ(init.rom.n(), r);
    ExpectPHStructure(init.rom);
    Eigen::EigenSolver<Eigen::MatrixXd> es(init.rom.A());
    EXPECT_LE(es.eigenvalues().real().maxCoeff(), 1e-10);

    const ThetaVector theta = ThetaFromInit(init.rom);
    const PHSystem back = Assemble(theta);
    std::mt19937_64 rng(r);
    std::uniform_real_distribution<double> lw(-3, 2);
    for (int k = 0; k < 20; k++)
    {
      const Complex s(0, std::pow(10.0, lw(rng)));
      EXPECT_LE(test::RelativeDeviation(TransferEval(back, s), TransferEval(init.rom, s)), 1e-8);
    }
  }
}

TEST(GreedyInit, RejectsBadOrder)
{
  const PHSystem fom = MassSpringDamperChain({.n_masses = 3, .m_inputs = 1});
  EXPECT_THROW(GreedyInit(fom, nullptr, 3), DomainError);
  EXPECT_THROW(GreedyInit(fom, nullptr, 0), DomainError);
  EXPECT_THROW(GreedyInit(fom, nullptr, 8), DomainError);
}

TEST(ThetaFromInit, ZeroDissipationGivesZeroBlock)
{
  Eigen::MatrixXd J(2, 2);
  J << 0, -1, 1, 0;
  const PHSystem rom(J, Eigen::MatrixXd::Zero(2, 2), Eigen::MatrixXd::Identity(2, 2),
                     Eigen::MatrixXd::Ones(2, 1));
  const ThetaVector theta = ThetaFromInit(rom);
  EXPECT_EQ(theta.ThetaR().cwiseAbs().maxCoeff(), 0.0);
}

}  // namespace
}  // namespace phred
