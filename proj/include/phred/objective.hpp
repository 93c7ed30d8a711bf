// Copyright the phred authors.
// SPDX-License-Identifier: Apache-2.0

#ifndef PHRED_OBJECTIVE_HPP
#define PHRED_OBJECTIVE_HPP

#include <cstddef>
#include <memory>
#include <utility>
#include <vector>
#include <Eigen/Dense>
#include <Eigen/SVD>
#include "phred/errors.hpp"
#include "phred/freq.hpp"
#include "phred/parallel.hpp"
#include "phred/ph_system.hpp"
#include "phred/resolvent.hpp"
#include "phred/sampling.hpp"

namespace phred
{

//
// Data of the level-set loss: the level gamma, the sample set and the full-order responses
// at every sample, plus the reduced dimensions.
//
class LossContext
{
public:
  LossContext(const FomResponse &fom, SampleSet samples, double gamma, Eigen::Index n_rom)
    : samples_(std::move(samples)), gamma_(gamma), n_rom_(n_rom), m_(fom.m())
  {
    fom.Prefetch(samples_.omegas());
    auto values = std::make_shared<std::vector<Eigen::MatrixXcd>>();
    values->reserve(samples_.size());
    for (double w : samples_)
    {
      values->push_back(fom(w));
    }
    fom_values_ = std::move(values);
    Check();
  }

  LossContext(SampleSet samples, std::vector<Eigen::MatrixXcd> fom_values, double gamma,
              Eigen::Index n_rom)
    : samples_(std::move(samples)), gamma_(gamma), n_rom_(n_rom),
      m_(fom_values.empty() ? 0 : fom_values.front().rows()),
      fom_values_(std::make_shared<std::vector<Eigen::MatrixXcd>>(std::move(fom_values)))
  {
    Check();
  }

  LossContext WithGamma(double gamma) const
  {
    LossContext ctx(*this);
    ctx.gamma_ = gamma;
    ctx.Check();
    return ctx;
  }

  double gamma() const { return gamma_; }
  const SampleSet &samples() const { return samples_; }
  const std::vector<Eigen::MatrixXcd> &fom_values() const { return *fom_values_; }
  Eigen::Index n_rom() const { return n_rom_; }
  Eigen::Index m() const { return m_; }

private:
  void Check() const
  {
    if (!(gamma_ > 0.0))
    {
      throw DomainError("LossContext: gamma must be positive");
    }
    if (fom_values_->size() != samples_.size())
    {
      throw DimensionError("LossContext: one FOM response per sample required");
    }
    for (const auto &H : *fom_values_)
    {
      if (H.rows() != m_ || H.cols() != m_)
      {
        throw DimensionError("LossContext: FOM responses must be m x m");
      }
    }
  }

  SampleSet samples_;
  double gamma_;
  Eigen::Index n_rom_, m_;
  std::shared_ptr<const std::vector<Eigen::MatrixXcd>> fom_values_;
};

struct LossEvaluation
{
  double loss = 0.0;
  Eigen::VectorXd gradient;       // empty unless requested
  double max_error = 0.0;         // max over samples of the error norm
  std::size_t active = 0;         // samples with error > gamma
  std::size_t nonsmooth = 0;      // active samples with a repeated top singular value
};

namespace detail
{

struct SampleTerm
{
  double excess = 0.0;  // (sigma_1 - gamma)_+
  double sigma = 0.0;
  bool nonsmooth = false;
  Eigen::VectorXcd xv, z, u, v;  // Hessenberg-coordinate adjoint data, active samples only
};

inline void CheckTheta(const LossContext &ctx, const ThetaVector &theta)
{
  if (theta.n() != ctx.n_rom() || theta.m() != ctx.m())
  {
    throw DimensionError("loss: theta dimensions do not match the loss context");
  }
}

}  // namespace detail

//
// L = (1/gamma) sum_i ((||H(i w_i) - Hr(i w_i, theta)||_2 - gamma)_+)^2 and, on request, its
// gradient with respect to theta.
//
// With E_i = H - Hr and top singular pair (u, v), d sigma_1 = -Re(u^H dHr v). The derivative of
// Hr = B^T Q (sI - (J-R)Q)^{-1} B is pulled back to (J, R, Q, B) by one forward and one
// adjoint resolvent solve per active sample, then to theta through the factorized
// parameterization. Per-sample terms are reduced in sample order.
//
inline LossEvaluation EvaluateLoss(const LossContext &ctx, const ThetaVector &theta,
                                   bool with_gradient)
{
  detail::CheckTheta(ctx, theta);
  const PHSystem sys = Assemble(theta);
  const ResolventSolver rs(sys);
  const auto n = sys.n();
  const auto m = sys.m();
  const double gamma = ctx.gamma();
  const auto &omegas = ctx.samples().omegas();
  const Eigen::MatrixXcd Bh = rs.Bh().cast<Complex>();
  const Eigen::MatrixXcd Ch = rs.Ch().cast<Complex>();
  const Eigen::MatrixXcd ChT = Ch.transpose();

  std::vector<detail::SampleTerm> terms(omegas.size());
  ParallelFor(
    omegas.size(),
    [&](std::size_t i) {
      const HessenbergLU lu = rs.Factor(omegas[i]);
      const Eigen::MatrixXcd Xh = lu.Solve(Bh);
      const Eigen::MatrixXcd E = ctx.fom_values()[i] - Ch * Xh;
      auto &t = terms[i];
      if (!with_gradient)
      {
        t.sigma = SigmaMax(E);
        t.excess = std::max(t.sigma - gamma, 0.0);
        return;
      }
      Eigen::JacobiSVD<Eigen::MatrixXcd> svd(E, Eigen::ComputeFullU | Eigen::ComputeFullV);
      const auto &sv = svd.singularValues();
      t.sigma = sv(0);
      t.excess = std::max(t.sigma - gamma, 0.0);
      if (t.excess > 0.0)
      {
        t.nonsmooth = sv.size() > 1 && sv(0) - sv(1) <= 1e-10 * sv(0);
        t.u = svd.matrixU().col(0);
        t.v = svd.matrixV().col(0);
        t.xv = Xh * t.v;
        t.z = lu.AdjointSolve(ChT * t.u);
      }
    },
    16);

  LossEvaluation out;
  for (const auto &t : terms)
  {
    out.loss += t.excess * t.excess;
    out.max_error = std::max(out.max_error, t.sigma);
    if (t.excess > 0.0)
    {
      out.active++;
      out.nonsmooth += t.nonsmooth ? 1 : 0;
    }
  }
  out.loss /= gamma;
  if (!with_gradient)
  {
    return out;
  }

  // Accumulated (Hessenberg coordinates, real parts) with weight c_i = 2 (sigma_i - gamma)/gamma:
  //   Sxw = sum c Re(X v u^H),  Sy = sum c Re(z v^H),  P = sum c Re(X v z^H).
  Eigen::MatrixXd Sxw = Eigen::MatrixXd::Zero(n, m);
  Eigen::MatrixXd Sy = Eigen::MatrixXd::Zero(n, m);
  Eigen::MatrixXd P = Eigen::MatrixXd::Zero(n, n);
  for (const auto &t : terms)
  {
    if (t.excess <= 0.0)
    {
      continue;
    }
    const double c = 2.0 * t.excess / gamma;
    Sxw.noalias() += c * (t.xv * t.u.adjoint()).real();
    Sy.noalias() += c * (t.z * t.v.adjoint()).real();
    P.noalias() += c * (t.xv * t.z.adjoint()).real();
  }
  const Eigen::MatrixXd &U = rs.U();
  Sxw = U * Sxw;
  Sy = U * Sy;
  P = U * P * U.transpose();

  const Eigen::MatrixXd Amat = sys.J() - sys.R();
  const Eigen::MatrixXd gB = -(sys.Q() * Sxw + Sy);
  const Eigen::MatrixXd gQ = -(sys.B() * Sxw.transpose() + Amat.transpose() * P.transpose());
  const Eigen::MatrixXd gA = -(P.transpose() * sys.Q());
  const Eigen::MatrixXd &gJ = gA;
  const Eigen::MatrixXd gR = -gA;

  const Eigen::MatrixXd UR = VecToUpper(theta.ThetaR(), n);
  const Eigen::MatrixXd UQ = VecToUpper(theta.ThetaQ(), n);

  out.gradient.resize(theta.size());
  out.gradient.segment(theta.OffsetJ(), n * (n - 1) / 2) =
    StrictUpperToVec(gJ.transpose() - gJ);
  out.gradient.segment(theta.OffsetR(), n * (n + 1) / 2) =
    UpperToVec(UR * (gR + gR.transpose()));
  out.gradient.segment(theta.OffsetQ(), n * (n + 1) / 2) =
    UpperToVec(UQ * (gQ + gQ.transpose()));
  out.gradient.segment(theta.OffsetB(), n * m) = FullToVec(gB);
  return out;
}

inline double Loss(const LossContext &ctx, const ThetaVector &theta)
{
  return EvaluateLoss(ctx, theta, false).loss;
}

inline Eigen::VectorXd LossGradient(const LossContext &ctx, const ThetaVector &theta)
{
  return EvaluateLoss(ctx, theta, true).gradient;
}

// Largest error norm over the samples of ctx at theta.
inline double MaxSampleError(const LossContext &ctx, const ThetaVector &theta)
{
  return EvaluateLoss(ctx, theta, false).max_error;
}

}  // namespace phred

#endif  // PHRED_OBJECTIVE_HPP
