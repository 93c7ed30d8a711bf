// Copyright the phred authors.
// SPDX-License-Identifier: Apache-2.0

#ifndef PHRED_INIT_HPP
#define PHRED_INIT_HPP

#include <cmath>
#include <memory>
#include <optional>
#include <string>
#include <vector>
#include <Eigen/Dense>
#include <Eigen/QR>
#include "phred/errors.hpp"
#include "phred/freq.hpp"
#include "phred/ph_system.hpp"
#include "phred/resolvent.hpp"

namespace phred
{

struct InitOptions
{
  double omega_lo = 1e-8;
  double omega_hi = 1e5;
  std::size_t n_grid = 2000;
};

struct InitResult
{
  PHSystem rom;
  std::vector<double> points;                // interpolation frequencies (points +- i w)
  std::vector<Eigen::VectorXcd> directions;  // right tangential directions
};

//
// Structure-preserving reduction onto range(V):
//   W = Q V (V^T Q V)^{-1},  J_r = W^T J W,  R_r = W^T R W,  Q_r = V^T Q V,  B_r = W^T B.
// Requires V^T Q V to be positive definite.
//
inline PHSystem ProjectPH(const PHSystem &fom, const Eigen::MatrixXd &V)
{
  const Eigen::MatrixXd QV = fom.Q() * V;
  Eigen::MatrixXd Qr = V.transpose() * QV;
  Qr = 0.5 * (Qr + Qr.transpose()).eval();
  Eigen::LLT<Eigen::MatrixXd> llt(Qr);
  const double qnorm = std::max(1e-300, Qr.diagonal().cwiseAbs().maxCoeff());
  if (llt.info() != Eigen::Success ||
      llt.matrixL().toDenseMatrix().diagonal().minCoeff() <= 1e-7 * std::sqrt(qnorm))
  {
    throw RankDeficiencyError("greedy_init: V^T Q V is numerically singular; try a smaller r");
  }
  const Eigen::MatrixXd W = llt.solve(QV.transpose()).transpose();
  Eigen::MatrixXd Jr = W.transpose() * fom.J() * W;
  Eigen::MatrixXd Rr = W.transpose() * fom.R() * W;
  Jr = 0.5 * (Jr - Jr.transpose()).eval();
  Rr = 0.5 * (Rr + Rr.transpose()).eval();
  return PHSystem(std::move(Jr), std::move(Rr), std::move(Qr), W.transpose() * fom.B());
}

//
// Greedy tangential interpolation: starting from the zero model, r/2 times locate the
// frequency of the largest error, take the dominant right singular vector b of the error there,
// and append Re/Im of (i w I - (J-R)Q)^{-1} B b to the (orthonormalized) basis.
//
inline InitResult GreedyInit(const PHSystem &fom, std::shared_ptr<const FomResponse> response,
                             Eigen::Index r, const InitOptions &options = {})
{
  if (r < 2 || r % 2 != 0 || r > fom.n())
  {
    throw DomainError("greedy_init: r must be even with 2 <= r <= n, got " + std::to_string(r));
  }
  if (!response)
  {
    response = std::make_shared<FomResponse>(fom);
  }
  const ResolventSolver rs(fom);
  Eigen::MatrixXd V(fom.n(), 0);
  std::optional<PHSystem> rom;
  std::vector<double> points;
  std::vector<Eigen::VectorXcd> directions;

  for (Eigen::Index k = 0; k < r / 2; k++)
  {
    const ErrorFunction e = rom ? ErrorFunction(response, *rom) : ErrorFunction(response);
    const HinfEstimate peak = EstimateHinf(e, options.omega_lo, options.omega_hi, options.n_grid);
    const double omega = peak.omega <= 1e-10 ? 1e-8 : peak.omega;

    Eigen::JacobiSVD<Eigen::MatrixXcd> svd(e.ErrorMatrix(omega), Eigen::ComputeFullV);
    const Eigen::VectorXcd b = svd.matrixV().col(0);
    const HessenbergLU lu = rs.Factor(omega);
    const Eigen::VectorXcd x = rs.U().cast<Complex>() * lu.Solve(rs.Bh().cast<Complex>() * b);

    Eigen::MatrixXd Vext(fom.n(), V.cols() + 2);
    Vext << V, x.real(), x.imag();
    Eigen::HouseholderQR<Eigen::MatrixXd> qr(Vext);
    const Eigen::VectorXd rdiag = qr.matrixQR().diagonal().head(Vext.cols()).cwiseAbs();
    if (rdiag.minCoeff() <= 1e-12 * rdiag.maxCoeff())
    {
      throw RankDeficiencyError("greedy_init: interpolation basis lost rank at step " +
                                std::to_string(k + 1) + "; try a smaller r");
    }
    V = qr.householderQ() * Eigen::MatrixXd::Identity(fom.n(), Vext.cols());
    rom = ProjectPH(fom, V);
    points.push_back(omega);
    directions.push_back(b);
  }
  return {*rom, std::move(points), std::move(directions)};
}

// Initial parameter vector of the reduced model.
inline ThetaVector ThetaFromInit(const PHSystem &rom) { return Extract(rom); }

}  // namespace phred

#endif  // PHRED_INIT_HPP
