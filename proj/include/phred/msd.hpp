// Copyright the phred authors.
// SPDX-License-Identifier: Apache-2.0

#ifndef PHRED_MSD_HPP
#define PHRED_MSD_HPP

#include <Eigen/Dense>
#include "phred/errors.hpp"
#include "phred/ph_system.hpp"

namespace phred
{

struct MSDConfig
{
  Eigen::Index n_masses = 50;
  double mass = 4.0;
  double stiffness = 4.0;
  double damping = 1.0;
  Eigen::Index m_inputs = 2;

  Eigen::Index state_dim() const { return 2 * n_masses; }
};

//
// Mass-spring-damper chain in pH form with state x = (p, q), momenta first. Mass 1 is tied
// to a wall by a spring, mass i+1 to mass i, and every mass has a damper to ground. Forces act
// on the first m_inputs masses, and the outputs are their velocities:
//   J = [0 -I; I 0],  R = diag(c I, 0),  Q = diag(M^{-1}, K),  B = [E; 0].
//
inline PHSystem MassSpringDamperChain(const MSDConfig &cfg)
{
  const Eigen::Index k = cfg.n_masses;
  if (k < 1 || cfg.m_inputs < 1 || cfg.m_inputs > k)
  {
    throw DimensionError("msd_chain: need n_masses >= 1 and 1 <= m_inputs <= n_masses");
  }
  if (!(cfg.mass > 0.0) || !(cfg.stiffness > 0.0) || !(cfg.damping > 0.0))
  {
    throw DomainError("msd_chain: mass, stiffness and damping must be positive");
  }
  const Eigen::Index n = 2 * k;
  Eigen::MatrixXd J = Eigen::MatrixXd::Zero(n, n);
  J.topRightCorner(k, k) = -Eigen::MatrixXd::Identity(k, k);
  J.bottomLeftCorner(k, k) = Eigen::MatrixXd::Identity(k, k);

  Eigen::MatrixXd R = Eigen::MatrixXd::Zero(n, n);
  R.topLeftCorner(k, k).diagonal().setConstant(cfg.damping);

  Eigen::MatrixXd Q = Eigen::MatrixXd::Zero(n, n);
  Q.topLeftCorner(k, k).diagonal().setConstant(1.0 / cfg.mass);
  auto K = Q.bottomRightCorner(k, k);
  for (Eigen::Index i = 0; i < k; i++)
  {
    K(i, i) = (i + 1 < k ? 2.0 : 1.0) * cfg.stiffness;
    if (i + 1 < k)
    {
      K(i, i + 1) = K(i + 1, i) = -cfg.stiffness;
    }
  }

  Eigen::MatrixXd B = Eigen::MatrixXd::Zero(n, cfg.m_inputs);
  for (Eigen::Index j = 0; j < cfg.m_inputs; j++)
  {
    B(j, j) = 1.0;
  }
  return PHSystem(J, R, Q, B);
}

}  // namespace phred

#endif  // PHRED_MSD_HPP
