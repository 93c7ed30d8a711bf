// Copyright the phred authors.
// SPDX-License-Identifier: Apache-2.0

#ifndef PHRED_RESOLVENT_HPP
#define PHRED_RESOLVENT_HPP

#include <cmath>
#include <limits>
#include <string>
#include <vector>
#include <Eigen/Dense>
#include "phred/errors.hpp"
#include "phred/ph_system.hpp"

namespace phred
{

//
// LU factorization with partial pivoting of an upper Hessenberg matrix sI - H. Only adjacent
// rows are ever swapped, so factorization and each solve cost O(n^2).
//
class HessenbergLU
{
public:
  HessenbergLU(const Eigen::MatrixXd &H, Complex s) : U_(-H.cast<Complex>())
  {
    const auto n = U_.rows();
    U_.diagonal().array() += s;
    const double scale = U_.cwiseAbs().rowwise().sum().maxCoeff();
    mult_.resize(n > 0 ? n - 1 : 0);
    swap_.assign(mult_.size(), false);
    for (Eigen::Index k = 0; k + 1 < n; k++)
    {
      if (std::abs(U_(k + 1, k)) > std::abs(U_(k, k)))
      {
        U_.row(k).tail(n - k).swap(U_.row(k + 1).tail(n - k));
        swap_[k] = true;
      }
      if (U_(k, k) == Complex(0.0))
      {
        mult_(k) = 0.0;
        continue;
      }
      const Complex l = U_(k + 1, k) / U_(k, k);
      mult_(k) = l;
      U_.row(k + 1).tail(n - k) -= l * U_.row(k).tail(n - k);
      U_(k + 1, k) = 0.0;
    }
    const double tol = static_cast<double>(n) * std::numeric_limits<double>::epsilon() * scale;
    singular_ = !(U_.diagonal().cwiseAbs().minCoeff() > tol);
  }

  bool singular() const { return singular_; }

  // X = (sI - H)^{-1} B.
  Eigen::MatrixXcd Solve(Eigen::MatrixXcd B) const
  {
    const auto n = U_.rows();
    for (Eigen::Index k = 0; k + 1 < n; k++)
    {
      if (swap_[k])
      {
        B.row(k).swap(B.row(k + 1));
      }
      B.row(k + 1) -= mult_(k) * B.row(k);
    }
    U_.triangularView<Eigen::Upper>().solveInPlace(B);
    return B;
  }

  // Y = (sI - H)^{-H} C.
  Eigen::MatrixXcd AdjointSolve(Eigen::MatrixXcd C) const
  {
    const auto n = U_.rows();
    U_.adjoint().triangularView<Eigen::Lower>().solveInPlace(C);
    for (Eigen::Index k = n - 2; k >= 0; k--)
    {
      C.row(k) -= std::conj(mult_(k)) * C.row(k + 1);
      if (swap_[k])
      {
        C.row(k).swap(C.row(k + 1));
      }
    }
    return C;
  }

private:
  Eigen::MatrixXcd U_;
  Eigen::VectorXcd mult_;
  std::vector<bool> swap_;
  bool singular_ = false;
};

//
// Orthogonal Hessenberg reduction (J-R)Q = U H U^T of a pH system, reused across many
// frequencies. In these coordinates H(s) = Ch (sI - H)^{-1} Bh with Bh = U^T B and
// Ch = B^T Q U.
//
class ResolventSolver
{
public:
  explicit ResolventSolver(const PHSystem &sys)
  {
    Eigen::HessenbergDecomposition<Eigen::MatrixXd> hd(sys.A());
    H_ = hd.matrixH();
    U_ = hd.matrixQ();
    Bh_ = U_.transpose() * sys.B();
    Ch_ = sys.B().transpose() * sys.Q() * U_;
  }

  Eigen::Index n() const { return H_.rows(); }
  Eigen::Index m() const { return Bh_.cols(); }
  const Eigen::MatrixXd &H() const { return H_; }
  const Eigen::MatrixXd &U() const { return U_; }
  const Eigen::MatrixXd &Bh() const { return Bh_; }
  const Eigen::MatrixXd &Ch() const { return Ch_; }

  // Throws EvaluationError when sI - H is numerically singular.
  HessenbergLU Factor(double omega) const
  {
    HessenbergLU lu(H_, Complex(0.0, omega));
    if (lu.singular())
    {
      throw EvaluationError("singular resolvent at omega = " + std::to_string(omega), omega);
    }
    return lu;
  }

  Eigen::MatrixXcd Response(double omega) const
  {
    const HessenbergLU lu = Factor(omega);
    return Ch_.cast<Complex>() * lu.Solve(Bh_.cast<Complex>());
  }

private:
  Eigen::MatrixXd H_, U_, Bh_, Ch_;
};

}  // namespace phred

#endif  // PHRED_RESOLVENT_HPP
