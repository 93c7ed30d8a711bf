// Copyright the phred authors.
// SPDX-License-Identifier: Apache-2.0

#ifndef PHRED_PH_SYSTEM_HPP
#define PHRED_PH_SYSTEM_HPP

#include <cmath>
#include <complex>
#include <string>
#include <utility>
#include <Eigen/Cholesky>
#include <Eigen/Dense>
#include <Eigen/Eigenvalues>
#include "phred/errors.hpp"

namespace phred
{

using Complex = std::complex<double>;

namespace detail
{

inline void RequireLength(Eigen::Index got, Eigen::Index want, const char *what)
{
  if (got != want)
  {
    throw DimensionError(std::string(what) + ": expected length " + std::to_string(want) +
                         ", got " + std::to_string(got));
  }
}

inline double MinEigenvalue(const Eigen::MatrixXd &A)
{
  if (A.size() == 0)
  {
    return 0.0;
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(A, Eigen::EigenvaluesOnly);
  return eig.eigenvalues().minCoeff();
}

inline double SpectralNormSym(const Eigen::MatrixXd &A)
{
  if (A.size() == 0)
  {
    return 0.0;
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(A, Eigen::EigenvaluesOnly);
  return eig.eigenvalues().cwiseAbs().maxCoeff();
}

}  // namespace detail

// Tolerances of the structural checks on J, R, Q.
inline constexpr double kSkewTol = 1e-12;
inline constexpr double kPsdRelTol = 1e-10;

//
// Linear port-Hamiltonian system
//   x' = (J - R) Q x + B u,   y = B^T Q x,
// with J = -J^T and R, Q symmetric positive semidefinite. Immutable after construction.
//
class PHSystem
{
public:
  PHSystem(Eigen::MatrixXd J, Eigen::MatrixXd R, Eigen::MatrixXd Q, Eigen::MatrixXd B)
    : J_(std::move(J)), R_(std::move(R)), Q_(std::move(Q)), B_(std::move(B))
  {
    CheckShapes();
    Validate();
  }

  // Skips the eigenvalue-based PSD checks. For systems that are pH by construction.
  static PHSystem Trusted(Eigen::MatrixXd J, Eigen::MatrixXd R, Eigen::MatrixXd Q,
                          Eigen::MatrixXd B)
  {
    PHSystem sys(Tag{}, std::move(J), std::move(R), std::move(Q), std::move(B));
    sys.CheckShapes();
    return sys;
  }

  Eigen::Index n() const { return J_.rows(); }
  Eigen::Index m() const { return B_.cols(); }
  const Eigen::MatrixXd &J() const { return J_; }
  const Eigen::MatrixXd &R() const { return R_; }
  const Eigen::MatrixXd &Q() const { return Q_; }
  const Eigen::MatrixXd &B() const { return B_; }

  // System matrix (J - R) Q.
  Eigen::MatrixXd A() const { return (J_ - R_) * Q_; }

  // Throws InvariantViolation if J is not skew or R, Q are not symmetric PSD.
  void Validate() const
  {
    if (n() > 0 && (J_ + J_.transpose()).cwiseAbs().maxCoeff() > kSkewTol)
    {
      throw InvariantViolation("J is not skew-symmetric");
    }
    CheckPsd(R_, "R");
    CheckPsd(Q_, "Q");
  }

private:
  struct Tag
  {
  };
  PHSystem(Tag, Eigen::MatrixXd J, Eigen::MatrixXd R, Eigen::MatrixXd Q, Eigen::MatrixXd B)
    : J_(std::move(J)), R_(std::move(R)), Q_(std::move(Q)), B_(std::move(B))
  {
  }

  void CheckShapes() const
  {
    const auto k = J_.rows();
    if (k < 1 || J_.cols() != k || R_.rows() != k || R_.cols() != k || Q_.rows() != k ||
        Q_.cols() != k || B_.rows() != k || B_.cols() < 1)
    {
      throw DimensionError("PHSystem: inconsistent matrix shapes");
    }
  }

  static void CheckPsd(const Eigen::MatrixXd &M, const char *name)
  {
    if ((M - M.transpose()).cwiseAbs().maxCoeff() > kSkewTol * (1.0 + M.cwiseAbs().maxCoeff()))
    {
      throw InvariantViolation(std::string(name) + " is not symmetric");
    }
    const double lmin = detail::MinEigenvalue(M);
    if (lmin < -kPsdRelTol * (1.0 + detail::SpectralNormSym(M)))
    {
      throw InvariantViolation(std::string(name) + " is not positive semidefinite (min eig " +
                               std::to_string(lmin) + ")");
    }
  }

  Eigen::MatrixXd J_, R_, Q_, B_;
};

// Number of parameters of an (n, m) system: n(3n+1)/2 + n*m.
constexpr Eigen::Index ThetaLength(Eigen::Index n, Eigen::Index m)
{
  return n * (3 * n + 1) / 2 + n * m;
}

//
// Flat parameter vector laid out as [theta_J, theta_R, theta_Q, theta_B] with lengths
// n(n-1)/2, n(n+1)/2, n(n+1)/2 and n*m. Any real vector of the right length is valid.
//
class ThetaVector
{
public:
  ThetaVector(Eigen::Index n, Eigen::Index m, Eigen::VectorXd data)
    : n_(n), m_(m), data_(std::move(data))
  {
    if (n < 1 || m < 1)
    {
      throw DimensionError("ThetaVector: n and m must be positive");
    }
    detail::RequireLength(data_.size(), ThetaLength(n, m), "ThetaVector");
  }
  ThetaVector(Eigen::Index n, Eigen::Index m)
    : ThetaVector(n, m, Eigen::VectorXd::Zero(ThetaLength(n, m)))
  {
  }

  Eigen::Index n() const { return n_; }
  Eigen::Index m() const { return m_; }
  Eigen::Index size() const { return data_.size(); }
  const Eigen::VectorXd &data() const { return data_; }

  Eigen::Index OffsetJ() const { return 0; }
  Eigen::Index OffsetR() const { return n_ * (n_ - 1) / 2; }
  Eigen::Index OffsetQ() const { return OffsetR() + n_ * (n_ + 1) / 2; }
  Eigen::Index OffsetB() const { return OffsetQ() + n_ * (n_ + 1) / 2; }

  auto ThetaJ() const { return data_.segment(OffsetJ(), n_ * (n_ - 1) / 2); }
  auto ThetaR() const { return data_.segment(OffsetR(), n_ * (n_ + 1) / 2); }
  auto ThetaQ() const { return data_.segment(OffsetQ(), n_ * (n_ + 1) / 2); }
  auto ThetaB() const { return data_.segment(OffsetB(), n_ * m_); }

private:
  Eigen::Index n_, m_;
  Eigen::VectorXd data_;
};

// Upper-triangular n x n matrix filled row by row from v (row i takes columns i..n-1).
inline Eigen::MatrixXd VecToUpper(const Eigen::Ref<const Eigen::VectorXd> &v, Eigen::Index n)
{
  detail::RequireLength(v.size(), n * (n + 1) / 2, "vtu");
  Eigen::MatrixXd U = Eigen::MatrixXd::Zero(n, n);
  Eigen::Index k = 0;
  for (Eigen::Index i = 0; i < n; i++)
  {
    for (Eigen::Index j = i; j < n; j++)
    {
      U(i, j) = v(k++);
    }
  }
  return U;
}

// Strictly upper-triangular n x n matrix filled row by row from v.
inline Eigen::MatrixXd VecToStrictUpper(const Eigen::Ref<const Eigen::VectorXd> &v,
                                        Eigen::Index n)
{
  detail::RequireLength(v.size(), n * (n - 1) / 2, "vtsu");
  Eigen::MatrixXd U = Eigen::MatrixXd::Zero(n, n);
  Eigen::Index k = 0;
  for (Eigen::Index i = 0; i < n; i++)
  {
    for (Eigen::Index j = i + 1; j < n; j++)
    {
      U(i, j) = v(k++);
    }
  }
  return U;
}

// n x m matrix filled column by column from v.
inline Eigen::MatrixXd VecToFull(const Eigen::Ref<const Eigen::VectorXd> &v, Eigen::Index n,
                                 Eigen::Index m)
{
  detail::RequireLength(v.size(), n * m, "vtf");
  return Eigen::Map<const Eigen::MatrixXd>(Eigen::VectorXd(v).data(), n, m);
}

// Inverses of the maps above (read the triangle back in the same order).
inline Eigen::VectorXd UpperToVec(const Eigen::MatrixXd &U)
{
  const auto n = U.rows();
  Eigen::VectorXd v(n * (n + 1) / 2);
  Eigen::Index k = 0;
  for (Eigen::Index i = 0; i < n; i++)
  {
    for (Eigen::Index j = i; j < n; j++)
    {
      v(k++) = U(i, j);
    }
  }
  return v;
}

inline Eigen::VectorXd StrictUpperToVec(const Eigen::MatrixXd &U)
{
  const auto n = U.rows();
  Eigen::VectorXd v(n * (n - 1) / 2);
  Eigen::Index k = 0;
  for (Eigen::Index i = 0; i < n; i++)
  {
    for (Eigen::Index j = i + 1; j < n; j++)
    {
      v(k++) = U(i, j);
    }
  }
  return v;
}

inline Eigen::VectorXd FullToVec(const Eigen::MatrixXd &M)
{
  return Eigen::Map<const Eigen::VectorXd>(M.data(), M.size());
}

// The pH system Sigma(theta): J = T^T - T, R = U_R^T U_R, Q = U_Q^T U_Q, B = reshape.
inline PHSystem Assemble(const ThetaVector &theta)
{
  const auto n = theta.n();
  const Eigen::MatrixXd T = VecToStrictUpper(theta.ThetaJ(), n);
  const Eigen::MatrixXd UR = VecToUpper(theta.ThetaR(), n);
  const Eigen::MatrixXd UQ = VecToUpper(theta.ThetaQ(), n);
  return PHSystem::Trusted(T.transpose() - T, UR.transpose() * UR, UQ.transpose() * UQ,
                           VecToFull(theta.ThetaB(), n, theta.m()));
}

namespace detail
{

// Upper-triangular U with U^T U = M for symmetric PSD M. Falls back to M + eps*I when the
// plain Cholesky factorization breaks down on a semidefinite matrix.
inline Eigen::MatrixXd UpperFactor(const Eigen::MatrixXd &M, const char *name)
{
  const auto n = M.rows();
  if (M.isZero(0.0))
  {
    return Eigen::MatrixXd::Zero(n, n);
  }
  Eigen::LLT<Eigen::MatrixXd> llt(M);
  if (llt.info() != Eigen::Success)
  {
    const double eps = 1e-12 * (1.0 + M.trace() / static_cast<double>(n));
    llt.compute(M + eps * Eigen::MatrixXd::Identity(n, n));
    if (llt.info() != Eigen::Success)
    {
      throw InvariantViolation(std::string("extract: ") + name +
                               " is not positive semidefinite");
    }
  }
  return llt.matrixU();
}

}  // namespace detail

// A parameter vector theta with Assemble(theta) reproducing sys up to factorization round-off.
inline ThetaVector Extract(const PHSystem &sys)
{
  const auto n = sys.n();
  const auto m = sys.m();
  // J = T^T - T with T strictly upper: T = -triu(J, 1).
  Eigen::MatrixXd T = -sys.J().triangularView<Eigen::StrictlyUpper>().toDenseMatrix();
  Eigen::VectorXd data(ThetaLength(n, m));
  ThetaVector layout(n, m);
  data.segment(layout.OffsetJ(), n * (n - 1) / 2) = StrictUpperToVec(T);
  data.segment(layout.OffsetR(), n * (n + 1) / 2) = UpperToVec(detail::UpperFactor(sys.R(), "R"));
  data.segment(layout.OffsetQ(), n * (n + 1) / 2) = UpperToVec(detail::UpperFactor(sys.Q(), "Q"));
  data.segment(layout.OffsetB(), n * m) = FullToVec(sys.B());
  return ThetaVector(n, m, std::move(data));
}

// H(s) = B^T Q (sI - (J-R)Q)^{-1} B by a dense LU solve with partial pivoting.
inline Eigen::MatrixXcd TransferEval(const PHSystem &sys, Complex s)
{
  Eigen::MatrixXcd M = -sys.A().cast<Complex>();
  M.diagonal().array() += s;
  Eigen::PartialPivLU<Eigen::MatrixXcd> lu(M);
  if (!(lu.rcond() > 1e-15))
  {
    throw EvaluationError("transfer_eval: singular resolvent at s = (" +
                              std::to_string(s.real()) + ", " + std::to_string(s.imag()) + ")",
                          s.imag());
  }
  const Eigen::MatrixXcd X = lu.solve(sys.B().cast<Complex>());
  return (sys.B().transpose() * sys.Q()).cast<Complex>() * X;
}

// Stored energy 1/2 x^T Q x.
inline double Hamiltonian(const PHSystem &sys, const Eigen::Ref<const Eigen::VectorXd> &x)
{
  detail::RequireLength(x.size(), sys.n(), "hamiltonian");
  return 0.5 * x.dot(sys.Q() * x);
}

}  // namespace phred

#endif  // PHRED_PH_SYSTEM_HPP
