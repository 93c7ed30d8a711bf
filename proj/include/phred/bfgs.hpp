// Copyright the phred authors.
// SPDX-License-Identifier: Apache-2.0

#ifndef PHRED_BFGS_HPP
#define PHRED_BFGS_HPP

#include <algorithm>
#include <cmath>
#include <limits>
#include <utility>
#include <Eigen/Dense>

namespace phred
{

struct BfgsOptions
{
  double c1 = 1e-4;         // sufficient decrease
  double c2 = 0.9;          // curvature
  double grad_tol = 1e-8;   // stop when ||g||_inf <= grad_tol
  int max_iters = 2000;
  int restart_after = 5;    // consecutive skipped updates before resetting to identity
  int max_line_evals = 50;
  // For objectives whose minimum value is exactly zero (level-set losses): after an accepted
  // step with f > 0, probe once past the zero predicted by the local quadratic model and take
  // that point if f vanishes there.
  bool zero_probe = true;
};

struct BfgsResult
{
  Eigen::VectorXd x;
  double f = 0.0;
  double grad_norm = 0.0;  // inf-norm
  int iters = 0;
  int evaluations = 0;
  bool stagnated = false;  // line search failed from the identity metric
};

namespace detail
{

// Minimizer of the cubic through (a, fa, ga), (b, fb, gb), safeguarded into the interval.
inline double CubicStep(double a, double fa, double ga, double b, double fb, double gb)
{
  const double d1 = ga + gb - 3.0 * (fa - fb) / (a - b);
  const double disc = d1 * d1 - ga * gb;
  double x;
  if (disc >= 0.0)
  {
    const double d2 = std::copysign(std::sqrt(disc), b - a);
    x = b - (b - a) * (gb + d2 - d1) / (gb - ga + 2.0 * d2);
  }
  else
  {
    x = 0.5 * (a + b);
  }
  const double lo = std::min(a, b), hi = std::max(a, b), w = hi - lo;
  if (!std::isfinite(x) || x < lo + 0.1 * w || x > hi - 0.1 * w)
  {
    x = 0.5 * (a + b);
  }
  return x;
}

struct LinePoint
{
  double alpha = 0.0;
  double f = 0.0;
  double slope = 0.0;  // g(alpha) . p
  Eigen::VectorXd g;
};

}  // namespace detail

//
// BFGS on the inverse Hessian with a strong Wolfe line search (bracketing + cubic zoom).
// fg(x, g) returns f(x) and writes the gradient into g. Returns as soon as f == 0 exactly.
//
template <typename Objective>
BfgsResult MinimizeBfgs(Objective &&fg, Eigen::VectorXd x0, const BfgsOptions &opt = {})
{
  const Eigen::Index n = x0.size();
  BfgsResult res;
  res.x = std::move(x0);
  Eigen::VectorXd g(n);
  res.f = fg(res.x, g);
  res.evaluations = 1;
  res.grad_norm = n > 0 ? g.cwiseAbs().maxCoeff() : 0.0;
  if (res.f == 0.0 || res.grad_norm <= opt.grad_tol)
  {
    return res;
  }

  Eigen::MatrixXd Hinv = Eigen::MatrixXd::Identity(n, n);
  bool identity = true;
  int skipped = 0;
  Eigen::VectorXd trial_g(n);

  auto evaluate = [&](double alpha, const Eigen::VectorXd &p) {
    detail::LinePoint pt;
    pt.alpha = alpha;
    pt.g.resize(n);
    pt.f = fg(res.x + alpha * p, pt.g);
    pt.slope = pt.g.dot(p);
    res.evaluations++;
    return pt;
  };

  while (res.iters < opt.max_iters)
  {
    Eigen::VectorXd p = -Hinv * g;
    double slope0 = g.dot(p);
    if (!(slope0 < 0.0))
    {
      Hinv.setIdentity();
      identity = true;
      p = -g;
      slope0 = g.dot(p);
    }

    // Strong Wolfe line search.
    const double f0 = res.f;
    detail::LinePoint prev{0.0, f0, slope0, g};
    detail::LinePoint accepted;
    bool found = false;
    double alpha = 1.0;
    int evals = 0;
    auto zoom = [&](detail::LinePoint lo, detail::LinePoint hi) {
      while (evals < opt.max_line_evals)
      {
        const double a = detail::CubicStep(lo.alpha, lo.f, lo.slope, hi.alpha, hi.f, hi.slope);
        detail::LinePoint pt = evaluate(a, p);
        evals++;
        if (pt.f == 0.0)
        {
          accepted = std::move(pt);
          return true;
        }
        if (pt.f > f0 + opt.c1 * a * slope0 || pt.f >= lo.f)
        {
          hi = std::move(pt);
        }
        else
        {
          if (std::abs(pt.slope) <= -opt.c2 * slope0)
          {
            accepted = std::move(pt);
            return true;
          }
          if (pt.slope * (hi.alpha - lo.alpha) >= 0.0)
          {
            hi = lo;
          }
          lo = std::move(pt);
        }
        if (std::abs(hi.alpha - lo.alpha) <= 1e-16 * std::max(1.0, std::abs(lo.alpha)))
        {
          break;
        }
      }
      // Fall back to the best sufficient-decrease point seen, if any.
      if (lo.alpha > 0.0 && lo.f < f0)
      {
        accepted = std::move(lo);
        return true;
      }
      return false;
    };

    while (evals < opt.max_line_evals)
    {
      detail::LinePoint pt = evaluate(alpha, p);
      evals++;
      if (!std::isfinite(pt.f))
      {
        // Step left the region where the objective is defined; shrink.
        alpha *= 0.1;
        continue;
      }
      if (pt.f == 0.0)
      {
        accepted = std::move(pt);
        found = true;
        break;
      }
      if (pt.f > f0 + opt.c1 * alpha * slope0 || (evals > 1 && pt.f >= prev.f))
      {
        found = zoom(prev, std::move(pt));
        break;
      }
      if (std::abs(pt.slope) <= -opt.c2 * slope0)
      {
        accepted = std::move(pt);
        found = true;
        break;
      }
      if (pt.slope >= 0.0)
      {
        found = zoom(std::move(pt), prev);
        break;
      }
      prev = std::move(pt);
      alpha *= 2.0;
    }

    if (!found)
    {
      if (identity)
      {
        res.stagnated = true;
        return res;
      }
      Hinv.setIdentity();
      identity = true;
      continue;
    }

    if (opt.zero_probe && accepted.f > 0.0 && accepted.slope < 0.0)
    {
      // phi(a) ~ c (a* - a)^2 near the boundary gives a* - a = 2 phi / |phi'|.
      const double gap = 2.0 * accepted.f / -accepted.slope;
      if (gap <= accepted.alpha)
      {
        detail::LinePoint probe = evaluate(accepted.alpha + 2.0 * gap, p);
        if (probe.f == 0.0)
        {
          accepted = std::move(probe);
        }
      }
    }

    const Eigen::VectorXd s = accepted.alpha * p;
    const Eigen::VectorXd y = accepted.g - g;
    res.x += s;
    res.f = accepted.f;
    g = accepted.g;
    res.iters++;
    res.grad_norm = g.cwiseAbs().maxCoeff();
    if (res.f == 0.0 || res.grad_norm <= opt.grad_tol)
    {
      return res;
    }

    const double sy = s.dot(y);
    if (sy > 1e-12 * s.norm() * y.norm())
    {
      const double rho = 1.0 / sy;
      const Eigen::VectorXd Hy = Hinv * y;
      const double yHy = y.dot(Hy);
      // H+ = H - rho (s Hy^T + Hy s^T) + (rho^2 yHy + rho) s s^T
      Hinv.noalias() -= rho * (s * Hy.transpose() + Hy * s.transpose());
      Hinv.noalias() += (rho * rho * yHy + rho) * (s * s.transpose());
      identity = false;
      skipped = 0;
    }
    else if (++skipped >= opt.restart_after)
    {
      Hinv.setIdentity();
      identity = true;
      skipped = 0;
    }
  }
  return res;
}

}  // namespace phred

#endif  // PHRED_BFGS_HPP
