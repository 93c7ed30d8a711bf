// Copyright the phred authors.
// SPDX-License-Identifier: Apache-2.0

#ifndef PHRED_SAMPLING_HPP
#define PHRED_SAMPLING_HPP

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <utility>
#include <vector>
#include "phred/errors.hpp"
#include "phred/parallel.hpp"

namespace phred
{

//
// Strictly increasing set of positive sample frequencies (imaginary parts of the sample
// points on the imaginary axis). Entries closer than 1e-14 relative are merged.
//
class SampleSet
{
public:
  SampleSet() = default;
  explicit SampleSet(std::vector<double> omegas) : omegas_(std::move(omegas))
  {
    for (double w : omegas_)
    {
      if (!(w > 0.0) || !std::isfinite(w))
      {
        throw DomainError("SampleSet: frequencies must be positive and finite");
      }
    }
    Normalize();
  }

  std::size_t size() const { return omegas_.size(); }
  bool empty() const { return omegas_.empty(); }
  double operator[](std::size_t i) const { return omegas_[i]; }
  const std::vector<double> &omegas() const { return omegas_; }
  auto begin() const { return omegas_.begin(); }
  auto end() const { return omegas_.end(); }

  bool Contains(double omega) const
  {
    return std::binary_search(omegas_.begin(), omegas_.end(), omega);
  }

  // Union with another set of frequencies.
  SampleSet Merged(std::span<const double> more) const
  {
    std::vector<double> all(omegas_);
    all.insert(all.end(), more.begin(), more.end());
    return SampleSet(std::move(all));
  }

private:
  void Normalize()
  {
    std::sort(omegas_.begin(), omegas_.end());
    std::vector<double> out;
    out.reserve(omegas_.size());
    for (double w : omegas_)
    {
      if (out.empty() || w - out.back() > 1e-14 * w)
      {
        out.push_back(w);
      }
    }
    omegas_ = std::move(out);
  }

  std::vector<double> omegas_;
};

// Midpoint of [lo, hi] on a log scale, i.e. sqrt(lo * hi).
inline double LogMidpoint(double lo, double hi)
{
  if (!(lo > 0.0) || !(hi > 0.0))
  {
    throw DomainError("LogMidpoint: endpoints must be positive");
  }
  return std::sqrt(lo * hi);
}

struct SplitDecision
{
  bool split = false;
  double omega_test = 0.0;
  double error_test = 0.0;  // E at omega_test, kept so an inserted point is not re-evaluated
};

//
// Interval test from known values E(lo), E(mid), E(hi). The largest of the two difference
// quotients through the midpoint estimates the first-order bound d* on [lo, hi]; the interval
// is split when
//   d* (hi - lo) >= 2 (gamma* + gamma) - (E(lo) + E(hi)),   gamma* = max(E(lo), E(hi)),
// i.e. when the certificate E < gamma* + gamma on [lo, hi] cannot be given.
//
inline bool SplitCriterion(double lo, double mid, double hi, double e_lo, double e_mid,
                           double e_hi, double gamma)
{
  const double d1 = (e_mid - e_lo) / (mid - lo);
  const double d2 = (e_hi - e_mid) / (hi - mid);
  const double gamma_star = std::max(e_lo, e_hi);
  const double d_star = std::max(d1, d2);
  const double rhs = 2.0 * (gamma_star + gamma) - (e_lo + e_hi);
  if (!(rhs > 0.0))
  {
    return true;
  }
  return d_star * (hi - lo) >= rhs;
}

// E is any callable double -> double evaluating the error at i*omega.
template <typename ErrorFn>
SplitDecision IntervalNeedsSplit(const ErrorFn &E, double lo, double hi, double gamma)
{
  if (!(lo < hi))
  {
    throw DomainError("IntervalNeedsSplit: need lo < hi");
  }
  if (!(gamma > 0.0))
  {
    throw DomainError("IntervalNeedsSplit: gamma must be positive");
  }
  SplitDecision d;
  d.omega_test = LogMidpoint(lo, hi);
  d.error_test = E(d.omega_test);
  d.split = SplitCriterion(lo, d.omega_test, hi, E(lo), d.error_test, E(hi), gamma);
  return d;
}

struct AdaptOptions
{
  std::size_t max_samples = 100000;
};

//
// Logarithmic sampling adaptation: sweeps over adjacent pairs in ascending order and inserts
// the log-midpoint of every pair that fails the certificate at tolerance gamma. Points added
// during a sweep take part from the next sweep on. Stops after a sweep that adds nothing.
// Throws GrowthLimitError once the set exceeds options.max_samples.
//
template <typename ErrorFn>
SampleSet AdaptSamples(const ErrorFn &E, const SampleSet &S, double gamma,
                       const AdaptOptions &options = {})
{
  if (S.size() < 2)
  {
    throw DomainError("AdaptSamples: need at least two sample points");
  }
  if (!(gamma > 0.0))
  {
    throw DomainError("AdaptSamples: gamma must be positive");
  }
  std::vector<double> omegas = S.omegas();
  std::vector<double> values(omegas.size());
  ParallelFor(omegas.size(), [&](std::size_t i) { values[i] = E(omegas[i]); });

  while (true)
  {
    const std::size_t pairs = omegas.size() - 1;
    std::vector<SplitDecision> decisions(pairs);
    ParallelFor(pairs, [&](std::size_t i) {
      const double lo = omegas[i], hi = omegas[i + 1];
      SplitDecision &d = decisions[i];
      d.omega_test = LogMidpoint(lo, hi);
      if (!(d.omega_test > lo && d.omega_test < hi))
      {
        return;  // interval below floating-point resolution
      }
      d.error_test = E(d.omega_test);
      d.split = SplitCriterion(lo, d.omega_test, hi, values[i], d.error_test, values[i + 1],
                               gamma);
    });

    std::vector<double> next_omegas, next_values;
    next_omegas.reserve(omegas.size() * 2);
    next_values.reserve(omegas.size() * 2);
    std::size_t added = 0;
    for (std::size_t i = 0; i < omegas.size(); i++)
    {
      next_omegas.push_back(omegas[i]);
      next_values.push_back(values[i]);
      if (i < pairs && decisions[i].split)
      {
        next_omegas.push_back(decisions[i].omega_test);
        next_values.push_back(decisions[i].error_test);
        added++;
      }
    }
    omegas = std::move(next_omegas);
    values = std::move(next_values);
    if (omegas.size() > options.max_samples)
    {
      throw GrowthLimitError("AdaptSamples: sample set exceeded " +
                                 std::to_string(options.max_samples) + " points",
                             omegas.size());
    }
    if (added == 0)
    {
      break;
    }
  }
  return SampleSet(std::move(omegas));
}

}  // namespace phred

#endif  // PHRED_SAMPLING_HPP
