// Copyright the phred authors.
// SPDX-License-Identifier: Apache-2.0

#ifndef PHRED_BENCH_HPP
#define PHRED_BENCH_HPP

#include <algorithm>
#include <chrono>
#include <cmath>
#include <functional>
#include <memory>
#include <vector>
#include "phred/errors.hpp"
#include "phred/freq.hpp"
#include "phred/init.hpp"
#include "phred/msd.hpp"
#include "phred/reduce.hpp"
#include "phred/sampling.hpp"

namespace phred
{

struct ComparisonProtocol
{
  double omega_lo = 1e-8;
  double omega_hi = 1e5;
  std::size_t n_fixed = 800;       // fixed-sampling variant: log grid on [omega_lo, omega_hi]
  std::size_t n_verify = 100000;   // verification grid for the final H-infinity errors
  int timing_repeats = 3;          // wall time is the median over this many runs
  InitOptions init;
  ReduceOptions reduce;
};

// Decades 10^k for k = ceil(log10 lo) .. floor(log10 hi), plus the interpolation points.
inline SampleSet InitialAdaptiveSamples(double lo, double hi, const std::vector<double> &points)
{
  std::vector<double> omegas;
  for (int k = static_cast<int>(std::ceil(std::log10(lo) - 1e-9));
       k <= static_cast<int>(std::floor(std::log10(hi) + 1e-9)); k++)
  {
    omegas.push_back(std::pow(10.0, k));
  }
  omegas.insert(omegas.end(), points.begin(), points.end());
  return SampleSet(std::move(omegas));
}

struct ComparisonRow
{
  Eigen::Index r = 0;
  double seconds_fixed = 0.0;
  double seconds_adaptive = 0.0;
  double ratio = 0.0;  // seconds_fixed / seconds_adaptive
  std::size_t n_samples_final = 0;
  double hinf_adaptive = 0.0;
  double hinf_fixed = 0.0;
};

struct ComparisonRun
{
  ComparisonRow row;
  std::vector<double> init_points;
  ThetaVector theta0;
  ReductionReport adaptive;
  ReductionReport fixed;
};

struct ComparisonResult
{
  std::vector<ComparisonRun> runs;
};

namespace detail
{

inline double Median(std::vector<double> v)
{
  std::sort(v.begin(), v.end());
  const std::size_t k = v.size() / 2;
  return v.size() % 2 ? v[k] : 0.5 * (v[k - 1] + v[k]);
}

}  // namespace detail

// Verification error: estimated sup of the error over the dense log grid.
inline double VerificationHinf(const std::shared_ptr<const FomResponse> &fom,
                               const ThetaVector &theta, const ComparisonProtocol &protocol)
{
  const ErrorFunction e(fom, Assemble(theta));
  return EstimateHinf(e, protocol.omega_lo, protocol.omega_hi, protocol.n_verify).value;
}

//
// For every r: greedy initialization, then the bisection with (a) adaptive sampling from the
// decade grid plus interpolation points and (b) a fixed log grid with adaptation disabled.
//
inline ComparisonResult RunComparison(
  const PHSystem &fom, const std::vector<Eigen::Index> &r_list,
  const ComparisonProtocol &protocol,
  const std::function<void(const ComparisonRun &)> &on_run = {})
{
  using clock = std::chrono::steady_clock;
  auto response = std::make_shared<FomResponse>(fom);
  response->Prefetch(LogSpace(protocol.omega_lo, protocol.omega_hi, protocol.n_verify));
  const SampleSet fixed_samples(LogSpace(protocol.omega_lo, protocol.omega_hi, protocol.n_fixed));

  ComparisonResult result;
  for (Eigen::Index r : r_list)
  {
    if (r % 2 != 0)
    {
      throw DomainError("run_comparison: reduced orders must be even");
    }
    const InitResult init = GreedyInit(fom, response, r, protocol.init);
    const ThetaVector theta0 = ThetaFromInit(init.rom);
    const SampleSet adaptive_samples =
      InitialAdaptiveSamples(protocol.omega_lo, protocol.omega_hi, init.points);

    ReduceOptions adaptive_opts = protocol.reduce;
    adaptive_opts.adaptive = true;
    ReduceOptions fixed_opts = protocol.reduce;
    fixed_opts.adaptive = false;

    ComparisonRun run{ComparisonRow{}, init.points, theta0, {}, {}};
    std::vector<double> t_adaptive, t_fixed;
    for (int rep = 0; rep < std::max(1, protocol.timing_repeats); rep++)
    {
      auto t0 = clock::now();
      run.adaptive = Reduce(response, theta0, adaptive_samples, adaptive_opts);
      auto t1 = clock::now();
      run.fixed = Reduce(response, theta0, fixed_samples, fixed_opts);
      auto t2 = clock::now();
      t_adaptive.push_back(std::chrono::duration<double>(t1 - t0).count());
      t_fixed.push_back(std::chrono::duration<double>(t2 - t1).count());
    }
    auto &row = run.row;
    row.r = r;
    row.seconds_adaptive = detail::Median(t_adaptive);
    row.seconds_fixed = detail::Median(t_fixed);
    row.ratio = row.seconds_fixed / row.seconds_adaptive;
    row.n_samples_final = run.adaptive.samples.size();
    row.hinf_adaptive = VerificationHinf(response, *run.adaptive.theta_opt, protocol);
    row.hinf_fixed = VerificationHinf(response, *run.fixed.theta_opt, protocol);
    if (on_run)
    {
      on_run(run);
    }
    result.runs.push_back(std::move(run));
  }
  return result;
}

struct SingleShotCount
{
  std::size_t samples = 0;
  bool capped = false;  // growth cap hit; samples is then a lower bound
};

// Size of the sample set that the adaptation produces in one shot at level gamma for a fixed
// model, starting from samples0.
inline SingleShotCount SingleShotSamples(const std::shared_ptr<const FomResponse> &fom,
                                         const PHSystem &rom, const SampleSet &samples0,
                                         double gamma, std::size_t cap)
{
  const ErrorFunction e(fom, rom);
  try
  {
    return {AdaptSamples(e, samples0, gamma, AdaptOptions{cap}).size(), false};
  }
  catch (const GrowthLimitError &err)
  {
    return {err.size(), true};
  }
}

}  // namespace phred

#endif  // PHRED_BENCH_HPP
