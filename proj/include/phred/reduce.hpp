// Copyright the phred authors.
// SPDX-License-Identifier: Apache-2.0

#ifndef PHRED_REDUCE_HPP
#define PHRED_REDUCE_HPP

#include <chrono>
#include <functional>
#include <limits>
#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>
#include "phred/bfgs.hpp"
#include "phred/errors.hpp"
#include "phred/freq.hpp"
#include "phred/objective.hpp"
#include "phred/ph_system.hpp"
#include "phred/sampling.hpp"

namespace phred
{

// Bisection state of the level gamma.
class GammaBracket
{
public:
  GammaBracket(double gamma_max, double tau_b) : gamma_max_(gamma_max), tau_b_(tau_b)
  {
    if (!(gamma_max > 0.0) || !(tau_b > 0.0))
    {
      throw DomainError("GammaBracket: gamma_max and tau_b must be positive");
    }
  }

  double gamma_min() const { return gamma_min_; }
  double gamma_max() const { return gamma_max_; }
  double tau_b() const { return tau_b_; }
  double midpoint() const { return 0.5 * (gamma_min_ + gamma_max_); }

  // Loop guard gamma * tau_b < gamma_max - gamma_min.
  bool Continue(double gamma) const { return gamma * tau_b_ < gamma_max_ - gamma_min_; }

  void Succeeded(double gamma) { gamma_max_ = gamma; }
  void Failed(double gamma) { gamma_min_ = gamma; }

private:
  double gamma_min_ = 0.0;
  double gamma_max_;
  double tau_b_;
};

struct LevelRecord
{
  double gamma = 0.0;
  std::size_t n_samples = 0;
  double loss = 0.0;
  int opt_iters = 0;
  double grad_norm = 0.0;
  double seconds = 0.0;
  bool stagnated = false;
  double max_sample_error = 0.0;
};

struct ReductionReport
{
  std::vector<LevelRecord> iterations;
  std::optional<ThetaVector> theta_opt;
  double final_gamma = 0.0;        // best level met on the samples
  double sampled_hinf = 0.0;       // max sample error at theta_opt on the final sample set
  int selected_level = -1;         // index into iterations of theta_opt, -1 for theta0
  SampleSet samples;
  bool aborted = false;
  std::string abort_reason;
  // Model and samples after each level (filled when ReduceOptions::keep_levels is set).
  std::vector<ThetaVector> level_thetas;
  std::vector<SampleSet> level_samples;
};

struct ReduceOptions
{
  double gamma_max = 0.5;
  double tau_b = 0.1;
  int max_bisect = 30;
  bool adaptive = true;  // run the sampling adaptation before every level
  AdaptOptions adapt;
  BfgsOptions bfgs;
  bool keep_levels = false;
  // Called after each level; for logging.
  std::function<void(const LevelRecord &)> on_level;
};

struct LossMinimum
{
  ThetaVector theta;
  double loss = 0.0;
  int iters = 0;
  double grad_norm = 0.0;
  bool stagnated = false;
};

// BFGS on the level-set loss. A singular resolvent at a trial point counts as +inf.
inline LossMinimum MinimizeLoss(const LossContext &ctx, const ThetaVector &theta0,
                                const BfgsOptions &options = {})
{
  const auto n = theta0.n(), m = theta0.m();
  auto fg = [&](const Eigen::VectorXd &x, Eigen::VectorXd &g) {
    try
    {
      auto eval = EvaluateLoss(ctx, ThetaVector(n, m, x), true);
      g = std::move(eval.gradient);
      return eval.loss;
    }
    catch (const EvaluationError &)
    {
      g.setZero(x.size());
      return std::numeric_limits<double>::infinity();
    }
  };
  BfgsResult r = MinimizeBfgs(fg, theta0.data(), options);
  return {ThetaVector(n, m, std::move(r.x)), r.f, r.iters, r.grad_norm, r.stagnated};
}

//
// Bisection over the level gamma. Each level first refines the samples against the error of
// the current model (when adaptive), then minimizes the loss warm-started from the previous
// optimum. A level with final loss 0 lowers gamma_max, otherwise it raises gamma_min.
// The returned model is the level optimum with the smallest max error on the final sample set,
// preferring later levels on ties; theta0 if no level ran.
//
inline ReductionReport Reduce(std::shared_ptr<const FomResponse> fom, const ThetaVector &theta0,
                              const SampleSet &samples0, const ReduceOptions &options = {})
{
  using clock = std::chrono::steady_clock;
  GammaBracket bracket(options.gamma_max, options.tau_b);
  ReductionReport report;
  report.samples = samples0;
  report.final_gamma = options.gamma_max;
  ThetaVector theta = theta0;
  std::vector<ThetaVector> candidates;

  double gamma = bracket.gamma_max();
  for (int it = 0; it < options.max_bisect && bracket.Continue(gamma); it++)
  {
    gamma = bracket.midpoint();
    const auto start = clock::now();
    if (options.adaptive)
    {
      try
      {
        const ErrorFunction e(fom, Assemble(theta));
        report.samples = AdaptSamples(e, report.samples, gamma, options.adapt);
      }
      catch (const GrowthLimitError &err)
      {
        report.aborted = true;
        report.abort_reason = err.what();
        break;
      }
    }
    const LossContext ctx(*fom, report.samples, gamma, theta.n());
    LossMinimum min = MinimizeLoss(ctx, theta, options.bfgs);
    theta = min.theta;

    LevelRecord rec;
    rec.gamma = gamma;
    rec.n_samples = report.samples.size();
    rec.loss = min.loss;
    rec.opt_iters = min.iters;
    rec.grad_norm = min.grad_norm;
    rec.stagnated = min.stagnated;
    rec.max_sample_error = MaxSampleError(ctx, theta);
    rec.seconds = std::chrono::duration<double>(clock::now() - start).count();
    report.iterations.push_back(rec);
    candidates.push_back(theta);
    if (options.keep_levels)
    {
      report.level_thetas.push_back(theta);
      report.level_samples.push_back(report.samples);
    }
    if (options.on_level)
    {
      options.on_level(rec);
    }

    if (min.loss > 0.0)
    {
      bracket.Failed(gamma);
    }
    else
    {
      bracket.Succeeded(gamma);
    }
  }

  report.final_gamma = bracket.gamma_max();
  const LossContext final_ctx(*fom, report.samples, report.final_gamma, theta.n());
  report.theta_opt = theta0;
  report.sampled_hinf = MaxSampleError(final_ctx, theta0);
  for (std::size_t k = 0; k < candidates.size(); k++)
  {
    const double err = MaxSampleError(final_ctx, candidates[k]);
    if (report.selected_level < 0 || err <= report.sampled_hinf)
    {
      report.theta_opt = candidates[k];
      report.sampled_hinf = err;
      report.selected_level = static_cast<int>(k);
    }
  }
  return report;
}

}  // namespace phred

#endif  // PHRED_REDUCE_HPP
