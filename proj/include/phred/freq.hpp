// Copyright the phred authors.
// SPDX-License-Identifier: Apache-2.0

#ifndef PHRED_FREQ_HPP
#define PHRED_FREQ_HPP

#include <bit>
#include <cmath>
#include <cstdint>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <shared_mutex>
#include <span>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>
#include <Eigen/Dense>
#include <Eigen/SVD>
#include "phred/errors.hpp"
#include "phred/parallel.hpp"
#include "phred/ph_system.hpp"
#include "phred/resolvent.hpp"

namespace phred
{

// n points equally spaced in log10 between lo and hi (both included).
inline std::vector<double> LogSpace(double lo, double hi, std::size_t n)
{
  if (!(lo > 0.0) || !(hi > lo) || n < 2)
  {
    throw DomainError("LogSpace: need 0 < lo < hi and n >= 2");
  }
  std::vector<double> out(n);
  const double a = std::log10(lo), b = std::log10(hi);
  for (std::size_t i = 0; i < n; i++)
  {
    out[i] = std::pow(10.0, a + (b - a) * static_cast<double>(i) / static_cast<double>(n - 1));
  }
  out.front() = lo;
  out.back() = hi;
  return out;
}

// Largest singular value of a (small) complex matrix.
inline double SigmaMax(const Eigen::MatrixXcd &M)
{
  if (M.size() == 0)
  {
    return 0.0;
  }
  Eigen::JacobiSVD<Eigen::MatrixXcd> svd(M);
  return svd.singularValues()(0);
}

//
// Frequency response of a full-order model on the imaginary axis, memoized by the exact bit
// pattern of omega. Either backed by a system (evaluated on demand) or by a fixed table.
// Concurrent lookups and insertions are safe.
//
class FomResponse
{
public:
  explicit FomResponse(const PHSystem &fom) : solver_(ResolventSolver(fom)), m_(fom.m()) {}

  // Table-backed response; lookups outside the table throw.
  FomResponse(Eigen::Index m, const std::map<double, Eigen::MatrixXcd> &table) : m_(m)
  {
    for (const auto &[omega, H] : table)
    {
      if (H.rows() != m || H.cols() != m)
      {
        throw DimensionError("FomResponse: table entry has wrong shape");
      }
      cache_.emplace(Key(omega), H);
    }
  }

  FomResponse(const FomResponse &) = delete;
  FomResponse &operator=(const FomResponse &) = delete;

  Eigen::Index m() const { return m_; }

  Eigen::MatrixXcd operator()(double omega) const
  {
    {
      std::shared_lock lock(mutex_);
      if (auto it = cache_.find(Key(omega)); it != cache_.end())
      {
        return it->second;
      }
    }
    if (!solver_)
    {
      throw EvaluationError("FomResponse: omega = " + std::to_string(omega) +
                                " not in response table",
                            omega);
    }
    Eigen::MatrixXcd H = solver_->Response(omega);
    std::unique_lock lock(mutex_);
    return cache_.try_emplace(Key(omega), std::move(H)).first->second;
  }

  // Evaluates all missing frequencies (in parallel) and stores them.
  void Prefetch(std::span<const double> omegas) const
  {
    std::vector<double> missing;
    {
      std::shared_lock lock(mutex_);
      for (double w : omegas)
      {
        if (!cache_.contains(Key(w)))
        {
          missing.push_back(w);
        }
      }
    }
    if (missing.empty() || !solver_)
    {
      return;
    }
    std::vector<Eigen::MatrixXcd> values(missing.size());
    ParallelFor(missing.size(), [&](std::size_t i) { values[i] = solver_->Response(missing[i]); });
    std::unique_lock lock(mutex_);
    for (std::size_t i = 0; i < missing.size(); i++)
    {
      cache_.try_emplace(Key(missing[i]), std::move(values[i]));
    }
  }

  std::size_t CacheSize() const
  {
    std::shared_lock lock(mutex_);
    return cache_.size();
  }

private:
  static std::uint64_t Key(double omega) { return std::bit_cast<std::uint64_t>(omega); }

  std::optional<ResolventSolver> solver_;
  Eigen::Index m_;
  mutable std::shared_mutex mutex_;
  mutable std::unordered_map<std::uint64_t, Eigen::MatrixXcd> cache_;
};

//
// E(omega) = || H(i omega) - Hr(i omega) ||_2 for a full-order response H and a reduced
// model Hr. Without a reduced model, Hr = 0.
//
class ErrorFunction
{
public:
  explicit ErrorFunction(std::shared_ptr<const FomResponse> fom) : fom_(std::move(fom)) {}
  ErrorFunction(std::shared_ptr<const FomResponse> fom, const PHSystem &rom)
    : fom_(std::move(fom)), rom_(ResolventSolver(rom))
  {
    if (rom.m() != fom_->m())
    {
      throw DimensionError("ErrorFunction: FOM and ROM port dimensions differ");
    }
  }

  const FomResponse &fom() const { return *fom_; }
  const std::shared_ptr<const FomResponse> &fom_ptr() const { return fom_; }

  Eigen::MatrixXcd RomResponse(double omega) const
  {
    if (!rom_)
    {
      return Eigen::MatrixXcd::Zero(fom_->m(), fom_->m());
    }
    return rom_->Response(omega);
  }

  Eigen::MatrixXcd ErrorMatrix(double omega) const
  {
    if (!(omega > 0.0))
    {
      throw DomainError("ErrorFunction: omega must be positive");
    }
    return (*fom_)(omega) - RomResponse(omega);
  }

  double operator()(double omega) const { return SigmaMax(ErrorMatrix(omega)); }

private:
  std::shared_ptr<const FomResponse> fom_;
  std::optional<ResolventSolver> rom_;
};

inline double ErrorAt(const ErrorFunction &e, double omega) { return e(omega); }

struct HinfEstimate
{
  double value = 0.0;
  double omega = 0.0;
};

// Relative bracket width at which golden-section refinement stops.
inline constexpr double kRefineRelTol = 1e-3;

//
// Lower bound of sup_omega E(omega) on [lo, hi]: maximum over n_grid log-spaced points,
// refined by golden-section search (in log omega) between the neighbours of the grid argmax.
//
inline HinfEstimate EstimateHinf(const ErrorFunction &e, double lo, double hi,
                                 std::size_t n_grid)
{
  if (!(lo > 0.0) || !(hi > lo) || n_grid < 2)
  {
    throw DomainError("EstimateHinf: need 0 < lo < hi and n_grid >= 2");
  }
  const auto grid = LogSpace(lo, hi, n_grid);
  e.fom().Prefetch(grid);
  std::vector<double> values(grid.size());
  ParallelFor(grid.size(), [&](std::size_t i) { values[i] = e(grid[i]); });

  std::size_t k = 0;
  for (std::size_t i = 1; i < values.size(); i++)
  {
    if (values[i] > values[k])
    {
      k = i;
    }
  }
  HinfEstimate best{values[k], grid[k]};

  double a = std::log10(grid[k == 0 ? 0 : k - 1]);
  double b = std::log10(grid[std::min(k + 1, grid.size() - 1)]);
  const double ratio = 0.5 * (std::sqrt(5.0) - 1.0);
  double x1 = b - ratio * (b - a), x2 = a + ratio * (b - a);
  double f1 = e(std::pow(10.0, x1)), f2 = e(std::pow(10.0, x2));
  // Bracket [10^a, 10^b] has relative width 10^(b-a) - 1.
  while (std::pow(10.0, b - a) - 1.0 > kRefineRelTol)
  {
    if (f1 >= f2)
    {
      b = x2;
      x2 = x1;
      f2 = f1;
      x1 = b - ratio * (b - a);
      f1 = e(std::pow(10.0, x1));
    }
    else
    {
      a = x1;
      x1 = x2;
      f1 = f2;
      x2 = a + ratio * (b - a);
      f2 = e(std::pow(10.0, x2));
    }
    for (auto [f, x] : {std::pair{f1, x1}, std::pair{f2, x2}})
    {
      if (f > best.value)
      {
        best = {f, std::pow(10.0, x)};
      }
    }
  }
  return best;
}

}  // namespace phred

#endif  // PHRED_FREQ_HPP
