// Copyright the phred authors.
// SPDX-License-Identifier: Apache-2.0

#ifndef PHRED_ERRORS_HPP
#define PHRED_ERRORS_HPP

#include <cstddef>
#include <stdexcept>
#include <string>

namespace phred
{

class Error : public std::runtime_error
{
public:
  using std::runtime_error::runtime_error;
};

// Argument outside the domain of an operation (e.g. a nonpositive frequency).
class DomainError : public Error
{
public:
  using Error::Error;
};

// Vector or matrix sizes do not match the requested shape.
class DimensionError : public Error
{
public:
  using Error::Error;
};

// Input violates a structural invariant (skew J, PSD R or Q, sorted samples, ...).
class InvariantViolation : public Error
{
public:
  using Error::Error;
};

// Resolvent sI - (J-R)Q is (numerically) singular at s = i*omega.
class EvaluationError : public Error
{
public:
  EvaluationError(const std::string &what, double omega) : Error(what), omega_(omega) {}
  double omega() const { return omega_; }

private:
  double omega_;
};

// Adaptive sampling exceeded its configured cap on the sample-set size.
class GrowthLimitError : public Error
{
public:
  GrowthLimitError(const std::string &what, std::size_t size) : Error(what), size_(size) {}
  std::size_t size() const { return size_; }

private:
  std::size_t size_;
};

// Projection basis lost rank during interpolatory initialization.
class RankDeficiencyError : public Error
{
public:
  using Error::Error;
};

class ParseError : public Error
{
public:
  using Error::Error;
};

}  // namespace phred

#endif  // PHRED_ERRORS_HPP
