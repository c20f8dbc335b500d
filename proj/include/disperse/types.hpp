#ifndef DISPERSE_TYPES_HPP_
#define DISPERSE_TYPES_HPP_

#include <complex>
#include <cstddef>
#include <stdexcept>
#include <string>

#include <Eigen/Core>

namespace disperse {

template <typename Scalar>
using Complex = std::complex<Scalar>;

/// Dense column vector of complex samples.
template <typename Scalar>
using CVector = Eigen::Matrix<std::complex<Scalar>, Eigen::Dynamic, 1>;

/// Dense column vector of real samples.
template <typename Scalar>
using RVector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

using Index = Eigen::Index;

/// Raised when an argument violates an operation's precondition.
class ParameterError : public std::invalid_argument
{
public:
  using std::invalid_argument::invalid_argument;
};

/// Raised when a numeric argument lies outside a function's domain.
class DomainError : public std::domain_error
{
public:
  using std::domain_error::domain_error;
};

namespace detail {

inline void require(bool condition, const std::string & message)
{
  if (!condition) { throw ParameterError(message); }
}

inline bool is_power_of_two(long long v) { return v > 0 && (v & (v - 1)) == 0; }

inline long long next_power_of_two(long long v)
{
  long long p = 1;
  while (p < v) { p <<= 1; }
  return p;
}

}  // namespace detail

}  // namespace disperse

#endif  // DISPERSE_TYPES_HPP_
