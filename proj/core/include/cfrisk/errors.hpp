#ifndef CFRISK__ERRORS_HPP_
#define CFRISK__ERRORS_HPP_

#include <stdexcept>
#include <string>

namespace cfrisk
{

class Error : public std::runtime_error
{
public:
  explicit Error(const std::string & what) : std::runtime_error(what) {}
};

/// Malformed input data; carries a human-readable locus (line, field, value).
class ParseError : public Error
{
public:
  using Error::Error;
};

/// Input decodes but violates a structural requirement (missing ego, bad reference).
class StructuralError : public Error
{
public:
  using Error::Error;
};

/// A query time lies outside the data it refers to.
class RangeError : public Error
{
public:
  using Error::Error;
};

/// The ego track has a gap too large to interpolate at the analysis time.
class InsufficientHistoryError : public Error
{
public:
  using Error::Error;
};

/// Two sampled trajectories do not share the same offset grid.
class GridMismatchError : public Error
{
public:
  using Error::Error;
};

class ConfigError : public Error
{
public:
  using Error::Error;
};

/// A per-sample metric could not be computed (e.g. empty trajectory overlap).
class ScoringError : public Error
{
public:
  using Error::Error;
};

}  // namespace cfrisk

#endif  // CFRISK__ERRORS_HPP_
