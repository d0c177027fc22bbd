#pragma once

#include <stdexcept>
#include <string>

namespace afp {

//! Base class for every error raised by the engine.
class Error : public std::runtime_error
{
public:
  using std::runtime_error::runtime_error;
};

class ParseError : public Error
{
public:
  using Error::Error;
};

class ValidationError : public Error
{
public:
  using Error::Error;
};

class ZeroVectorError : public Error
{
public:
  using Error::Error;
};

class RangeError : public Error
{
public:
  using Error::Error;
};

class ShapeError : public Error
{
public:
  using Error::Error;
};

class InsufficientSamplesError : public Error
{
public:
  using Error::Error;
};

class EmptySelectionError : public Error
{
public:
  using Error::Error;
};

class TransportError : public Error
{
public:
  using Error::Error;
};

class MalformedResponseError : public Error
{
public:
  using Error::Error;
};

//! Wraps an error raised inside a pipeline stage with the stage name.
class StageError : public Error
{
public:
  StageError(std::string stage, const std::string& what)
    : Error(stage + ": " + what)
    , stage_(std::move(stage))
  {}

  const std::string& stage() const noexcept { return stage_; }

private:
  std::string stage_;
};

} // namespace afp
