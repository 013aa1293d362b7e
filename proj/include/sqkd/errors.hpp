#pragma once

#include <stdexcept>
#include <string>
#include <utility>

namespace sqkd {

/// Raised when an operation receives an out-of-range argument.
class ParameterError : public std::invalid_argument
{
  public:
    using std::invalid_argument::invalid_argument;
};

/// Raised when the protocol state machine is driven out of order or the
/// public record is inconsistent (e.g. announcement lengths disagree).
class ProtocolError : public std::runtime_error
{
  public:
    using std::runtime_error::runtime_error;
};

/// Raised for invalid experiment configuration. `field()` names the
/// offending key so the CLI can report it.
class ConfigError : public std::runtime_error
{
  public:
    ConfigError(std::string field, std::string const& message)
        : std::runtime_error(field + ": " + message), field_(std::move(field))
    {
    }

    std::string const& field() const noexcept { return field_; }

  private:
    std::string field_;
};

}  // namespace sqkd
