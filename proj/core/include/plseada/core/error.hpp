#pragma once

#include <stdexcept>
#include <string>

namespace plseada {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A caller violated a documented precondition (shape, dimension, label range).
class ContractError : public Error {
 public:
  using Error::Error;
};

/// Invalid configuration value or combination.
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// An operation that needs at least one element received none.
class EmptyInputError : public Error {
 public:
  using Error::Error;
};

/// A required file or directory does not exist or is unreadable.
class MissingArtifact : public Error {
 public:
  using Error::Error;
};

/// Training stopped because a loss or gradient became non-finite.
class TrainingAbort : public Error {
 public:
  TrainingAbort(std::string stage, std::size_t step, const std::string& what)
      : Error("training aborted at step " + std::to_string(step) + " (" + stage +
              "): " + what),
        stage_(std::move(stage)),
        step_(step) {}

  const std::string& stage() const noexcept { return stage_; }
  std::size_t step() const noexcept { return step_; }

 private:
  std::string stage_;
  std::size_t step_;
};

}  // namespace plseada
