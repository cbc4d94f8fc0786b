#pragma once

#include <stdexcept>
#include <string>

namespace bpmr {

// Exit codes shared by the command-line front-end.
enum class ExitCode : int {
  kSuccess = 0,
  kUsage = 1,
  kData = 2,
  kInternal = 3,
};

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
  virtual ExitCode exit_code() const noexcept { return ExitCode::kInternal; }
};

// Bad configuration or command-line usage.
class ConfigError : public Error {
 public:
  using Error::Error;
  ExitCode exit_code() const noexcept override { return ExitCode::kUsage; }
};

// Anything wrong with the input data: unreadable files, malformed lines,
// schema mismatches, degenerate statistics.
class DataError : public Error {
 public:
  using Error::Error;
  ExitCode exit_code() const noexcept override { return ExitCode::kData; }
};

class SchemaMismatchError : public DataError {
 public:
  SchemaMismatchError(std::string label, std::size_t ordinal)
      : DataError("unknown behavior label '" + label + "' at record " + std::to_string(ordinal)),
        label_(std::move(label)),
        ordinal_(ordinal) {}

  const std::string& label() const noexcept { return label_; }
  std::size_t ordinal() const noexcept { return ordinal_; }

 private:
  std::string label_;
  std::size_t ordinal_;
};

class EmptyDatasetError : public DataError {
 public:
  EmptyDatasetError() : DataError("empty dataset: no interaction records") {}
};

// A walk count or one of its sums does not fit the integer type.
class CountOverflowError : public DataError {
 public:
  explicit CountOverflowError(const std::string& pattern)
      : DataError("walk count overflow for pattern " + pattern), pattern_(pattern) {}
  const std::string& pattern() const noexcept { return pattern_; }

 private:
  std::string pattern_;
};

class CapacityError : public ConfigError {
 public:
  using ConfigError::ConfigError;
};

class DegenerateStatisticsError : public DataError {
 public:
  explicit DegenerateStatisticsError(const std::string& pattern)
      : DataError("degenerate statistics for pattern " + pattern +
                  ": zero positive or negative mass with epsilon = 0"),
        pattern_(pattern) {}
  const std::string& pattern() const noexcept { return pattern_; }

 private:
  std::string pattern_;
};

// Violated API contract (misaligned inputs and similar programming errors).
class ContractError : public Error {
 public:
  using Error::Error;
};

// Wraps an error raised inside a pipeline stage, keeping its exit code.
class StageError : public Error {
 public:
  StageError(std::string stage, const Error& cause)
      : Error("[" + stage + "] " + cause.what()), stage_(std::move(stage)), code_(cause.exit_code()) {}
  StageError(std::string stage, const std::exception& cause)
      : Error("[" + stage + "] " + cause.what()), stage_(std::move(stage)), code_(ExitCode::kInternal) {}

  const std::string& stage() const noexcept { return stage_; }
  ExitCode exit_code() const noexcept override { return code_; }

 private:
  std::string stage_;
  ExitCode code_;
};

// Runs fn, re-throwing any failure tagged with the stage name.
template <typename Fn>
decltype(auto) run_stage(const std::string& stage, Fn&& fn) {
  try {
    return fn();
  } catch (const StageError&) {
    throw;
  } catch (const Error& e) {
    throw StageError(stage, e);
  } catch (const std::exception& e) {
    throw StageError(stage, e);
  }
}

}  // namespace bpmr
