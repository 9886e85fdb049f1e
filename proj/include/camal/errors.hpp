#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace camal {

// Invalid environment, configuration, workload mix or CLI arguments.
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// I/O failure in the storage backend or a malformed on-disk artifact.
class StorageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Least-squares design matrix without full column rank.
class RankDeficientError : public std::runtime_error {
 public:
  RankDeficientError(std::string what, std::vector<std::size_t> columns)
      : std::runtime_error(std::move(what)), columns_(std::move(columns)) {}

  const std::vector<std::size_t>& columns() const noexcept { return columns_; }

 private:
  std::vector<std::size_t> columns_;
};

}  // namespace camal
