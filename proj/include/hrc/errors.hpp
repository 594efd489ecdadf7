#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace hrc {

class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

class JointLimitError : public DomainError {
 public:
  JointLimitError(int joint, double value, double lo, double hi)
      : DomainError("joint " + std::to_string(joint + 1) + " at " + std::to_string(value) +
                    " rad outside [" + std::to_string(lo) + ", " + std::to_string(hi) + "]"),
        joint_(joint)
  {
  }

  // Zero-based index of the offending joint.
  int joint() const noexcept { return joint_; }

 private:
  int joint_;
};

// Robot and obstacle positions coincide; the repulsive field is singular there.
class CoincidentObstacle : public DomainError {
 public:
  CoincidentObstacle() : DomainError("obstacle coincides with TCP (d_RO = 0)") {}
};

class NotVisible : public std::runtime_error {
 public:
  NotVisible() : std::runtime_error("marker not visible") {}
};

// Configuration validation failure, anchored to a file and line when known.
class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(const std::string& msg) : std::runtime_error(msg) {}
  ConfigError(const std::string& file, int line, const std::string& msg)
      : std::runtime_error(file + ":" + std::to_string(line) + ": " + msg), file_(file), line_(line)
  {
  }

  const std::string& file() const noexcept { return file_; }
  int line() const noexcept { return line_; }

 private:
  std::string file_;
  int line_ = 0;
};

// Non-finite state encountered while stepping a scenario.
class SimulationAbort : public std::runtime_error {
 public:
  SimulationAbort(std::size_t row, const std::string& what)
      : std::runtime_error("simulation aborted at row " + std::to_string(row) + ": " + what), row_(row)
  {
  }

  std::size_t row() const noexcept { return row_; }

 private:
  std::size_t row_;
};

}  // namespace hrc
