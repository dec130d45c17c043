#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace rapidlearn {

enum class ErrorCode {
  // net-model
  DuplicatePort,
  InvalidPort,
  MissingController,
  DuplicateNode,
  UnknownNode,
  DisconnectedHost,
  InvalidTopology,
  NoSuchLink,
  MalformedMessage,
  // sim-engine
  NegativeDelay,
  NoRoute,
  SimulationError,
  // controller
  UnknownSwitch,
  ForeignMonitor,
  // monitor
  ModelMissing,
  UnknownPeer,
  // svc
  DimensionMismatch,
  DegenerateDataset,
  NonFiniteFeature,
  MalformedModelFile,
  // traffic
  InvalidSpec,
  MalformedRow,
  UnsortedTrace,
  UnknownLabel,
  MissingLabel,
  // cli / config
  InvalidConfig,
  InvalidSplit,
  Usage,
  Io,
};

std::string_view error_code_name(ErrorCode code);

// Usage and validation failures map to exit status 2, everything else to 1.
bool is_validation_error(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(error_code_name(code)) + ": " + what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace rapidlearn
