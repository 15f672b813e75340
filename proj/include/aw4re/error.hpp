#pragma once

#include <stdexcept>
#include <string>

namespace aw4re {

// Base of every exception the engine throws.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class InvalidArgument : public Error {
 public:
  using Error::Error;
};

class BehindCamera : public Error {
 public:
  BehindCamera() : Error("point is behind the camera near plane") {}
};

class DepthOutOfRange : public Error {
 public:
  explicit DepthOutOfRange(double depth)
      : Error("depth " + std::to_string(depth) + " outside (near, far]") {}
};

class CorpusError : public Error {
 public:
  using Error::Error;
};

class MissingMask : public Error {
 public:
  using Error::Error;
};

class PluginError : public Error {
 public:
  using Error::Error;
};

class PluginTimeout : public PluginError {
 public:
  using PluginError::PluginError;
};

class MalformedResponse : public PluginError {
 public:
  using PluginError::PluginError;
};

class EvidenceViolation : public PluginError {
 public:
  using PluginError::PluginError;
};

class MetricError : public Error {
 public:
  using Error::Error;
};

}  // namespace aw4re
