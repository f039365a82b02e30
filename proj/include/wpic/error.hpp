#pragma once

#include <stdexcept>
#include <string>

namespace wpic {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed mesh or scenario input.
class ParseError : public Error {
 public:
  using Error::Error;
};

/// Mesh is well-formed text but not a valid simplicial complex.
class TopologyError : public Error {
 public:
  using Error::Error;
};

/// Nonpositive permittivity or permeability.
class MaterialError : public Error {
 public:
  using Error::Error;
};

/// Iterative solve or eigenvalue estimate failed to converge.
class SolverError : public Error {
 public:
  using Error::Error;
};

/// Inconsistent or unsupported scenario configuration.
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// Point location walked off the mesh. `last_face` is the final face visited.
class WalkEscapedError : public Error {
 public:
  WalkEscapedError(const std::string& what, int last_face)
      : Error(what), last_face_(last_face) {}
  int last_face() const noexcept { return last_face_; }

 private:
  int last_face_;
};

}  // namespace wpic
