#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace pathsum {

// Base class for everything this library throws. `kind()` is a stable
// machine-readable tag used by the CLI when emitting structured errors.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& what) : std::runtime_error(what) {}
  virtual const char* kind() const noexcept { return "error"; }
};

// Invalid block partition: overlapping blocks, indices out of range, or a
// partition that does not cover {1..n}.
class PartitionError : public Error {
 public:
  using Error::Error;
  const char* kind() const noexcept override { return "partition"; }
};

// A query referenced a vertex that is deleted, out of range, or otherwise
// outside the operation's domain.
class DomainError : public Error {
 public:
  using Error::Error;
  const char* kind() const noexcept override { return "domain"; }
};

// A matrix or block that must be inverted is singular (or numerically
// indistinguishable from singular). Carries the vertex and the deletion set
// of the subgraph whose information submatrix failed, when applicable.
class SingularityError : public Error {
 public:
  explicit SingularityError(const std::string& what) : Error(what) {}
  SingularityError(const std::string& what, int vertex, std::vector<int> deleted)
      : Error(what), vertex_(vertex), deleted_(std::move(deleted)) {}
  const char* kind() const noexcept override { return "singularity"; }

  // Vertex whose resolvent could not be formed; -1 when not tied to one.
  int vertex() const noexcept { return vertex_; }
  // Deleted vertices identifying the failing subgraph (canonical order).
  const std::vector<int>& deletedVertices() const noexcept { return deleted_; }

 private:
  int vertex_ = -1;
  std::vector<int> deleted_;
};

// Graph shape does not match the method (e.g. message passing on a loopy
// graph).
class TopologyError : public Error {
 public:
  using Error::Error;
  const char* kind() const noexcept override { return "topology"; }
};

// Missing or inconsistent configuration (absent potential vector, model that
// fails a declared requirement, bad query spec).
class ConfigError : public Error {
 public:
  using Error::Error;
  const char* kind() const noexcept override { return "config"; }
};

// The requested method only supports the trivial (singleton) partition.
class UnsupportedPartitionError : public Error {
 public:
  using Error::Error;
  const char* kind() const noexcept override { return "unsupported-partition"; }
};

// Input file could not be parsed. Carries the path and 1-based line number
// (0 when the position is not line-oriented, e.g. JSON byte offsets are
// folded into the message).
class ParseError : public Error {
 public:
  ParseError(const std::string& what, std::string path, long line = 0)
      : Error(what), path_(std::move(path)), line_(line) {}
  const char* kind() const noexcept override { return "parse"; }

  const std::string& path() const noexcept { return path_; }
  long line() const noexcept { return line_; }

 private:
  std::string path_;
  long line_;
};

}  // namespace pathsum
