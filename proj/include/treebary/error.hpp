#pragma once

#include <stdexcept>
#include <string>

namespace treebary {

enum class ErrorKind {
  Structural,   // invalid node/edge ids, malformed trees, tree mismatch
  Domain,       // argument outside the operation's domain
  Unsupported,  // operation needs data the input does not carry
  Parse,        // malformed CSV / JSON input
  Inversion,    // edge vector cannot be inverted (zero-weight edge carries mass)
  NotAMeasure,  // recovered weights are negative beyond tolerance
  Numeric,      // underflow / non-finite intermediate values
  Internal,     // an internal consistency check failed
};

const char* to_string(ErrorKind kind);

class Error : public std::runtime_error {
public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

private:
  ErrorKind kind_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& what) {
  throw Error(kind, what);
}

inline void require(bool condition, ErrorKind kind, const std::string& what) {
  if (!condition) {
    fail(kind, what);
  }
}

// CLI exit codes: 0 ok, 2 usage, 3 data, 4 numeric.
int exit_code_for(ErrorKind kind);

}  // namespace treebary
