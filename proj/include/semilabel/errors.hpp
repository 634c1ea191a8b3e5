#pragma once

#include <stdexcept>
#include <string>

namespace semilabel {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Bad input files, malformed rows, invalid arguments or training sets.
class InputError : public Error {
 public:
  using Error::Error;
};

// Model file with a wrong magic header or format version.
class FormatError : public InputError {
 public:
  using InputError::InputError;
};

// External scorer misbehaved: bad frames, mismatched ids, out-of-range
// confidences, timeouts, or a closed connection.
class ProtocolError : public Error {
 public:
  enum class Kind { BadJson, Handshake, MissingField, ReqIdMismatch, LengthMismatch, BadConfidence, Remote, Timeout, Closed, Transport };

  ProtocolError(Kind kind, const std::string& what) : Error(what), kind_(kind) {}

  Kind kind() const { return kind_; }

 private:
  Kind kind_;
};

}  // namespace semilabel
