#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace gridse {

enum class ErrorKind {
  MalformedDocument,
  DanglingReference,
  NoReferenceBus,
  MultipleReferenceBuses,
  DisconnectedNetwork,
  ZeroReactance,
  UnsupportedKindForDC,
  MissingMagnitudes,
  LengthMismatch,
  DimensionMismatch,
  InvalidInput,
  Io,
  UnobservableNetwork,
  NoRedundancy,
  DidNotConverge,
};

std::string_view to_string(ErrorKind kind);

/// Process exit class for a failure: 2 input, 3 numerical, 4 non-convergence.
int exit_code(ErrorKind kind);

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what);

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

}  // namespace gridse
