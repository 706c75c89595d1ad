#include "gridse/error.hpp"

namespace gridse {

std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::MalformedDocument: return "MalformedDocument";
    case ErrorKind::DanglingReference: return "DanglingReference";
    case ErrorKind::NoReferenceBus: return "NoReferenceBus";
    case ErrorKind::MultipleReferenceBuses: return "MultipleReferenceBuses";
    case ErrorKind::DisconnectedNetwork: return "DisconnectedNetwork";
    case ErrorKind::ZeroReactance: return "ZeroReactance";
    case ErrorKind::UnsupportedKindForDC: return "UnsupportedKindForDC";
    case ErrorKind::MissingMagnitudes: return "MissingMagnitudes";
    case ErrorKind::LengthMismatch: return "LengthMismatch";
    case ErrorKind::DimensionMismatch: return "DimensionMismatch";
    case ErrorKind::InvalidInput: return "InvalidInput";
    case ErrorKind::Io: return "Io";
    case ErrorKind::UnobservableNetwork: return "UnobservableNetwork";
    case ErrorKind::NoRedundancy: return "NoRedundancy";
    case ErrorKind::DidNotConverge: return "DidNotConverge";
  }
  return "Unknown";
}

int exit_code(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::UnobservableNetwork:
    case ErrorKind::NoRedundancy:
      return 3;
    case ErrorKind::DidNotConverge:
      return 4;
    default:
      return 2;
  }
}

Error::Error(ErrorKind kind, const std::string& what)
    : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}

}  // namespace gridse
