#include "mfcbf/error.hpp"

namespace mfcbf {

std::string_view to_string(ErrorKind kind) {
    switch (kind) {
        case ErrorKind::kInvalidInput: return "invalid-input";
        case ErrorKind::kInfeasibleConstraint: return "infeasible-constraint";
        case ErrorKind::kCertificateUnavailable: return "certificate-unavailable";
        case ErrorKind::kPlacementInfeasible: return "placement-infeasible";
        case ErrorKind::kSetup: return "setup";
        case ErrorKind::kDiagnosticUnavailable: return "diagnostic-unavailable";
        case ErrorKind::kConfig: return "config";
        case ErrorKind::kIo: return "io";
    }
    return "unknown";
}

}  // namespace mfcbf
