#include "anc/error.hpp"

namespace anc {

const char* to_string(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::Data: return "data";
    case ErrorKind::Domain: return "domain";
    case ErrorKind::Dimension: return "dimension";
    case ErrorKind::Instability: return "instability";
    case ErrorKind::Divergence: return "divergence";
    case ErrorKind::Conditioning: return "conditioning";
    case ErrorKind::UndefinedBound: return "undefined-bound";
    case ErrorKind::Config: return "config";
    case ErrorKind::Io: return "io";
    case ErrorKind::Format: return "format";
    case ErrorKind::Unsupported: return "unsupported";
  }
  return "unknown";
}

}  // namespace anc
