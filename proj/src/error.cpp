#include "rotorlyap/error.hpp"

namespace rotorlyap {

std::string_view to_string(Errc code) {
  switch (code) {
    case Errc::Parse: return "parse";
    case Errc::Ordering: return "ordering";
    case Errc::Duplicate: return "duplicate";
    case Errc::Gap: return "gap";
    case Errc::Range: return "range";
    case Errc::Coverage: return "coverage";
    case Errc::Topology: return "topology";
    case Errc::Setup: return "setup";
    case Errc::Config: return "config";
    case Errc::Io: return "io";
    case Errc::NoDisturbance: return "no-disturbance";
    case Errc::DegenerateEvent: return "degenerate-event";
    case Errc::Lookup: return "lookup";
    case Errc::SingularInit: return "singular-init";
    case Errc::Input: return "input";
    case Errc::RefusedPair: return "refused-pair";
    case Errc::Timeout: return "timeout";
    case Errc::NoAssessablePair: return "no-assessable-pair";
  }
  return "unknown";
}

}  // namespace rotorlyap
