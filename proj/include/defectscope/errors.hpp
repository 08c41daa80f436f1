#pragma once
#include <stdexcept>
#include <string>

namespace defectscope {

enum class errc {
  outside_domain,
  degenerate_point,
  fit_failed,
  degenerate_curve,
  cusp_vertex,
  vertex_point,
  zero_not_isolated,
  curve_of_zeros,
  unresolved_winding,
  inconsistent_topology,
  zero_wedge,
  missing_weight,
  bound_too_small,
  infeasible_parity,
  instance_too_large,
  quadrature_unresolved,
  validation,
  syntax,
  unknown_identifier,
};

const char* errc_name(errc c);

// Exit-code mapping used by the CLI: input/validation problems -> 2,
// numerical failures -> 3.
int errc_exit_code(errc c);

class Error : public std::runtime_error {
public:
  Error(errc code, const std::string& msg)
      : std::runtime_error(std::string(errc_name(code)) + ": " + msg), code_(code) {}
  errc code() const { return code_; }

private:
  errc code_;
};

[[noreturn]] inline void fail(errc code, const std::string& msg) { throw Error(code, msg); }

inline const char* errc_name(errc c) {
  switch (c) {
    case errc::outside_domain: return "OutsideDomain";
    case errc::degenerate_point: return "DegeneratePoint";
    case errc::fit_failed: return "FitFailed";
    case errc::degenerate_curve: return "DegenerateCurve";
    case errc::cusp_vertex: return "CuspVertex";
    case errc::vertex_point: return "VertexPoint";
    case errc::zero_not_isolated: return "ZeroNotIsolated";
    case errc::curve_of_zeros: return "CurveOfZeros";
    case errc::unresolved_winding: return "UnresolvedWinding";
    case errc::inconsistent_topology: return "InconsistentTopology";
    case errc::zero_wedge: return "ZeroWedge";
    case errc::missing_weight: return "MissingWeight";
    case errc::bound_too_small: return "BoundTooSmall";
    case errc::infeasible_parity: return "InfeasibleParity";
    case errc::instance_too_large: return "InstanceTooLarge";
    case errc::quadrature_unresolved: return "QuadratureUnresolved";
    case errc::validation: return "ValidationError";
    case errc::syntax: return "SyntaxError";
    case errc::unknown_identifier: return "UnknownIdentifier";
  }
  return "Error";
}

inline int errc_exit_code(errc c) {
  switch (c) {
    case errc::validation:
    case errc::syntax:
    case errc::unknown_identifier:
    case errc::inconsistent_topology:
    case errc::outside_domain:
    case errc::instance_too_large:
      return 2;
    default:
      return 3;
  }
}

}  // namespace defectscope
