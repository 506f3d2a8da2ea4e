#include "hartree_lab/error.hpp"

namespace hartree_lab {

std::string_view to_string(ErrorKind kind) {
  switch (kind) {
  case ErrorKind::invalid_argument:
    return "invalid-argument";
  case ErrorKind::grid_mismatch:
    return "grid-mismatch";
  case ErrorKind::grid_overflow:
    return "grid-overflow";
  case ErrorKind::non_smooth_density:
    return "non-smooth-density";
  case ErrorKind::non_repulsive_kernel:
    return "non-repulsive-kernel";
  case ErrorKind::basis_degenerate:
    return "basis-degenerate";
  case ErrorKind::bad_bracket:
    return "bad-bracket";
  case ErrorKind::order_exceeds_sample:
    return "order-exceeds-sample";
  case ErrorKind::unbound_iterate:
    return "unbound-iterate";
  case ErrorKind::eigensolver_failure:
    return "eigensolver-failure";
  case ErrorKind::not_bound:
    return "not-bound";
  case ErrorKind::no_convergence:
    return "no-convergence";
  case ErrorKind::validation:
    return "validation-error";
  case ErrorKind::io:
    return "io-error";
  }
  return "unknown";
}

} // namespace hartree_lab
