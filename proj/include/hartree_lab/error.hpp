#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace hartree_lab {

enum class ErrorKind {
  invalid_argument,
  grid_mismatch,
  grid_overflow,
  non_smooth_density,
  non_repulsive_kernel,
  basis_degenerate,
  bad_bracket,
  order_exceeds_sample,
  unbound_iterate,
  eigensolver_failure,
  not_bound,
  no_convergence,
  validation,
  io,
};

std::string_view to_string(ErrorKind kind);

class LabError : public std::runtime_error {
public:
  LabError(ErrorKind kind, const std::string &what)
      : std::runtime_error(std::string(to_string(kind)) + ": " + what),
        kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

private:
  ErrorKind kind_;
};

} // namespace hartree_lab
