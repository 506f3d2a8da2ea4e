#pragma once

// Command dispatch: RunConfig in, records and an exit status out.

#include "hartree_lab/config.hpp"
#include "hartree_lab/error.hpp"
#include "hartree_lab/records.hpp"

#include <string>
#include <string_view>
#include <vector>

namespace hartree_lab {

/// Process exit statuses. Every computational failure is nonzero.
enum class ExitCode : int {
  ok = 0,
  internal = 1,
  validation_error = 2,
  not_bound = 3,
  no_convergence = 4,
  check_failed = 5,
  io_error = 6,
};

std::string_view to_string(ExitCode code);
ExitCode exit_code_for(ErrorKind kind);

struct RunOutcome {
  ExitCode code = ExitCode::ok;
  std::vector<ResultRecord> records; // ordered by key
  std::string message;
};

/// Record kind produced by each command.
std::string record_kind(Command command);

RunOutcome run(const RunConfig &config);

/// json-lines, or the csv plot table of the command's record kind.
std::string render(const std::vector<ResultRecord> &records, const RunConfig &config);

/// run() plus output: standard output for "-", otherwise an atomic write.
/// Nothing is written when a failure leaves no records.
RunOutcome run_and_write(const RunConfig &config);

/// Full front end: parse, run, write; returns the process status.
int cli_main(int argc, const char *const *argv);

} // namespace hartree_lab
