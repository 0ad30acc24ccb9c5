#pragma once

#include <ostream>

namespace rsw::cli {

/// Exit codes of the command-line front end.
enum Exit : int {
  ok = 0,
  verification_failure = 1,
  bad_arguments = 2,
  window_violation = 3,
};

/// Runs `rsw <field|trajectory|residual|commutators|map> [options]`.
/// Data goes to --out (or `out` when --out is "-"); diagnostics and summaries
/// go to `err`.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace rsw::cli
