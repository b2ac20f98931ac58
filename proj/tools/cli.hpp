#pragma once

// Command-line front end. Kept as a library so tests can drive the
// subcommands in-process with captured streams.

#include <atomic>
#include <iosfwd>
#include <string>
#include <vector>

namespace symtyler::cli {

enum ExitCode : int {
  kOk = 0,
  kValidation = 1,    // usage, validation, I/O
  kNotConverged = 2,  // max_iter or diverged
  kInterrupted = 130,
};

/// args excludes the program name. `cancel`, when given, interrupts simulate.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err,
        const std::atomic<bool>* cancel = nullptr);

}  // namespace symtyler::cli
