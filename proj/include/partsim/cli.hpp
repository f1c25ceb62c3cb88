#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace partsim {

enum class ExitCode : int {
    Success = 0,
    Findings = 1,      // validation findings, invalid scenario, bad usage
    RuntimeError = 2,  // HALT_SYSTEM or a run that never delivered
    IoError = 3,       // unreadable input, unwritable output, malformed CSV
};

/// `partsim validate|run|report ...`. `args` excludes the program name.
ExitCode run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace partsim
