#pragma once

#include <string>
#include <string_view>

namespace qzero {

struct ProcessResult {
    int exit_code = -1;  ///< -1 when terminated by a signal
    std::string out;
    std::string err;
};

/// Runs `command` through /bin/sh, feeding `input` on stdin and collecting
/// stdout and stderr. Throws IoError when the process cannot be started.
ProcessResult run_command(const std::string& command, std::string_view input);

}  // namespace qzero
