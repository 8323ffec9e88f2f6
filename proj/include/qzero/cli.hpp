#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace qzero::cli {

/// Environment variable holding the bearer token for remote embedding providers.
inline constexpr const char* kAuthTokenEnv = "QZERO_API_KEY";

/// Environment variable overriding the default GPT-2 tokenizer directory.
inline constexpr const char* kTokenizerDirEnv = "QZERO_TOKENIZER_DIR";

/// Runs `qzero <args...>` (args exclude the program name). Returns the exit status.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace qzero::cli
