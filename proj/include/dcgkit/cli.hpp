#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace dcgkit::cli {

enum ExitCode : int { ok = 0, failure = 1, input_error = 2, degenerate = 3 };

// Entry point of the dcgkit binary; args excludes the program name.
int run(const std::vector<std::string>& args);

std::string sha256_hex(std::string_view bytes);
std::string sha256_file(const std::filesystem::path& path);

}  // namespace dcgkit::cli
