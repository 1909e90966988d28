#pragma once

#include <filesystem>
#include <ostream>
#include <string>
#include <vector>

namespace exo {

// Exit codes: 0 every check passed, 2 checks ran and at least one failed,
// 1 input or usage error.
inline constexpr int kExitPass = 0;
inline constexpr int kExitUsage = 1;
inline constexpr int kExitFail = 2;

// `args` excludes the program name.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

// Writes to a sibling temporary and renames it over `path`.
void write_file_atomic(const std::filesystem::path& path, const std::string& contents);

}  // namespace exo
