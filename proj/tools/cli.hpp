#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace lnn::cli {

// Exit codes.
inline constexpr int kVerified = 0;
inline constexpr int kError = 1;
inline constexpr int kExhausted = 2;
inline constexpr int kInconclusive = 3;

int run(int argc, char** argv, std::ostream& out, std::ostream& err);
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace lnn::cli
