#pragma once

#include <string>
#include <vector>

namespace lnn {

struct ProcessResult {
  bool launched = false;
  bool timed_out = false;
  int exit_code = -1;  // -1 when killed by a signal or not launched
  std::string stdout_text;
  std::string stderr_text;
  double seconds = 0;
};

/// Runs `executable args...` (PATH lookup), writes `input` to its stdin and
/// collects stdout/stderr. The child is killed once `time_limit_seconds`
/// elapse.
ProcessResult run_process(const std::string& executable, const std::vector<std::string>& args,
                          const std::string& input, double time_limit_seconds);

}  // namespace lnn
