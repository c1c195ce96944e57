#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "kencl/report_io.hpp"

namespace kencl::cli {

enum ExitCode : int {
  kOk = 0,
  kVerificationFailure = 1,
  kUsage = 2,
  kHypothesisUnmet = 3,
  kNumericalFailure = 4,
};

std::string version_string();

/// Entry point; `args` excludes the program name.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

/// Executes a validated configuration. Output paths are resolved against `run_dir` and
/// recorded in `record`.
int execute(const io::RunConfig& config, const std::filesystem::path& run_dir, io::RunRecord& record,
            std::ostream& out, std::ostream& err);

}  // namespace kencl::cli
