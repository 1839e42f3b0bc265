#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace hnn::cli {

enum ExitCode : int {
  kOk = 0,
  kUsage = 1,
  kDataError = 2,
  kNumericalError = 3,
  kSelftestFailed = 4,
};

/// Entry point shared by the executable and the tests. args excludes argv[0].
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

/// Rows of points in `src` coordinates converted to `dst`, one point per
/// line, shortest round-trip decimals. Throws DataError naming the first invalid
/// row (1-based).
std::string convert_csv(const std::string& csv, const std::string& src, const std::string& dst);

}  // namespace hnn::cli
