#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace cloakvit::cli {

enum ExitCode : int {
  kOk = 0,
  kUsage = 2,
  kIoFormat = 3,
  kVerificationFailed = 4,
};

/// Entry point of the `cloakvit` binary; argv[0] is the program name.
int run(const std::vector<std::string>& argv, std::ostream& out, std::ostream& err);

}  // namespace cloakvit::cli
