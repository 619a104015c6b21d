#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace floweval::cli {

/// Exit-code contract. Each outcome class has exactly one code so CI
/// pipelines can branch on the result.
inline constexpr int kExitOk = 0;         // success, all configured gates pass
inline constexpr int kExitGateFail = 1;   // a quality gate failed
inline constexpr int kExitParse = 2;      // strict-mode parse error
inline constexpr int kExitIo = 3;         // file/config/usage problem
inline constexpr int kExitBackend = 4;    // backend unreachable after retries
inline constexpr int kExitDegraded = 5;   // validation study exceeded failure budget

/// Runs the full CLI in-process; `args` excludes argv[0]. All regular output
/// goes to `out`, diagnostics to `err`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace floweval::cli
