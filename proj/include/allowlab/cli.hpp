#pragma once

#include <iosfwd>

namespace allowlab {

namespace exit_code {
inline constexpr int kOk = 0;
inline constexpr int kViolated = 1;
inline constexpr int kParseError = 2;
inline constexpr int kIoError = 3;
inline constexpr int kReplayMismatch = 4;
inline constexpr int kConfigError = 5;
}  // namespace exit_code

/// Entry point of the `allowlab` tool; writes only to the given streams.
int run_cli(int argc, char const* const* argv, std::ostream& out, std::ostream& err);

}  // namespace allowlab
