#pragma once

namespace parted {

inline constexpr const char* kVersion = "1.0.0";

/// Entry point of the `parted` command. Exit codes: 0 success, 1 validation
/// failure, 2 usage, I/O or configuration error.
int cli_main(int argc, const char* const* argv);

}  // namespace parted
