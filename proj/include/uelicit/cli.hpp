#pragma once

#include <cstddef>
#include <iosfwd>
#include <string_view>
#include <vector>

namespace uelicit {

// Entry point of the `uelicit` executable. Returns the process exit status.
int run_cli(int argc, const char* const* argv, std::istream& in, std::ostream& out, std::ostream& err);

// "3..7" (inclusive) or "2,4,8".
std::vector<std::size_t> parse_range(std::string_view text);

} // namespace uelicit
