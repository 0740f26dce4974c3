#pragma once

#include <iosfwd>

namespace hatescan::cli {

// Exit codes: 0 success, 1 data/runtime error, 2 configuration error.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace hatescan::cli
