#pragma once

#include <cstdint>
#include <string>
#include <string_view>

namespace distdyn {

// All numeric text output goes through one formatter (printf %.17g) so that
// identical runs produce byte-identical files and digests.
std::string format_double(double v);

std::uint64_t fnv1a64(std::string_view data);
std::string fnv1a64_hex(std::string_view data);

}  // namespace distdyn
