#pragma once

#include <cstdint>
#include <string_view>

namespace rrcd {

/// Conv: fault-free at nominal supply. Suav: fault-free at the safe minimum
/// (architecturally identical to Conv). Rrcd: sub-Vmin slice with redirection.
enum class Mode : std::uint8_t { Conv, Suav, Rrcd };

std::string_view to_string(Mode m);
/// "conv", "suav" or "rrcd" (case-insensitive); throws ConfigError otherwise.
Mode parse_mode(std::string_view s);

}  // namespace rrcd
