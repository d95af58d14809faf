#include "rrcd/mode.hpp"

#include <algorithm>
#include <cctype>
#include <string>

#include "rrcd/errors.hpp"

namespace rrcd {

std::string_view to_string(Mode m) {
  switch (m) {
    case Mode::Conv: return "conv";
    case Mode::Suav: return "suav";
    case Mode::Rrcd: return "rrcd";
  }
  return "?";
}

Mode parse_mode(std::string_view s) {
  std::string n(s);
  std::transform(n.begin(), n.end(), n.begin(), [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  if (n == "conv") return Mode::Conv;
  if (n == "suav") return Mode::Suav;
  if (n == "rrcd") return Mode::Rrcd;
  throw ConfigError("unknown mode '" + std::string(s) + "' (expected conv, suav or rrcd)");
}

}  // namespace rrcd
