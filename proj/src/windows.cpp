#include "rrcd/windows.hpp"

#include <string>
#include <vector>

#include "rrcd/errors.hpp"

namespace rrcd {

std::optional<int> BaseRegisterTable::allocate(int wf_id, int length) {
  if (length <= 0 || length > capacity_) {
    throw ConfigError("window length " + std::to_string(length) + " does not fit the slice");
  }
  if (resident(wf_id)) throw ConfigError("wavefront " + std::to_string(wf_id) + " already has a window");
  std::vector<bool> used(static_cast<std::size_t>(capacity_), false);
  for (const auto& [id, w] : windows_) {
    for (int i = 0; i < w.length; ++i) used[static_cast<std::size_t>(w.base + i)] = true;
  }
  int run = 0;
  for (int i = 0; i < capacity_; ++i) {
    run = used[static_cast<std::size_t>(i)] ? 0 : run + 1;
    if (run == length) {
      const int base = i - length + 1;
      windows_[wf_id] = RegisterWindow{base, length};
      return base;
    }
  }
  return std::nullopt;
}

void BaseRegisterTable::release(int wf_id) {
  if (windows_.erase(wf_id) == 0) throw ConfigError("unknown wavefront " + std::to_string(wf_id));
}

const RegisterWindow& BaseRegisterTable::window(int wf_id) const {
  auto it = windows_.find(wf_id);
  if (it == windows_.end()) throw ConfigError("unknown wavefront " + std::to_string(wf_id));
  return it->second;
}

int BaseRegisterTable::translate(int wf_id, int logical_index) const {
  const auto& w = window(wf_id);
  if (logical_index < 0 || logical_index >= w.length) {
    throw ConfigError("register index " + std::to_string(logical_index) + " outside window of wavefront " +
                      std::to_string(wf_id) + " (length " + std::to_string(w.length) + ")");
  }
  return w.base + logical_index;
}

}  // namespace rrcd
