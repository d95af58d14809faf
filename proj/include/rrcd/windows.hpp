#pragma once

#include <map>
#include <optional>

namespace rrcd {

struct RegisterWindow {
  int base = 0;
  int length = 0;
};

/// Base-register table: per wavefront, a contiguous window of physical
/// register indices (0..255). Windows never overlap.
class BaseRegisterTable {
 public:
  explicit BaseRegisterTable(int capacity = 256) : capacity_(capacity) {}

  /// First-fit allocation; nullopt when no contiguous range is free.
  /// Throws ConfigError for a bad length or an already resident wavefront.
  std::optional<int> allocate(int wf_id, int length);
  /// Throws ConfigError for an unknown wavefront.
  void release(int wf_id);

  bool resident(int wf_id) const { return windows_.count(wf_id) != 0; }
  /// Throws ConfigError for an unknown wavefront.
  const RegisterWindow& window(int wf_id) const;
  /// base + logical_index; throws ConfigError when outside the window.
  int translate(int wf_id, int logical_index) const;

  const std::map<int, RegisterWindow>& windows() const { return windows_; }
  int capacity() const { return capacity_; }

 private:
  int capacity_;
  std::map<int, RegisterWindow> windows_;
};

}  // namespace rrcd
