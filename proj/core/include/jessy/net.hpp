#pragma once

#include <cstdint>
#include <vector>

namespace jessy {

using ProcessId = std::uint32_t;
using GroupId = std::uint32_t;
using Tick = std::uint64_t;

/// Non-intersecting replication groups; the first member leads.
struct Group {
  GroupId id = 0;
  std::vector<ProcessId> members;
  std::vector<std::uint32_t> objects;

  ProcessId leader() const { return members.front(); }
  std::size_t majority() const { return members.size() / 2 + 1; }
};

}  // namespace jessy
