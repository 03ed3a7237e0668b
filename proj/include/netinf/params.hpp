#pragma once

#include "netinf/ids.hpp"

namespace netinf {

enum class UpdatePolicy { Lazy, Eager };

// Run-wide tunables. The first five are scenario-settable; the rest are
// protocol constants surfaced here so tests can pin them.
struct Params {
  Tick cache_ttl{100};
  Tick lookup_ttl{50};
  Tick resume_timeout{30};
  std::size_t mtu{1500};
  std::uint64_t seed_default{1};

  UpdatePolicy update_policy{UpdatePolicy::Lazy};

  Tick retransmit_every{20};
  int retransmit_max{5};
  int map_retry_max{5};
  std::size_t send_buffer_cap{1024};
  std::size_t reorder_cap{256};
  std::size_t delegate_buffer_cap{4096};
};

} // namespace netinf
