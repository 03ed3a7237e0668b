#pragma once

#include "netinf/messages.hpp"

namespace netinf {

enum class TimerKind { ResumeTimeout, Retransmit, MapRetry, SyncTimeout };

// Node-owned timer. All fields the fire handler needs to lazily validate
// that the timer still matters; stale timers are no-ops.
struct Timer {
  TimerKind kind{TimerKind::ResumeTimeout};
  NodeId owner;
  std::string sid;
  std::uint64_t seq{0};
  NodeId peer;
  std::uint32_t epoch{0};
};

struct TimerArm {
  Tick at{0};
  Timer timer;
};

struct Outbound {
  msg::Endpoint dst;
  msg::Body body;
  // Identity the message claims as sender; defaults to the emitting node.
  // Delegates answer under the principal's id.
  std::optional<NodeId> claimed_src;
  // Explicit reply hint; defaults to the emitting node's current address.
  std::optional<Where> reply_to;
  bool omit_reply_to{false}; // acks: never a hint source
};

// What one handler invocation wants the engine to do. Handlers are pure in
// (state, input, tick): every side effect rides back through this.
struct Effects {
  std::vector<Outbound> messages;
  std::vector<TimerArm> timers;
  std::vector<std::string> trace;
  bool abort{false};
  std::string abort_why;

  void merge(Effects&& other);
};

} // namespace netinf
