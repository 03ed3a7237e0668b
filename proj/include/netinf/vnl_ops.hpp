#pragma once

#include "netinf/effects.hpp"
#include "netinf/params.hpp"
#include "netinf/vnl.hpp"

namespace netinf::node {
struct MobileNodeState;
}

namespace netinf::vnl {

// Delegate side: take over the principal's sessions, bind its identity at
// the local server, ack back toward the (already departing) principal.
Effects accept_delegation(node::MobileNodeState& delegate, const msg::DelegateRequest& request,
                          const msg::Message& envelope, Tick now, const Params& params);

// Delegate side: traffic that arrived for the principal through the binding.
Effects proxy_handle(node::MobileNodeState& delegate, const msg::DelegateData& wrapped,
                     const msg::Message& envelope, Tick now, const Params& params);

// Delegate side: non-Data traffic routed in through the binding (resumes).
Effects proxy_handle_resume(node::MobileNodeState& delegate, const msg::Resume& resume,
                            const msg::Message& envelope, Tick now, const Params& params);

// Principal side, at the destination: ask the delegate for everything it
// holds. Armed with a timeout; no reply means the delegate is gone.
Effects sync_begin(node::MobileNodeState& principal, Tick now, const Params& params);

// Principal side: replay the delegate's buffer, restore counters, resume
// every peer.
Effects sync_apply(node::MobileNodeState& principal, const msg::SyncReply& reply, Tick now,
                   const Params& params);

// Delegate side: answer a sync, release the binding, drop the role.
Effects handle_sync_request(node::MobileNodeState& delegate, const msg::SyncRequest& request,
                            const msg::Message& envelope, Tick now, const Params& params);

// Principal side: the delegate is unreachable or refused — sessions fall
// back to the ordinary cache-then-core procedure.
Effects delegate_lost(node::MobileNodeState& principal, Tick now, const Params& params);

} // namespace netinf::vnl
