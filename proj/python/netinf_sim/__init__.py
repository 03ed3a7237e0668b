"""Python face of the edge-mobility simulator.

Thin wrappers over the compiled `_netinf` module: scenario text in, plain
dicts and bytes out. The heavy lifting (parsing, the event loop, reports)
stays in C++; this layer only decodes JSON and fills in environment seeds.
"""

import json as _json
import os as _os

try:
    from . import _netinf as _core
except ImportError:  # build-tree layout: extension sits beside the package
    import _netinf as _core

HEADER_BYTES = _core.HEADER_BYTES

__all__ = [
    "HEADER_BYTES",
    "compare",
    "reformat",
    "run",
    "tunnel_decode",
    "tunnel_encode",
    "validate",
]


def validate(text):
    """Parse scenario text; return its shape or raise ValueError."""
    return _core.validate(text)


def reformat(text):
    """Canonical rendering of a scenario (a fixed point of itself)."""
    return _core.reformat(text)


def _env_seed():
    raw = _os.environ.get("NETINF_SIM_SEED")
    if raw is None:
        return None
    try:
        return int(raw, 10)
    except ValueError:
        raise ValueError(f"NETINF_SIM_SEED must be an integer, got {raw!r}") from None


def run(text, *, seed=None, until=None, update_policy=None):
    """Run a scenario and return a dict with:

    - ``report``: the metrics report as nested dicts
    - ``report_json``: the same report in canonical JSON text
    - ``trace``: event trace lines in order
    - ``delivered``: {(node label, session id): [payload bytes, ...]}

    Seed precedence: ``seed`` argument, then the scenario's ``params seed``,
    then ``NETINF_SIM_SEED``, then 1.
    """
    raw = _core.run(
        text,
        seed=seed,
        until=until,
        update_policy=update_policy,
        env_seed=_env_seed(),
    )
    return {
        "report": _json.loads(raw["report_json"]),
        "report_json": raw["report_json"],
        "trace": raw["trace"],
        "delivered": raw["delivered"],
    }


def compare(a, b, keys=()):
    """Rows of {key, a, b, delta=b-a}; accepts report dicts or JSON text."""
    a_text = a if isinstance(a, str) else _json.dumps(a)
    b_text = b if isinstance(b, str) else _json.dumps(b)
    return _core.compare(a_text, b_text, list(keys))


def tunnel_encode(src, dst, payload, outer, mtu):
    """Encapsulate payload bytes; returns header plus payload on the wire.

    ``src`` is 32 hex chars; ``dst`` is 32 hex chars or an ``ext:`` uri;
    ``outer`` is a rendered locator like ``gl:[ar:edge:EN1>ar:host:H1]``.
    Raises ValueError when header plus payload exceed ``mtu``.
    """
    return _core.tunnel_encode(src, dst, payload, outer, mtu)


def tunnel_decode(data):
    """Decode tunnel_encode output into header fields and payload bytes."""
    return _core.tunnel_decode(data)
