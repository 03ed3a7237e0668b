#!/usr/bin/env python3
"""Regenerate scenarios/scale100.scn (committed output; run only to change it)."""

import random

ENS = 10
NODES = 100
OUT = "scenarios/scale100.scn"


def main() -> None:
    rng = random.Random(42)
    lines = []
    lines.append("# Generated by tools/gen_scale.py — do not edit by hand.")
    lines.append("# Stress topology: 100 nodes over 10 edge networks, one lossy")
    lines.append("# inter-edge link, periodic moves and a steady send mix.")
    lines.append("scenario scale100")
    lines.append("")
    lines.append("topology")
    for i in range(1, ENS + 1):
        lines.append(f"  en EN{i}")
    lines.append("  link EN9 EN10 latency=10 loss=0.01")
    lines.append("")
    lines.append("nodes")
    for i in range(1, NODES + 1):
        home = (i - 1) % ENS + 1
        vnl = "yes" if i % 3 == 0 else "no"
        lines.append(f"  node MN{i} home=EN{home} vnl={vnl}")
    lines.append("")
    lines.append("sessions")
    sessions = []
    for k in range(1, NODES // 2 + 1):
        a, b = f"MN{2 * k - 1}", f"MN{2 * k}"
        sessions.append((f"S{k}", a, b))
        lines.append(f"  session S{k} {a} {b}")
    lines.append("")
    lines.append("actions")

    actions = []
    # Periodic movers: every second node hops to a pseudo-random edge network.
    transit_until = {}
    for i in range(2, NODES + 1, 2):
        label = f"MN{i}"
        at = 50 + (i * 7) % 300
        for _ in range(4):
            dest = f"EN{rng.randrange(1, ENS + 1)}"
            travel = rng.randrange(20, 60)
            delegate = " delegate" if i % 3 == 0 else ""
            actions.append((at, f"move {label} -> {dest} travel={travel}{delegate}"))
            transit_until[label] = at + travel
            at = transit_until[label] + rng.randrange(40, 200)
    # Steady sends across every session, both directions.
    for sid, a, b in sessions:
        base = rng.randrange(20, 120)
        for j in range(30):
            at = base + j * rng.randrange(20, 80)
            sender = a if j % 2 == 0 else b
            bytes_ = rng.choice([32, 64, 200, 900])
            actions.append((at, f"send {sender} {sid} bytes={bytes_}"))

    actions.sort(key=lambda pair: pair[0])
    for at, text in actions:
        lines.append(f"  at {at} {text}")
    lines.append("")
    lines.append("params")
    lines.append("  until=4000")
    lines.append("")

    with open(OUT, "w", encoding="utf-8") as handle:
        handle.write("\n".join(lines))
    print(f"wrote {OUT}: {len(actions)} actions")


if __name__ == "__main__":
    main()
