"""End-to-end smoke of the python bindings against the compiled core."""

from pathlib import Path

import pytest

import netinf_sim as ns

SCENARIOS = Path(__file__).resolve().parents[2] / "scenarios"

INLINE = """scenario smoke

topology
  en EN1
  en EN2

nodes
  node MN1 home=EN1 vnl=no
  node MN2 home=EN2 vnl=no

sessions
  session S1 MN1 MN2

actions
  at 5 send MN1 S1 bytes=16
  at 8 send MN2 S1 bytes=8
"""


def test_validate_reports_the_shape():
    shape = ns.validate(INLINE)
    assert shape["name"] == "smoke"
    assert shape["edge_networks"] == 2
    assert shape["nodes"] == 2
    assert shape["sessions"] == 1
    assert shape["actions"] == 2
    assert shape["seed"] is None


def test_parse_errors_carry_position():
    with pytest.raises(ValueError) as caught:
        ns.validate("scenario broken\n\ntopology\n  en core\n")
    assert "line" in str(caught.value)


def test_reformat_is_a_fixed_point():
    once = ns.reformat(INLINE)
    assert ns.reformat(once) == once
    assert ns.validate(once) == ns.validate(INLINE)


def test_runs_are_deterministic_and_structured():
    first = ns.run(INLINE, seed=3)
    second = ns.run(INLINE, seed=3)
    assert first["report_json"] == second["report_json"]
    assert first["trace"] == second["trace"]

    report = first["report"]
    assert report["report_version"] == 1
    assert report["run"]["seed"] == 3
    assert report["run"]["scenario"] == "smoke"
    assert set(report) == {"report_version", "run", "global", "net", "sessions", "nodes"}
    assert first["trace"][0].startswith("t=")


def test_payloads_come_back_as_bytes():
    delivered = ns.run(INLINE)["delivered"]
    to_mn2 = delivered[("MN2", "S1")]
    to_mn1 = delivered[("MN1", "S1")]
    assert len(to_mn2) == 1 and len(to_mn2[0]) == 16
    assert len(to_mn1) == 1 and len(to_mn1[0]) == 8
    assert isinstance(to_mn2[0], bytes)


def test_env_seed_is_the_weakest_override(monkeypatch):
    monkeypatch.setenv("NETINF_SIM_SEED", "99")
    assert ns.run(INLINE)["report"]["run"]["seed"] == 99
    assert ns.run(INLINE, seed=4)["report"]["run"]["seed"] == 4
    monkeypatch.setenv("NETINF_SIM_SEED", "not-a-number")
    with pytest.raises(ValueError):
        ns.run(INLINE)


def test_policy_comparison_over_a_real_scenario():
    text = (SCENARIOS / "moves5.scn").read_text()
    lazy = ns.run(text, update_policy="lazy")
    eager = ns.run(text, update_policy="eager")
    rows = ns.compare(lazy["report"], eager["report"], ["global.core_msgs"])
    assert rows == [{"key": "global.core_msgs", "a": 15.0, "b": 25.0, "delta": 10.0}]

    with pytest.raises(ValueError):
        ns.run(text, update_policy="sometimes")


def test_shipped_scenario_runs_to_its_known_report():
    report = ns.run((SCENARIOS / "fig2.scn").read_text())["report"]
    assert report["global"]["core_msgs"] == 3
    assert report["global"]["map_requests"] == 1
    assert report["sessions"][0]["state"] == "active"


def test_tunnel_round_trip_and_mtu_refusal():
    src = "00112233445566778899aabbccddeeff"
    outer = "gl:[ar:edge:EN1>ar:host:H1]"
    wire = ns.tunnel_encode(src, "ext:/legacy/printer", b"hello", outer, 1500)
    assert len(wire) == ns.HEADER_BYTES + 5

    fields = ns.tunnel_decode(wire)
    assert fields["payload"] == b"hello"
    assert fields["src"] == src
    assert fields["version"] == 1

    with pytest.raises(ValueError):
        ns.tunnel_encode(src, "ext:/x", b"hello", outer, ns.HEADER_BYTES + 4)
    with pytest.raises(ValueError):
        ns.tunnel_decode(wire[: ns.HEADER_BYTES - 1])
    with pytest.raises(ValueError):
        ns.tunnel_decode(b"XXXX" + wire[4:])
