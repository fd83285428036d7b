#!/usr/bin/env python3
"""The election, driven by hand.

Steps three election machines through the canonical situations: fresh
activation at metric 60, the version-dependent bump, adoption, being
overtaken, loop prevention, and the 96-window no-master timeout.
"""

import random

from awdl import election
from awdl.election import FrameObservation, ProtocolVersion
from awdl.wire import MacAddress


def mac(last):
    return MacAddress(bytes([0x02, 0, 0, 0, 0, last]))


def show(label, st):
    role = "master" if st.is_master else "slave"
    print(f"  {label}: metric {st.self_metric:3d}, follows {st.top_master} ({st.top_metric}), {role}")


def advert(st, sender=None):
    """What a node would put in its election TLVs."""
    return FrameObservation(
        sender=sender or st.self_address,
        self_metric=st.self_metric,
        top_master=st.top_master,
        top_metric=st.top_metric,
        path=st.announced_path(),
        sync_parent=st.sync_parent,
    )


print("activation: everyone starts as its own master at metric 60")
a = election.start_interface(0, mac(1), ProtocolVersion.V2)
b = election.start_interface(0, mac(2), ProtocolVersion.V3)
c = election.start_interface(0, mac(3), ProtocolVersion.V3)
for label, st in (("a(v2)", a), ("b(v3)", b), ("c(v3)", c)):
    show(label, st)

print("\nafter the 2 s listen window each redraws from its version range")
election.bump_self_metric(a, 2_000_000, random.Random(1))
election.bump_self_metric(b, 2_000_000, random.Random(2))
election.bump_self_metric(c, 2_000_000, random.Random(3))
for label, st in (("a(v2)", a), ("b(v3)", b), ("c(v3)", c)):
    show(label, st)

print("\nframes spread; everyone adopts the largest advertised metric")
for _ in range(2):  # two gossip rounds are enough in a full mesh
    for dst in (a, b, c):
        for src in (a, b, c):
            if src is not dst:
                election.on_action_frame(dst, advert(src), current_aw=130)
for label, st in (("a(v2)", a), ("b(v3)", b), ("c(v3)", c)):
    show(label, st)
winner = max((a, b, c), key=lambda s: (s.self_metric, s.self_address.octets))
assert a.top_master == b.top_master == c.top_master == winner.self_address
print(f"  -> cluster master: {winner.self_address} (a v3 node, as the ranges guarantee)")

print("\nloop prevention: a node never adopts a parent whose path contains itself")
loopy = FrameObservation(
    sender=mac(9),
    self_metric=999,
    top_master=mac(9),
    top_metric=999,
    path=(a.self_address, mac(9)),  # our own address inside the announced tree
)
before = a.top_master
election.on_action_frame(a, loopy, current_aw=131)
print(f"  a still follows {a.top_master} (unchanged: {a.top_master == before})")

print("\nRSSI gate: weak frames are dropped, the current parent gets a 5 dB bonus")
print(f"  -64 dBm from a stranger: {'accept' if election.filter_frame(a, -64, mac(7)) else 'drop'}")
print(f"  -66 dBm from a stranger: {'accept' if election.filter_frame(a, -66, mac(7)) else 'drop'}")
print(f"  -68 dBm from the parent: {'accept' if election.filter_frame(a, -68, a.sync_parent) else 'drop'}")

print("\nthe master vanishes; after 96 silent windows the survivors move on")
silent_since = a.last_master_frame_aw
tick = silent_since + 96
assert not election.on_aw_tick(a, tick).promoted_on_timeout, "96 windows is still within the timeout"
fx = election.on_aw_tick(a, tick + 1)
print(f"  a at window {tick + 1}: promoted={fx.promoted_on_timeout}, now follows {a.top_master}")
print("  (a slave that was already synchronized keeps its window grid: no resync)")
