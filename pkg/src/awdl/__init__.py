"""Clean-room AWDL protocol stack.

Subpackages by concern:

- `wire`: bit-exact codec for action frames, TLVs, data frames, addressing
- `sync`: TU/AW timing model, next-window prediction, sync-error estimation
- `election`: master election state machine
- `chanseq`: channel sequences, slot mapping, airtime accounting
- `node`: a full per-node state machine composing the above
- `sim`: deterministic discrete-event simulator with collectors
- `pcap`: classic pcap + minimal radiotap reader/writer
- `cli`: `awdl` command line entry point (dissect / calibrate /
  analyze-sync / simulate)
"""

__version__ = "0.1.0"
