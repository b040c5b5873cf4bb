"""Which-path information measure.

``phi`` is the probability that a single detected photon's outcome
signature pins down the full path through the apparatus, conditioned on a
detection anywhere: the summed rate of the declared "revealing" signatures
per unit source rate.

Revealing signatures are declarative.  Each preset ships a default set
(eraser: coincidences with the early-reflection detectors S+1/S+4; zoned
screen: the single-slit zones; plain double slit: none), but at degenerate
parameter points those defaults can be physically wrong - e.g. an eraser
with r1 = r2 = 0 and the final beamsplitter removed reveals paths through
S+2/S+3 instead - so callers may override the set; no automatic inference
is attempted.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable

from .errors import UnknownDetector, UnknownSignature
from .labstate import SignalConfig
from .measurement import RateTable, rates
from .network import Network


@dataclass(frozen=True, eq=False)
class PathDisambiguation:
    """The outcome signatures declared to give full path information."""

    revealing: frozenset[SignalConfig]

    @classmethod
    def from_signatures(cls, sigs: Iterable[SignalConfig]) -> "PathDisambiguation":
        return cls(frozenset(sigs))

    @classmethod
    def from_detectors(cls, table: RateTable, labels: Iterable[str]) -> "PathDisambiguation":
        """Every enumerated signature containing one of the given detectors."""
        labels = set(labels)
        unknown = labels - set(table.detector_order)
        if unknown:
            raise UnknownDetector(f"not final-stage detectors: {sorted(unknown)}")
        return cls(frozenset(s for s in table.signatures() if s.labels & labels))


@dataclass(frozen=True, eq=False)
class WhichPathResult:
    phi: float
    contributions: dict[str, float]
    table: RateTable


def default_disambiguation(net: Network, table: RateTable) -> PathDisambiguation:
    kind = net.meta.get("experiment")
    if kind == "dcqe":
        return PathDisambiguation.from_detectors(table, ["S+1", "S+4"])
    if kind == "wheeler":
        cfg = net.meta["config"]
        single_zone = [
            str(i)
            for i in range(1, cfg.R + cfg.S + cfg.T + 1)
            if i <= cfg.R or i > cfg.R + cfg.S
        ]
        return PathDisambiguation.from_detectors(table, single_zone)
    # plain double slit and the Walborn presets reveal nothing by default
    return PathDisambiguation(frozenset())


def which_path(net: Network, d: PathDisambiguation | None = None) -> WhichPathResult:
    table = rates(net)
    if d is None:
        d = default_disambiguation(net, table)
    enumerated = set(table.signatures())
    missing = d.revealing - enumerated
    if missing:
        raise UnknownSignature(
            f"revealing signatures not enumerated: "
            f"{sorted(table.signature_str(s) for s in missing)}"
        )
    contributions = {
        table.signature_str(sig): table.normalized(sig)
        for sig in sorted(d.revealing, key=lambda s: sorted(s.labels))
    }
    phi = sum(contributions.values())
    return WhichPathResult(phi, contributions, table)
