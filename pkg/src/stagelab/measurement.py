"""Generalized Kraus operators, POVM elements, and outcome rate tables.

For an outcome signature (a final-stage signal configuration) the Kraus
operator is the composed evolution projected onto that configuration, spin
structure kept.  The POVM element is its Gram matrix on the stage-0
effective basis; its expectation in the source state is the outcome rate.
Summed over all non-zero signatures the POVM elements reproduce the
effective identity, which is exactly rate conservation.
"""
from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .errors import UnknownDetector, UnknownSignature
from .labstate import LabState, SignalConfig, Term
from .network import EffectiveOperator, Network, compose

# An outcome signature is a final-stage signal configuration.
OutcomeSignature = SignalConfig


@dataclass(frozen=True, eq=False)
class KrausOperator:
    """Evolution component ending in one outcome signature.

    ``action`` maps each stage-0 effective basis term to the (spin-carrying)
    final-stage labstate supported on the signature alone; an empty map is
    the zero operator.
    """

    signature: OutcomeSignature
    basis: tuple[Term, ...]
    action: dict

    def is_zero(self) -> bool:
        return all(state.is_zero() for state in self.action.values())


@dataclass(frozen=True, eq=False)
class PovmElement:
    """Positive matrix on the stage-0 effective basis; rate = <source|E|source>."""

    signature: OutcomeSignature
    basis: tuple[Term, ...]
    matrix: np.ndarray

    @property
    def scalar(self) -> float:
        """The single entry, for the usual one-dimensional effective source."""
        if self.matrix.shape != (1, 1):
            raise UnknownSignature("POVM element is not scalar; source has several terms")
        return float(self.matrix[0, 0].real)

    def expectation(self, source: LabState) -> float:
        c = np.array([source.terms.get(k, 0.0j) for k in self.basis], dtype=complex)
        return float((c.conj() @ self.matrix @ c).real)


def kraus(u: EffectiveOperator, sig: OutcomeSignature) -> KrausOperator:
    """Project the composed evolution onto one outcome signature."""
    if sig.stage != u.final_stage:
        raise UnknownDetector(
            f"signature at stage {sig.stage}, network ends at stage {u.final_stage}"
        )
    unknown = sig.labels - set(u.final_detectors)
    if unknown:
        raise UnknownDetector(f"not final-stage detectors: {sorted(unknown)}")
    action = {key: image.project_config(sig) for key, image in u.images.items()}
    return KrausOperator(sig, u.basis, action)


def povm(m: KrausOperator) -> PovmElement:
    """Gram matrix of the Kraus action: E = (M conj-transpose) M."""
    k = len(m.basis)
    e = np.zeros((k, k), dtype=complex)
    states = [m.action[key] for key in m.basis]
    for a in range(k):
        for b in range(a, k):
            g = states[a].inner(states[b])
            e[a, b] = g
            e[b, a] = g.conjugate()
    return PovmElement(m.signature, m.basis, e)


def completeness_defect(povms: Iterable[PovmElement], source: LabState) -> float:
    """Max-norm distance of the summed POVM elements from the effective identity."""
    povms = list(povms)
    if not povms:
        return float(bool(source.terms))
    basis = povms[0].basis
    total = np.zeros((len(basis), len(basis)), dtype=complex)
    for e in povms:
        total += e.matrix
    return float(np.abs(total - np.eye(len(basis))).max())


@dataclass(frozen=True, eq=False)
class RateTable:
    """Outcome signature -> nonnegative rate, in units of the source rate.

    ``rate`` carries the |source|^2 multiplier; ``normalized_rate`` is per
    unit source rate.  Rows cover the non-zero signatures only; absent rows
    read as rate zero.
    """

    stage: int
    detector_order: tuple[str, ...]
    rows: tuple[tuple[SignalConfig, float], ...]
    source_norm_sq: float

    def signature_str(self, sig: SignalConfig) -> str:
        order = {lbl: k for k, lbl in enumerate(self.detector_order)}
        return "&".join(sorted(sig.labels, key=lambda l: order.get(l, len(order))))

    def signatures(self) -> list[SignalConfig]:
        return [sig for sig, _ in self.rows]

    def rate(self, sig) -> float:
        sig = self._coerce(sig)
        for row_sig, value in self.rows:
            if row_sig == sig:
                return value
        return 0.0

    def normalized(self, sig) -> float:
        return self.rate(sig) / self.source_norm_sq

    def total(self) -> float:
        return sum(value for _, value in self.rows)

    def as_dict(self) -> dict[str, float]:
        return {self.signature_str(sig): value for sig, value in self.rows}

    def _coerce(self, sig) -> SignalConfig:
        if isinstance(sig, SignalConfig):
            return sig
        if isinstance(sig, str):
            labels = [p for p in sig.split("&") if p]
            return SignalConfig.of(self.stage, labels)
        return SignalConfig.of(self.stage, sig)

    # -- serialization ------------------------------------------------------

    def to_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(["signature", "rate", "normalized_rate"])
        for sig, value in self.rows:
            writer.writerow(
                [self.signature_str(sig), repr(value), repr(value / self.source_norm_sq)]
            )
        return buf.getvalue()

    def to_json_obj(self) -> dict:
        return {
            "stage": self.stage,
            "source_norm_sq": self.source_norm_sq,
            "rows": [
                {
                    "signature": self.signature_str(sig),
                    "rate": value,
                    "normalized_rate": value / self.source_norm_sq,
                }
                for sig, value in self.rows
            ],
        }

    def to_json(self) -> str:
        return json.dumps(self.to_json_obj(), indent=2)


def make_table(
    stage: int,
    detector_order: Sequence[str],
    entries: dict[SignalConfig, float],
    source_norm_sq: float,
) -> RateTable:
    order = {lbl: k for k, lbl in enumerate(detector_order)}
    rows = sorted(
        entries.items(),
        key=lambda kv: tuple(sorted(order.get(l, len(order)) for l in kv[0].labels)),
    )
    return RateTable(stage, tuple(detector_order), tuple(rows), source_norm_sq)


def povm_elements(net: Network) -> list[PovmElement]:
    """POVM elements for every signature with non-zero amplitude."""
    u = compose(net)
    final = u.final_state(net.source)
    sigs = sorted(final.configs(), key=lambda c: sorted(c.labels))
    return [povm(kraus(u, sig)) for sig in sigs]


def rates(net: Network) -> RateTable:
    """Outcome/coincidence rates via the POVM route, one row per signature."""
    u = compose(net)
    final = u.final_state(net.source)
    entries: dict[SignalConfig, float] = {}
    for sig in final.configs():
        element = povm(kraus(u, sig))
        entries[sig] = element.expectation(net.source)
    return make_table(
        net.final_stage.index,
        net.final_stage.detectors,
        entries,
        net.source.norm_sq(),
    )


def marginal(table: RateTable, keep: Iterable[str]) -> RateTable:
    """Sum rates over signatures that agree on the kept detector subset."""
    keep = set(keep)
    unknown = keep - set(table.detector_order)
    if unknown:
        raise UnknownDetector(f"not final-stage detectors: {sorted(unknown)}")
    grouped: dict[SignalConfig, float] = {}
    for sig, value in table.rows:
        projected = SignalConfig(table.stage, sig.labels & keep)
        grouped[projected] = grouped.get(projected, 0.0) + value
    return make_table(table.stage, table.detector_order, grouped, table.source_norm_sq)


def max_row_difference(a: RateTable, b: RateTable) -> float:
    """Largest per-signature rate discrepancy, treating absent rows as zero."""
    da, db = dict(a.rows), dict(b.rows)
    keys = set(da) | set(db)
    return max((abs(da.get(k, 0.0) - db.get(k, 0.0)) for k in keys), default=0.0)
