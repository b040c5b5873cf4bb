"""Sparse labstate algebra: spin bases, signal configurations, amplitudes.

A labstate is an unnormalized complex linear combination of basis terms
``(spin labels, signal configuration)`` attached to one stage of an
apparatus network.  Amplitudes are plain Python ``complex``; squared norms
are detection rates relative to the source production rate, so states are
deliberately not normalized to unity.

Spin lives in up to two photon slots.  Three two-dimensional bases are
supported: plane polarization HV, circular LR and diagonal +/-, related by

    |L> = (|H> + i|V>)/sqrt2        |+> = (|H> + |V>)/sqrt2
    |R> = (|H> - i|V>)/sqrt2        |-> = (|H> - |V>)/sqrt2

which reproduces |R> = (1-i)/2 {|+> + i|->} and |L> = (1-i)/2 {i|+> + |->}.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Iterator, Mapping

import numpy as np

from .errors import (
    BadSlot,
    DuplicateDetector,
    InvalidConfig,
    SlotMismatch,
    StageMismatch,
    UnknownBasis,
)

# Coefficients with modulus below this are dropped from sparse maps.
PRUNE_TOL = 1e-15

_SQRT2_INV = 1.0 / math.sqrt(2.0)


@dataclass(frozen=True)
class SpinBasis:
    """A named two-dimensional polarization basis."""

    name: str
    labels: tuple[str, str]


HV = SpinBasis("HV", ("H", "V"))
LR = SpinBasis("LR", ("L", "R"))
DIAG = SpinBasis("DIAG", ("+", "-"))

BASES: dict[str, SpinBasis] = {b.name: b for b in (HV, LR, DIAG)}

# Each matrix column expresses one basis state in H/V coordinates.
_TO_HV: dict[str, np.ndarray] = {
    "HV": np.eye(2, dtype=complex),
    "LR": np.array([[1.0, 1.0], [1.0j, -1.0j]], dtype=complex) * _SQRT2_INV,
    "DIAG": np.array([[1.0, 1.0], [1.0, -1.0]], dtype=complex) * _SQRT2_INV,
}

# label -> (basis name, component index); labels are unique across bases.
LABEL_BASIS: dict[str, tuple[str, int]] = {
    label: (basis.name, k)
    for basis in BASES.values()
    for k, label in enumerate(basis.labels)
}

_CHANGE_CACHE: dict[tuple[str, str], np.ndarray] = {}


def _require_basis(name: str) -> None:
    if name not in BASES:
        raise UnknownBasis(f"unknown spin basis {name!r}")


def change_matrix(src: str, dst: str) -> np.ndarray:
    """Unitary 2x2 matrix taking src-basis components to dst-basis components."""
    key = (src, dst)
    cached = _CHANGE_CACHE.get(key)
    if cached is None:
        _require_basis(src)
        _require_basis(dst)
        cached = _TO_HV[dst].conj().T @ _TO_HV[src]
        cached.flags.writeable = False
        _CHANGE_CACHE[key] = cached
    return cached


def spin_overlap(bra_label: str, ket_label: str) -> complex:
    """Inner product <bra|ket> between single-slot basis labels."""
    try:
        bra_basis, bra_idx = LABEL_BASIS[bra_label]
        ket_basis, ket_idx = LABEL_BASIS[ket_label]
    except KeyError as exc:
        raise UnknownBasis(f"unknown spin label {exc.args[0]!r}") from None
    if bra_basis == ket_basis:
        return 1.0 + 0.0j if bra_idx == ket_idx else 0.0j
    return complex(change_matrix(ket_basis, bra_basis)[bra_idx, ket_idx])


@dataclass(frozen=True, eq=False)
class SpinVector:
    """Dense spin state over one or two photon slots.

    ``amps`` has ``2**len(bases)`` components; slot 0 is the most
    significant index (slot 0 = signal/"s" photon, slot 1 = idler/"p").
    """

    bases: tuple[str, ...]
    amps: np.ndarray

    def __post_init__(self):
        for name in self.bases:
            _require_basis(name)
        amps = np.asarray(self.amps, dtype=complex).reshape(-1).copy()
        if amps.shape != (2 ** len(self.bases),):
            raise SlotMismatch(
                f"{len(self.bases)} slot(s) need {2 ** len(self.bases)} components, "
                f"got {amps.shape[0]}"
            )
        if not np.all(np.isfinite(amps.view(float))):
            raise InvalidConfig("non-finite spin amplitude")
        amps.flags.writeable = False
        object.__setattr__(self, "amps", amps)

    @property
    def slots(self) -> int:
        return len(self.bases)

    def norm_sq(self) -> float:
        return float(np.vdot(self.amps, self.amps).real)


def change_spin_basis(v: SpinVector, target: str, slot: int) -> SpinVector:
    """Re-express one slot of a spin vector in another basis (norm preserving)."""
    _require_basis(target)
    if not 0 <= slot < v.slots:
        raise BadSlot(f"slot {slot} outside 0..{v.slots - 1}")
    if v.bases[slot] == target:
        return v
    m = change_matrix(v.bases[slot], target)
    t = v.amps.reshape((2,) * v.slots)
    t = np.moveaxis(np.tensordot(m, t, axes=([1], [slot])), 0, slot)
    bases = v.bases[:slot] + (target,) + v.bases[slot + 1 :]
    return SpinVector(bases, t.reshape(-1))


@dataclass(frozen=True)
class DetectorId:
    """An elementary signal detector, unique within its stage."""

    stage: int
    label: str


@dataclass(frozen=True)
class SignalConfig:
    """The set of a stage's detectors carrying a signal; empty set = void."""

    stage: int
    labels: frozenset[str]

    @classmethod
    def of(cls, stage: int, labels: Iterable[str]) -> "SignalConfig":
        seq = list(labels)
        if len(seq) != len(set(seq)):
            raise DuplicateDetector(f"detector excited twice in {seq}")
        return cls(stage, frozenset(seq))

    @property
    def excited(self) -> frozenset[DetectorId]:
        return frozenset(DetectorId(self.stage, lbl) for lbl in self.labels)

    def is_void(self) -> bool:
        return not self.labels

    def __len__(self) -> int:
        return len(self.labels)

    def __str__(self) -> str:
        return "{" + ",".join(sorted(self.labels)) + f"}}@{self.stage}"


# A basis term: per-slot spin labels tensored with a signal configuration.
Term = tuple[tuple[str, ...], SignalConfig]


def _validate_spins(spins: tuple[str, ...], slot_bases: tuple[str, ...]) -> None:
    if len(spins) != len(slot_bases):
        raise SlotMismatch(
            f"term has {len(spins)} spin label(s), state has {len(slot_bases)} slot(s)"
        )
    for j, label in enumerate(spins):
        info = LABEL_BASIS.get(label)
        if info is None:
            raise UnknownBasis(f"unknown spin label {label!r}")
        if info[0] != slot_bases[j]:
            raise UnknownBasis(
                f"spin label {label!r} is not in slot-{j} basis {slot_bases[j]}"
            )


@dataclass(frozen=True, eq=False)
class LabState:
    """Sparse labstate: map from (spin labels, SignalConfig) to amplitude.

    All stored terms are expressed in one per-slot basis assignment
    (``slot_bases``), so distinct keys are orthonormal and the squared norm
    is the plain coefficient sum of squares.
    """

    stage: int
    slot_bases: tuple[str, ...]
    terms: Mapping[Term, complex]

    @classmethod
    def from_terms(
        cls,
        stage: int,
        slot_bases: tuple[str, ...],
        entries: Iterable[tuple[tuple[str, ...], SignalConfig, complex]],
    ) -> "LabState":
        acc: dict[Term, complex] = {}
        for spins, config, coeff in entries:
            spins = tuple(spins)
            _validate_spins(spins, slot_bases)
            if config.stage != stage:
                raise StageMismatch(
                    f"config at stage {config.stage} in a stage-{stage} state"
                )
            c = complex(coeff)
            if not (math.isfinite(c.real) and math.isfinite(c.imag)):
                raise InvalidConfig("non-finite amplitude")
            key = (spins, config)
            acc[key] = acc.get(key, 0.0j) + c
        return cls(stage, tuple(slot_bases), _pruned(acc))

    @classmethod
    def zero(cls, stage: int, slot_bases: tuple[str, ...] = ()) -> "LabState":
        return cls(stage, tuple(slot_bases), {})

    @classmethod
    def single(
        cls,
        stage: int,
        spins: tuple[str, ...],
        config: SignalConfig,
        coeff: complex = 1.0,
    ) -> "LabState":
        bases = tuple(LABEL_BASIS[s][0] for s in spins)
        return cls.from_terms(stage, bases, [(spins, config, coeff)])

    # -- algebra ----------------------------------------------------------

    def __add__(self, other: "LabState") -> "LabState":
        if self.stage != other.stage:
            raise StageMismatch(f"stage {self.stage} + stage {other.stage}")
        if not other.terms:
            return self
        if not self.terms:
            return other
        other = other.to_bases(self.slot_bases)
        acc = dict(self.terms)
        for key, c in other.terms.items():
            acc[key] = acc.get(key, 0.0j) + c
        return LabState(self.stage, self.slot_bases, _pruned(acc))

    def __mul__(self, scalar: complex) -> "LabState":
        c = complex(scalar)
        return LabState(
            self.stage,
            self.slot_bases,
            _pruned({k: v * c for k, v in self.terms.items()}),
        )

    __rmul__ = __mul__

    def __neg__(self) -> "LabState":
        return self * (-1.0)

    def __len__(self) -> int:
        return len(self.terms)

    def is_zero(self) -> bool:
        return not self.terms

    def norm_sq(self) -> float:
        return sum(abs(c) ** 2 for c in self.terms.values())

    def inner(self, other: "LabState") -> complex:
        """Hermitian inner product, conjugate-linear in self."""
        if self.stage != other.stage:
            raise StageMismatch(f"stage {self.stage} vs stage {other.stage}")
        if len(self.slot_bases) != len(other.slot_bases):
            raise SlotMismatch("slot counts differ")
        other = other.to_bases(self.slot_bases)
        small, big = self.terms, other.terms
        if len(big) < len(small):
            return sum(
                big[k].conjugate() * small[k] for k in big if k in small
            ).conjugate()
        return sum(small[k].conjugate() * big[k] for k in small if k in big)

    def to_bases(self, target: tuple[str, ...]) -> "LabState":
        """Unitarily re-express every slot in the target bases."""
        target = tuple(target)
        if len(target) != len(self.slot_bases):
            raise SlotMismatch("slot counts differ")
        if target == self.slot_bases:
            return self
        terms = dict(self.terms)
        for j, (cur, tgt) in enumerate(zip(self.slot_bases, target)):
            if cur == tgt:
                continue
            m = change_matrix(cur, tgt)
            tgt_labels = BASES[tgt].labels
            nxt: dict[Term, complex] = {}
            for (spins, config), c in terms.items():
                col = LABEL_BASIS[spins[j]][1]
                for row in (0, 1):
                    w = m[row, col]
                    if w == 0:
                        continue
                    key = (spins[:j] + (tgt_labels[row],) + spins[j + 1 :], config)
                    nxt[key] = nxt.get(key, 0.0j) + c * w
            terms = nxt
        return LabState(self.stage, target, _pruned(terms))

    # -- views ------------------------------------------------------------

    def items(self) -> Iterator[tuple[Term, complex]]:
        return iter(self.terms.items())

    def configs(self) -> set[SignalConfig]:
        return {config for (_, config) in self.terms}

    def project_config(self, config: SignalConfig) -> "LabState":
        """Keep only terms whose signal configuration equals ``config``."""
        kept = {k: v for k, v in self.terms.items() if k[1] == config}
        return LabState(self.stage, self.slot_bases, kept)

    def __repr__(self) -> str:  # pragma: no cover - debugging aid
        parts = [
            f"({c:.4g})*{'x'.join(spins) or '1'}*{cfg}"
            for (spins, cfg), c in sorted(
                self.terms.items(), key=lambda kv: (sorted(kv[0][1].labels), kv[0][0])
            )
        ]
        return f"LabState(stage={self.stage}, {' + '.join(parts) or '0'})"


def _pruned(acc: dict[Term, complex]) -> dict[Term, complex]:
    return {k: v for k, v in acc.items() if abs(v) >= PRUNE_TOL}
