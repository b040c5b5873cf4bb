"""Stages, semi-unitary transitions, and the composed effective evolution.

A network is a chain of stages connected by transitions.  Each transition is
given only on its *effective* input basis (the terms actually reachable from
the source); semi-unitarity on that domain is what conserves total rates.

Transitions come in two flavors:

* spin-keyed rules map a full basis term ``(spin labels, config)`` to an
  arbitrary next-stage labstate (used where optics act on polarization);
* spin-inert rules are keyed by signal configuration only and carry any
  incoming spin factor through unchanged (most apparatus elements).
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
import numpy as np

from .errors import (
    GapInChain,
    InvalidConfig,
    RankDeficient,
    StageMismatch,
    UnknownDetector,
    UnmatchedTerm,
)
from .labstate import LABEL_BASIS, LabState, SignalConfig, Term

DEFAULT_TOL = 1e-10

_FORBIDDEN_LABEL_CHARS = set(',&"\n\t ')


@dataclass(frozen=True)
class Stage:
    """An indexed stage and its ordered list of detector labels."""

    index: int
    detectors: tuple[str, ...]

    def __post_init__(self):
        if self.index < 0:
            raise InvalidConfig("stage index must be >= 0")
        object.__setattr__(self, "detectors", tuple(self.detectors))
        seen = set()
        for label in self.detectors:
            if not label or set(label) & _FORBIDDEN_LABEL_CHARS:
                raise InvalidConfig(f"bad detector label {label!r}")
            if label in seen:
                raise InvalidConfig(f"duplicate detector {label!r} in stage {self.index}")
            seen.add(label)

    def position(self, label: str) -> int:
        try:
            return self.detectors.index(label)
        except ValueError:
            raise UnknownDetector(f"stage {self.index} has no detector {label!r}") from None

    def config(self, *labels: str) -> SignalConfig:
        for label in labels:
            self.position(label)
        return SignalConfig.of(self.index, labels)


@dataclass(frozen=True, eq=False)
class TransferMatrix:
    """Complex amplitudes from input channels to screen sites (columns = channels)."""

    entries: np.ndarray

    def __post_init__(self):
        m = np.asarray(self.entries, dtype=complex).copy()
        if m.ndim != 2 or m.shape[0] < 1 or m.shape[1] < 1:
            raise InvalidConfig(f"transfer matrix must be 2-D, got shape {m.shape}")
        if not np.all(np.isfinite(m.view(float))):
            raise InvalidConfig("non-finite transfer amplitude")
        m.flags.writeable = False
        object.__setattr__(self, "entries", m)

    @property
    def n_sites(self) -> int:
        return self.entries.shape[0]

    @property
    def n_channels(self) -> int:
        return self.entries.shape[1]

    def defect(self) -> float:
        """Max deviation of the column Gram matrix from the identity."""
        g = self.entries.conj().T @ self.entries
        return float(np.abs(g - np.eye(self.n_channels)).max())

    def column(self, a: int) -> np.ndarray:
        return self.entries[:, a]


def as_transfer(v) -> TransferMatrix:
    return v if isinstance(v, TransferMatrix) else TransferMatrix(np.asarray(v))


def orthonormalize(raw, tol: float = 1e-12) -> TransferMatrix:
    """Gram-Schmidt the columns into an exactly semi-unitary transfer matrix.

    Already semi-unitary input (defect <= tol) is returned unchanged.
    """
    raw = as_transfer(raw)
    if raw.defect() <= tol:
        return raw
    m = raw.entries.copy()
    rows, cols = m.shape
    if cols > rows:
        raise RankDeficient(f"{cols} columns cannot be orthonormal in {rows} dims")
    for j in range(cols):
        for i in range(j):
            m[:, j] -= np.vdot(m[:, i], m[:, j]) * m[:, i]
        # second pass keeps orthogonality at double precision
        for i in range(j):
            m[:, j] -= np.vdot(m[:, i], m[:, j]) * m[:, i]
        norm = float(np.linalg.norm(m[:, j]))
        if norm < 1e-12:
            raise RankDeficient(f"column {j} linearly dependent on earlier columns")
        m[:, j] /= norm
    return TransferMatrix(m)


def random_isometry(n: int, k: int, rng: np.random.Generator) -> np.ndarray:
    """Haar-ish n x k complex matrix with orthonormal columns."""
    if k > n:
        raise RankDeficient(f"no {n}x{k} isometry")
    z = rng.standard_normal((n, k)) + 1j * rng.standard_normal((n, k))
    q, r = np.linalg.qr(z)
    return q[:, :k] * np.sign(np.diagonal(r))[np.newaxis, :k]


def fraunhofer_columns(sites: int, fringes: float = 2.5) -> TransferMatrix:
    """Two-point-source far-field family, orthonormalized.

    Site i carries phases exp(+-i*pi*fringes*x_i/S) from the two channels,
    with x_i centered site offsets; purely illustrative, any semi-unitary
    matrix is equally valid.
    """
    if sites < 2:
        raise InvalidConfig("need at least 2 screen sites")
    x = np.arange(1, sites + 1, dtype=float) - (sites + 1) / 2.0
    phase = math.pi * fringes * x / sites
    raw = np.stack([np.exp(1j * phase), np.exp(-1j * phase)], axis=1) / math.sqrt(sites)
    return orthonormalize(raw)


@dataclass(frozen=True, eq=False)
class TransitionRule:
    """One line of a transition: input term -> next-stage labstate.

    ``spins is None`` marks a spin-inert rule: it applies to any spin term
    on ``config`` and its (spinless) output tensors with the incoming spin.
    """

    spins: tuple[str, ...] | None
    config: SignalConfig
    output: LabState

    def __post_init__(self):
        if self.spins is not None:
            object.__setattr__(self, "spins", tuple(self.spins))
        if self.output.stage != self.config.stage + 1:
            raise StageMismatch(
                f"rule output at stage {self.output.stage}, expected {self.config.stage + 1}"
            )
        if self.spins is None and self.output.slot_bases != ():
            raise InvalidConfig("spin-inert rule output must be spinless")

    @property
    def key(self):
        return self.config if self.spins is None else (self.spins, self.config)


@dataclass(frozen=True, eq=False)
class StageTransition:
    """Semi-unitary map between consecutive stages, given rule by rule."""

    from_stage: int
    to_stage: int
    rules: tuple[TransitionRule, ...]

    def __post_init__(self):
        object.__setattr__(self, "rules", tuple(self.rules))
        if self.to_stage != self.from_stage + 1:
            raise InvalidConfig("transitions connect consecutive stages only")
        if not self.rules:
            raise InvalidConfig("transition needs at least one rule")
        inert = self.rules[0].spins is None
        by_key = {}
        input_bases: tuple[str, ...] | None = None
        for rule in self.rules:
            if (rule.spins is None) != inert:
                raise InvalidConfig("cannot mix spin-keyed and spin-inert rules")
            if rule.config.stage != self.from_stage:
                raise StageMismatch(
                    f"rule input at stage {rule.config.stage}, expected {self.from_stage}"
                )
            if rule.key in by_key:
                raise InvalidConfig(f"duplicate rule input {rule.key}")
            by_key[rule.key] = rule
            if not inert:
                bases = tuple(LABEL_BASIS[s][0] for s in rule.spins)
                if input_bases is None:
                    input_bases = bases
                elif bases != input_bases:
                    raise InvalidConfig(
                        "all spin-keyed rule inputs must share one basis per slot"
                    )
        object.__setattr__(self, "_by_key", by_key)
        object.__setattr__(self, "_inert", inert)
        object.__setattr__(self, "_input_bases", input_bases)

    @property
    def inert(self) -> bool:
        return self._inert

    @property
    def input_bases(self) -> tuple[str, ...] | None:
        """Per-slot spin bases the keyed rules are written in (None if inert)."""
        return self._input_bases

    def rule_for(self, key):
        return self._by_key.get(key)


def apply(transition: StageTransition, psi: LabState) -> LabState:
    """Linear extension of the transition rules to a whole labstate."""
    if psi.stage != transition.from_stage:
        raise StageMismatch(
            f"state at stage {psi.stage}, transition starts at {transition.from_stage}"
        )
    to_stage = transition.to_stage
    if psi.is_zero():
        return LabState.zero(to_stage, psi.slot_bases)

    if transition.inert:
        acc: dict[Term, complex] = {}
        for (spins, config), c in psi.items():
            rule = transition.rule_for(config)
            if rule is None:
                raise UnmatchedTerm(f"no rule for {config}")
            for ((), out_config), w in rule.output.items():
                key = (spins, out_config)
                acc[key] = acc.get(key, 0.0j) + c * w
        return LabState.from_terms(
            to_stage, psi.slot_bases, [(s, cfg, c) for (s, cfg), c in acc.items()]
        )

    psi = psi.to_bases(transition.input_bases)
    out = LabState.zero(to_stage)
    for (spins, config), c in psi.items():
        rule = transition.rule_for((spins, config))
        if rule is None:
            raise UnmatchedTerm(f"no rule for {'x'.join(spins)} on {config}")
        contrib = rule.output * c
        out = contrib if out.is_zero() else out + contrib
    return out


@dataclass(frozen=True, eq=False)
class TransitionReport:
    """Semi-unitarity check result; never raises, failure lives in the report."""

    from_stage: int
    to_stage: int
    defect: float
    tol: float

    @property
    def passed(self) -> bool:
        return self.defect <= self.tol

    def __str__(self) -> str:
        word = "ok" if self.passed else "FAIL"
        return (
            f"transition {self.from_stage}->{self.to_stage}: "
            f"defect {self.defect:.3e} (tol {self.tol:.1e}) {word}"
        )


def validate_semi_unitarity(
    transition: StageTransition, tol: float = DEFAULT_TOL
) -> TransitionReport:
    """Max deviation of <U e_a, U e_b> from delta_ab over the effective basis."""
    rules = transition.rules
    defect = 0.0
    if transition.inert:
        # spinless config-lincomb outputs: plain coefficient inner products
        vecs = [dict(r.output.terms) for r in rules]
        for a, va in enumerate(vecs):
            for b in range(a, len(vecs)):
                vb = vecs[b]
                g = sum(va[k].conjugate() * vb[k] for k in va if k in vb)
                defect = max(defect, abs(g - (1.0 if a == b else 0.0)))
    else:
        outs = [r.output for r in rules]
        for a, ua in enumerate(outs):
            for b in range(a, len(outs)):
                g = ua.inner(outs[b])
                defect = max(defect, abs(g - (1.0 if a == b else 0.0)))
    return TransitionReport(transition.from_stage, transition.to_stage, defect, tol)


@dataclass(frozen=True, eq=False)
class Network:
    """Immutable apparatus description: stages, transitions, source, parameters."""

    slots: int
    stages: tuple[Stage, ...]
    transitions: tuple[StageTransition, ...]
    source: LabState
    params: dict = field(default_factory=dict)
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        object.__setattr__(self, "stages", tuple(self.stages))
        object.__setattr__(
            self, "transitions", tuple(sorted(self.transitions, key=lambda t: t.from_stage))
        )

    def stage(self, index: int) -> Stage:
        for st in self.stages:
            if st.index == index:
                return st
        raise UnknownDetector(f"no stage {index}")

    @property
    def final_stage(self) -> Stage:
        return self.stages[-1]

    def check_chain(self) -> None:
        indices = [st.index for st in self.stages]
        if indices != list(range(len(indices))):
            raise GapInChain(f"stage indices {indices} not contiguous from 0")
        froms = [t.from_stage for t in self.transitions]
        if froms != list(range(len(indices) - 1)):
            raise GapInChain(f"transitions cover {froms}, need 0..{len(indices) - 2}")
        if self.source.stage != 0:
            raise GapInChain("source must live at stage 0")

    def validate(self, tol: float = DEFAULT_TOL) -> "NetworkReport":
        problems: list[str] = []
        try:
            self.check_chain()
        except GapInChain as exc:
            problems.append(str(exc))
        by_index = {st.index: st for st in self.stages}
        for t in self.transitions:
            for rule in t.rules:
                for label in rule.config.labels:
                    if label not in by_index[t.from_stage].detectors:
                        problems.append(
                            f"transition {t.from_stage}->{t.to_stage}: "
                            f"unknown input detector {label!r}"
                        )
                for (_, cfg) in rule.output.terms:
                    for label in cfg.labels:
                        if label not in by_index[t.to_stage].detectors:
                            problems.append(
                                f"transition {t.from_stage}->{t.to_stage}: "
                                f"unknown output detector {label!r}"
                            )
        for (_, cfg) in self.source.terms:
            for label in cfg.labels:
                if label not in by_index.get(0, Stage(0, ())).detectors:
                    problems.append(f"source references unknown detector {label!r}")
        reports = tuple(validate_semi_unitarity(t, tol) for t in self.transitions)
        return NetworkReport(reports, tuple(problems), tol)


@dataclass(frozen=True, eq=False)
class NetworkReport:
    transition_reports: tuple[TransitionReport, ...]
    problems: tuple[str, ...]
    tol: float

    @property
    def max_defect(self) -> float:
        return max((r.defect for r in self.transition_reports), default=0.0)

    @property
    def ok(self) -> bool:
        return not self.problems and all(r.passed for r in self.transition_reports)

    def __str__(self) -> str:
        lines = [str(r) for r in self.transition_reports]
        lines.extend(self.problems)
        lines.append("valid" if self.ok else "INVALID")
        return "\n".join(lines)


@dataclass(frozen=True, eq=False)
class EffectiveOperator:
    """Composed evolution: image of every stage-0 effective basis term."""

    source_stage: int
    final_stage: int
    final_detectors: tuple[str, ...]
    basis: tuple[Term, ...]
    images: dict

    def final_state(self, source: LabState) -> LabState:
        out: LabState | None = None
        for key, coeff in source.items():
            contrib = self.images[key] * coeff
            out = contrib if out is None else out + contrib
        if out is None:
            bases = next(iter(self.images.values())).slot_bases if self.images else ()
            return LabState.zero(self.final_stage, bases)
        return out


def compose(net: Network) -> EffectiveOperator:
    """Chain all transitions into a single map on the source effective basis."""
    net.check_chain()
    basis = tuple(key for key, _ in sorted(net.source.items(), key=_term_sort_key))
    images = {}
    for (spins, config) in basis:
        psi = LabState.single(0, spins, config) if spins else LabState.from_terms(
            0, (), [((), config, 1.0)]
        )
        for t in net.transitions:
            psi = apply(t, psi)
        images[(spins, config)] = psi
    return EffectiveOperator(
        0, net.final_stage.index, net.final_stage.detectors, basis, images
    )


def _term_sort_key(item):
    (spins, config), _ = item
    return (sorted(config.labels), spins)
