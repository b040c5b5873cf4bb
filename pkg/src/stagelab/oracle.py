"""Brute-force rate verification in the full per-stage Hilbert spaces.

Independently of the sparse effective-operator engine, this module
materializes every stage's full space (spin tensor 2^#detectors signal
space) as a dense vector, turns each transition into an explicit matrix on
those spaces, multiplies through, and reads rates off the final amplitudes.

Transition rules only cover the effective input basis; the remaining
columns are filled with an arbitrary orthonormal completion, which cannot
influence rates on reachable states (their amplitudes are identically
zero).  Two completion strategies are provided so that independence can be
asserted by direct comparison.  Above ``dense_cap`` matrix entries the
multiplication uses the effective columns only, which is equal to the full
product because every skipped column multiplies an exact zero.

Index layout (documented so dumps are reproducible): a basis state is
``spin_index * 2**D + config_bits`` where detector list order defines bit
positions little-endian (detector k of the stage <-> bit k), and the spin
index stacks slot labels big-endian (slot 0 most significant).
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .errors import RankDeficient, TooLarge, UnmatchedTerm
from .labstate import LABEL_BASIS, LabState, SignalConfig, change_matrix
from .measurement import RateTable, make_table
from .network import Network, Stage, StageTransition

MAX_TOTAL_DIM = 2**24
DEFAULT_DENSE_CAP = 2**20


@dataclass(frozen=True, eq=False)
class FullStateVector:
    """Dense amplitudes over spin x signal space at one stage."""

    stage: int
    slot_bases: tuple[str, ...]
    detector_order: tuple[str, ...]
    amplitudes: np.ndarray

    @property
    def spin_dim(self) -> int:
        return 2 ** len(self.slot_bases)

    def norm_sq(self) -> float:
        return float(np.vdot(self.amplitudes, self.amplitudes).real)


@dataclass(frozen=True, eq=False)
class OracleRun:
    states: tuple[FullStateVector, ...]
    dense: tuple[bool, ...]
    table: RateTable

    @property
    def norms(self) -> list[float]:
        return [s.norm_sq() for s in self.states]


def _spin_index(spins: tuple[str, ...]) -> int:
    idx = 0
    for label in spins:
        idx = idx * 2 + LABEL_BASIS[label][1]
    return idx


def _config_bits(config: SignalConfig, order: dict[str, int]) -> int:
    bits = 0
    for label in config.labels:
        bits |= 1 << order[label]
    return bits


def _spin_change_full(src: tuple[str, ...], dst: tuple[str, ...]) -> np.ndarray | None:
    if src == dst:
        return None
    m = np.eye(1, dtype=complex)
    for s, d in zip(src, dst):
        m = np.kron(m, change_matrix(s, d))
    return m


def _embed(state: LabState, bases: tuple[str, ...], order: dict[str, int]) -> np.ndarray:
    signal_dim = 2 ** len(order)
    vec = np.zeros((2 ** len(bases)) * signal_dim, dtype=complex)
    for (spins, config), c in state.to_bases(bases).items():
        vec[_spin_index(spins) * signal_dim + _config_bits(config, order)] += c
    return vec


def _stage_bases(net: Network) -> list[tuple[str, ...]]:
    """Canonical per-stage spin bases: source bases, updated by keyed outputs."""
    bases = [net.source.slot_bases]
    for t in net.transitions:
        if t.inert:
            bases.append(bases[-1])
        else:
            bases.append(t.rules[0].output.slot_bases)
    return bases


class _TransitionMatrix:
    """Columns of one full-space transition, with optional completion."""

    def __init__(
        self,
        transition: StageTransition,
        src_stage: Stage,
        dst_stage: Stage,
        src_bases: tuple[str, ...],
        dst_bases: tuple[str, ...],
        dense_cap: int,
        completion: str,
        rng: np.random.Generator,
    ):
        self.spin_dim = 2 ** len(src_bases)
        src_order = {lbl: k for k, lbl in enumerate(src_stage.detectors)}
        dst_order = {lbl: k for k, lbl in enumerate(dst_stage.detectors)}
        self.dim_in = self.spin_dim * 2 ** len(src_order)
        self.dim_out = self.spin_dim * 2 ** len(dst_order)

        # align incoming coordinates with the basis the rules are written in
        self.pre_rotation = None
        col_bases = src_bases
        if not transition.inert and transition.input_bases != src_bases:
            col_bases = transition.input_bases
            self.pre_rotation = _spin_change_full(src_bases, col_bases)

        cols: dict[int, np.ndarray] = {}
        signal_in = 2 ** len(src_order)
        if transition.inert:
            for rule in transition.rules:
                bits = _config_bits(rule.config, src_order)
                out = _embed_inert(rule.output, dst_order)
                for s in range(self.spin_dim):
                    cols[s * signal_in + bits] = _lift_spin(out, s, self.spin_dim)
        else:
            for rule in transition.rules:
                idx = _spin_index(rule.spins) * signal_in + _config_bits(
                    rule.config, src_order
                )
                cols[idx] = _embed(rule.output, dst_bases, dst_order)
        self.columns = cols
        self.matched = np.fromiter(sorted(cols), dtype=np.int64)

        self.dense = self.dim_out * self.dim_in <= dense_cap
        self.matrix = None
        if self.dense:
            self.matrix = _complete(
                self.dim_out, self.dim_in, cols, completion, rng
            )

    def apply(self, v: np.ndarray) -> np.ndarray:
        if self.pre_rotation is not None:
            v = (self.pre_rotation @ v.reshape(self.spin_dim, -1)).reshape(-1)
        if self.matrix is not None:
            return self.matrix @ v
        # column mode: verify nothing lives outside the effective domain,
        # then sum effective columns only (skipped columns multiply zeros)
        mask = np.ones(self.dim_in, dtype=bool)
        mask[self.matched] = False
        stray = float(np.abs(v[mask]).max(initial=0.0))
        if stray > 1e-12 * max(1.0, float(np.abs(v).max(initial=0.0))):
            raise UnmatchedTerm(
                f"amplitude {stray:.2e} on a basis state with no transition rule"
            )
        out = np.zeros(self.dim_out, dtype=complex)
        for idx in self.matched:
            c = v[idx]
            if c != 0:
                out += c * self.columns[idx]
        return out


def _embed_inert(output: LabState, dst_order: dict[str, int]) -> np.ndarray:
    vec = np.zeros(2 ** len(dst_order), dtype=complex)
    for ((), config), c in output.items():
        vec[_config_bits(config, dst_order)] += c
    return vec


def _lift_spin(signal_vec: np.ndarray, spin_idx: int, spin_dim: int) -> np.ndarray:
    """Place a signal-space column into the full space at a fixed spin index."""
    signal_dim = signal_vec.shape[0]
    out = np.zeros(spin_dim * signal_dim, dtype=complex)
    out[spin_idx * signal_dim : (spin_idx + 1) * signal_dim] = signal_vec
    return out


def _complete(
    dim_out: int,
    dim_in: int,
    cols: dict[int, np.ndarray],
    strategy: str,
    rng: np.random.Generator,
) -> np.ndarray:
    """Assemble the full matrix with orthonormal completion columns."""
    if dim_out < dim_in:
        raise RankDeficient(
            f"no semi-unitary extension from dimension {dim_in} to {dim_out}"
        )
    m = np.zeros((dim_out, dim_in), dtype=complex)
    matched = sorted(cols)
    for idx in matched:
        m[:, idx] = cols[idx]
    unmatched = [k for k in range(dim_in) if k not in cols]
    if not unmatched:
        return m
    eff = m[:, matched]

    if strategy == "basis":
        used_rows = sorted({r for c in cols.values() for r in np.nonzero(c)[0]})
        free_rows = [r for r in range(dim_out) if r not in set(used_rows)]
        extra_needed = len(unmatched) - len(free_rows)
        completion_cols: list[np.ndarray] = []
        for r in free_rows[: len(unmatched)]:
            col = np.zeros(dim_out, dtype=complex)
            col[r] = 1.0
            completion_cols.append(col)
        if extra_needed > 0:
            # effective images span only part of their own row support;
            # the leftover directions inside that block complete the set
            block = eff[used_rows, :]
            null = scipy.linalg.null_space(block.conj().T)
            if null.shape[1] < extra_needed:
                raise RankDeficient("orthonormal completion does not exist")
            for j in range(extra_needed):
                col = np.zeros(dim_out, dtype=complex)
                col[used_rows] = null[:, j]
                completion_cols.append(col)
    elif strategy == "random":
        k = len(unmatched)
        cand = rng.standard_normal((dim_out, k)) + 1j * rng.standard_normal((dim_out, k))
        if eff.size:
            cand -= eff @ (eff.conj().T @ cand)
        q, r = np.linalg.qr(cand)
        if float(np.abs(np.diagonal(r)).min()) < 1e-10:
            raise RankDeficient("random completion degenerate; retry with another seed")
        completion_cols = [q[:, j] for j in range(k)]
    else:
        raise ValueError(f"unknown completion strategy {strategy!r}")

    for idx, col in zip(unmatched, completion_cols):
        m[:, idx] = col
    return m


def oracle_evolution(
    net: Network,
    completion: str = "basis",
    dense_cap: int = DEFAULT_DENSE_CAP,
    rng: np.random.Generator | None = None,
) -> OracleRun:
    """Evolve the source through explicit full-space matrices; return everything."""
    net.check_chain()
    rng = rng if rng is not None else np.random.default_rng(0)
    bases = _stage_bases(net)
    spin_dim = 2**net.slots
    for st in net.stages:
        if spin_dim * 2 ** len(st.detectors) > MAX_TOTAL_DIM:
            raise TooLarge(
                f"stage {st.index} dimension {spin_dim * 2 ** len(st.detectors)} "
                f"exceeds {MAX_TOTAL_DIM}"
            )

    order0 = {lbl: k for k, lbl in enumerate(net.stages[0].detectors)}
    vec = _embed(net.source, bases[0], order0)
    states = [FullStateVector(0, bases[0], net.stages[0].detectors, vec)]
    dense_flags = []
    for t in net.transitions:
        tm = _TransitionMatrix(
            t,
            net.stage(t.from_stage),
            net.stage(t.to_stage),
            bases[t.from_stage],
            bases[t.to_stage],
            dense_cap,
            completion,
            rng,
        )
        vec = tm.apply(vec)
        dense_flags.append(tm.dense)
        states.append(
            FullStateVector(
                t.to_stage, bases[t.to_stage], net.stage(t.to_stage).detectors, vec
            )
        )

    final = net.final_stage
    signal_dim = 2 ** len(final.detectors)
    probs = np.abs(vec.reshape(spin_dim, signal_dim)) ** 2
    per_config = probs.sum(axis=0)
    entries: dict[SignalConfig, float] = {}
    for bits in np.nonzero(per_config)[0]:
        labels = [final.detectors[k] for k in range(len(final.detectors)) if bits >> k & 1]
        entries[SignalConfig.of(final.index, labels)] = float(per_config[bits])
    table = make_table(final.index, final.detectors, entries, net.source.norm_sq())
    return OracleRun(tuple(states), tuple(dense_flags), table)


def oracle_rates(
    net: Network,
    completion: str = "basis",
    dense_cap: int = DEFAULT_DENSE_CAP,
    rng: np.random.Generator | None = None,
) -> RateTable:
    """Rate table recomputed by brute force, independent of the sparse engine."""
    return oracle_evolution(net, completion, dense_cap, rng).table
