"""Parameterized constructors for the four built-in experiments.

Every builder returns a validated :class:`~stagelab.network.Network` whose
rate table reproduces the closed-form coincidence/outcome formulas for that
apparatus.  Conventions shared by all presets:

* screen sites carry decimal labels "1".."S"; off-screen detectors carry
  literal labels like "S+1" and "p1";
* beamsplitters store transmission/reflection as nonnegative reals with
  t^2 + r^2 = 1, the reflected branch picking up an explicit factor i;
* the source amplitude multiplies the whole table through |amp|^2.
"""
from __future__ import annotations

import cmath
import enum
import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import InvalidConfig
from .labstate import LabState, SignalConfig
from .network import (
    Network,
    Stage,
    StageTransition,
    TransferMatrix,
    TransitionRule,
    as_transfer,
    fraunhofer_columns,
    random_isometry,
)

CONSTRAINT_TOL = 1e-12


def _check_unit(value: float, what: str, tol: float = CONSTRAINT_TOL) -> None:
    if abs(value - 1.0) > tol:
        raise InvalidConfig(f"{what} = {value!r}, expected 1 within {tol:g}")


def _check_beamsplitter(t: float, r: float, name: str) -> None:
    if t < 0 or r < 0:
        raise InvalidConfig(f"beamsplitter {name}: t, r must be nonnegative")
    _check_unit(t * t + r * r, f"t{name}^2 + r{name}^2")


def _screen_labels(n: int) -> list[str]:
    return [str(i) for i in range(1, n + 1)]


def _inert(stage_from: int, in_labels: Sequence[str], out) -> TransitionRule:
    """Spin-inert rule: configuration lincomb written as {labels: coeff}."""
    output = LabState.from_terms(
        stage_from + 1,
        (),
        [((), SignalConfig.of(stage_from + 1, labels), c) for labels, c in out],
    )
    return TransitionRule(None, SignalConfig.of(stage_from, in_labels), output)


# ---------------------------------------------------------------------------
# double slit
# ---------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class DoubleSlitConfig:
    """Two-slit interference onto an S-site screen."""

    S: int
    alpha: tuple[complex, complex]
    V: TransferMatrix
    source_amp: complex = 1.0

    def __post_init__(self):
        object.__setattr__(self, "V", as_transfer(self.V))
        object.__setattr__(self, "alpha", tuple(complex(a) for a in self.alpha))
        if self.S < 2:
            raise InvalidConfig("screen needs S >= 2 sites")
        if len(self.alpha) != 2:
            raise InvalidConfig("alpha must have two slit amplitudes")
        _check_unit(abs(self.alpha[0]) ** 2 + abs(self.alpha[1]) ** 2, "|a1|^2 + |a2|^2")
        if self.V.entries.shape != (self.S, 2):
            raise InvalidConfig(f"V must be {self.S}x2, got {self.V.entries.shape}")
        if self.V.defect() > 1e-10:
            raise InvalidConfig(f"V not semi-unitary (defect {self.V.defect():.2e})")


def build_double_slit(cfg: DoubleSlitConfig) -> Network:
    stages = (
        Stage(0, ("1",)),
        Stage(1, ("1", "2")),
        Stage(2, tuple(_screen_labels(cfg.S))),
    )
    t01 = StageTransition(
        0, 1, (_inert(0, ["1"], [(["1"], cfg.alpha[0]), (["2"], cfg.alpha[1])]),)
    )
    v = cfg.V.entries
    t12 = StageTransition(
        1,
        2,
        tuple(
            _inert(1, [slit], [([str(i + 1)], v[i, a]) for i in range(cfg.S)])
            for a, slit in enumerate(("1", "2"))
        ),
    )
    source = LabState.single(0, ("H",), SignalConfig.of(0, ["1"]), cfg.source_amp)
    return Network(
        slots=1,
        stages=stages,
        transitions=(t01, t12),
        source=source,
        params={
            "alpha1": cfg.alpha[0],
            "alpha2": cfg.alpha[1],
            "S": cfg.S,
            "source_amp": cfg.source_amp,
        },
        meta={"experiment": "ds", "config": cfg},
    )


# ---------------------------------------------------------------------------
# delayed-choice quantum eraser
# ---------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class DcqeConfig:
    """Pair source at A/B, screen + three beamsplitters with idler detectors."""

    S: int
    alpha: complex
    beta: complex
    t1: float
    r1: float
    t2: float
    r2: float
    t3: float
    r3: float
    V_A: np.ndarray
    V_B: np.ndarray
    source_amp: complex = 1.0

    def __post_init__(self):
        if self.S < 1:
            raise InvalidConfig("screen needs S >= 1 sites")
        object.__setattr__(self, "alpha", complex(self.alpha))
        object.__setattr__(self, "beta", complex(self.beta))
        _check_unit(abs(self.alpha) ** 2 + abs(self.beta) ** 2, "|alpha|^2 + |beta|^2")
        for k, (t, r) in enumerate([(self.t1, self.r1), (self.t2, self.r2), (self.t3, self.r3)], 1):
            _check_beamsplitter(t, r, str(k))
        for name in ("V_A", "V_B"):
            col = np.asarray(getattr(self, name), dtype=complex).reshape(-1)
            if col.shape != (self.S,):
                raise InvalidConfig(f"{name} must have S={self.S} entries")
            _check_unit(float(np.vdot(col, col).real), f"|{name}|^2")
            col.flags.writeable = False
            object.__setattr__(self, name, col)

    def off_screen(self) -> tuple[str, str, str, str]:
        return ("S+1", "S+2", "S+3", "S+4")


def build_dcqe(cfg: DcqeConfig) -> Network:
    screen = _screen_labels(cfg.S)
    late = list(cfg.off_screen())
    stages = (
        Stage(0, ("1",)),
        Stage(1, ("1", "2", "3", "4")),
        Stage(2, tuple(screen + late)),
        Stage(3, tuple(screen + late)),
    )

    # pair production: entangled circular-polarization singlet on either A or B
    haveA = SignalConfig.of(1, ["1", "2"])
    haveB = SignalConfig.of(1, ["3", "4"])
    w = 1.0 / math.sqrt(2.0)
    pair = LabState.from_terms(
        1,
        ("LR", "LR"),
        [
            (("L", "R"), haveA, cfg.alpha * w),
            (("R", "L"), haveA, cfg.alpha * w),
            (("L", "R"), haveB, cfg.beta * w),
            (("R", "L"), haveB, cfg.beta * w),
        ],
    )
    t01 = StageTransition(
        0, 1, (TransitionRule(("H", "H"), SignalConfig.of(0, ["1"]), pair),)
    )

    # screen fan-out plus the first two beamsplitters on the idlers
    ruleA = _inert(
        1,
        ["1", "2"],
        [([s, "S+2"], cfg.V_A[i] * cfg.t1) for i, s in enumerate(screen)]
        + [([s, "S+1"], cfg.V_A[i] * 1j * cfg.r1) for i, s in enumerate(screen)],
    )
    ruleB = _inert(
        1,
        ["3", "4"],
        [([s, "S+3"], cfg.V_B[i] * cfg.t2) for i, s in enumerate(screen)]
        + [([s, "S+4"], cfg.V_B[i] * 1j * cfg.r2) for i, s in enumerate(screen)],
    )
    t12 = StageTransition(1, 2, (ruleA, ruleB))

    # the delayed-choice beamsplitter mixing S+2 and S+3
    rules23 = []
    for s in screen:
        rules23.append(_inert(2, [s, "S+1"], [([s, "S+1"], 1.0)]))
        rules23.append(
            _inert(2, [s, "S+2"], [([s, "S+3"], cfg.t3), ([s, "S+2"], 1j * cfg.r3)])
        )
        rules23.append(
            _inert(2, [s, "S+3"], [([s, "S+2"], cfg.t3), ([s, "S+3"], 1j * cfg.r3)])
        )
        rules23.append(_inert(2, [s, "S+4"], [([s, "S+4"], 1.0)]))
    t23 = StageTransition(2, 3, tuple(rules23))

    source = LabState.single(0, ("H", "H"), SignalConfig.of(0, ["1"]), cfg.source_amp)
    return Network(
        slots=2,
        stages=stages,
        transitions=(t01, t12, t23),
        source=source,
        params={
            "alpha": cfg.alpha,
            "beta": cfg.beta,
            "t1": cfg.t1,
            "r1": cfg.r1,
            "t2": cfg.t2,
            "r2": cfg.r2,
            "t3": cfg.t3,
            "r3": cfg.r3,
            "S": cfg.S,
            "source_amp": cfg.source_amp,
        },
        meta={"experiment": "dcqe", "config": cfg},
    )


def dcqe_coincidence_formulas(cfg: DcqeConfig) -> dict[tuple[str, str], float]:
    """Closed-form coincidence rates, for verification against the engine."""
    out: dict[tuple[str, str], float] = {}
    p0 = abs(cfg.source_amp) ** 2
    for i in range(cfg.S):
        site = str(i + 1)
        a = cfg.alpha * cfg.V_A[i]
        b = cfg.beta * cfg.V_B[i]
        out[(site, "S+1")] = p0 * cfg.r1**2 * abs(a) ** 2
        out[(site, "S+2")] = p0 * abs(1j * cfg.r3 * cfg.t1 * a + cfg.t3 * cfg.t2 * b) ** 2
        out[(site, "S+3")] = p0 * abs(cfg.t3 * cfg.t1 * a + 1j * cfg.r3 * cfg.t2 * b) ** 2
        out[(site, "S+4")] = p0 * cfg.r2**2 * abs(b) ** 2
    return out


# ---------------------------------------------------------------------------
# Wheeler delayed choice
# ---------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class WheelerConfig:
    """Double slit with a zoned screen: R slit-1-only, S mixed, T slit-2-only sites."""

    R: int
    S: int
    T: int
    alpha: tuple[complex, complex]
    V: TransferMatrix
    source_amp: complex = 1.0

    def __post_init__(self):
        object.__setattr__(self, "V", as_transfer(self.V))
        object.__setattr__(self, "alpha", tuple(complex(a) for a in self.alpha))
        if min(self.R, self.S, self.T) < 0 or self.R + self.S + self.T < 2:
            raise InvalidConfig("need nonnegative zone sizes with R+S+T >= 2")
        _check_unit(abs(self.alpha[0]) ** 2 + abs(self.alpha[1]) ** 2, "|a1|^2 + |a2|^2")
        n = self.R + self.S + self.T
        v = self.V.entries
        if v.shape != (n, 2):
            raise InvalidConfig(f"V must be {n}x2")
        if np.abs(v[self.R + self.S :, 0]).max(initial=0.0) > CONSTRAINT_TOL:
            raise InvalidConfig("column 1 must vanish on the slit-2-only zone")
        if np.abs(v[: self.R, 1]).max(initial=0.0) > CONSTRAINT_TOL:
            raise InvalidConfig("column 2 must vanish on the slit-1-only zone")
        if self.V.defect() > 1e-10:
            raise InvalidConfig(f"V not semi-unitary (defect {self.V.defect():.2e})")


def build_wheeler(cfg: WheelerConfig) -> Network:
    ds = DoubleSlitConfig(
        S=cfg.R + cfg.S + cfg.T, alpha=cfg.alpha, V=cfg.V, source_amp=cfg.source_amp
    )
    net = build_double_slit(ds)
    params = dict(net.params)
    params.update({"R": cfg.R, "S": cfg.S, "T": cfg.T})
    return Network(
        slots=net.slots,
        stages=net.stages,
        transitions=net.transitions,
        source=net.source,
        params=params,
        meta={"experiment": "wheeler", "config": cfg},
    )


def wheeler_transfer(
    R: int, S: int, T: int, rng: np.random.Generator | None = None, fringes: float = 2.5
) -> TransferMatrix:
    """Transfer matrix honoring the zone support constraints.

    Column 1 lives on sites 1..R+S, column 2 on R+1..R+S+T; the overlap-zone
    cross term is projected out, then both columns are normalized, which is
    exactly semi-unitarity under the supports.
    """
    n = R + S + T
    if n < 2:
        raise InvalidConfig("need R+S+T >= 2 sites")
    v = np.zeros((n, 2), dtype=complex)
    if rng is not None:
        raw1 = rng.standard_normal(R + S) + 1j * rng.standard_normal(R + S)
        raw2 = rng.standard_normal(S + T) + 1j * rng.standard_normal(S + T)
    else:
        base = fraunhofer_columns(n, fringes).entries
        raw1, raw2 = base[: R + S, 0].copy(), base[R:, 1].copy()
    if R + S:
        v[: R + S, 0] = raw1 / np.linalg.norm(raw1)
    if S + T:
        v[R:, 1] = raw2
        mid = v[R : R + S, 0]
        mid_norm_sq = float(np.vdot(mid, mid).real)
        if mid_norm_sq > 0:
            overlap = np.vdot(mid, v[R : R + S, 1])
            v[R : R + S, 1] -= (overlap / mid_norm_sq) * mid
        norm = np.linalg.norm(v[R:, 1])
        if norm < 1e-12:
            raise InvalidConfig("slit-2 column vanished after projection")
        v[R:, 1] /= norm
    return TransferMatrix(v)


# ---------------------------------------------------------------------------
# Walborn double-slit eraser
# ---------------------------------------------------------------------------


class WalbornMode(enum.Enum):
    NO_POLARIZERS = "no_polarizers"
    CASE_I = "case1"
    CASE_II = "case2"


@dataclass(frozen=True, eq=False)
class WalbornConfig:
    """Entangled pair; the s photon crosses the double slit, the p photon tags it."""

    S: int
    alpha: tuple[complex, complex]
    V: TransferMatrix
    mode: WalbornMode = WalbornMode.NO_POLARIZERS
    source_amp: complex = 1.0

    def __post_init__(self):
        object.__setattr__(self, "V", as_transfer(self.V))
        object.__setattr__(self, "alpha", tuple(complex(a) for a in self.alpha))
        if isinstance(self.mode, str):
            object.__setattr__(self, "mode", WalbornMode(self.mode))
        if self.S < 2:
            raise InvalidConfig("screen needs S >= 2 sites")
        _check_unit(abs(self.alpha[0]) ** 2 + abs(self.alpha[1]) ** 2, "|a1|^2 + |a2|^2")
        if self.V.entries.shape != (self.S, 2):
            raise InvalidConfig(f"V must be {self.S}x2")
        if self.V.defect() > 1e-10:
            raise InvalidConfig(f"V not semi-unitary (defect {self.V.defect():.2e})")


# quarter-wave-plate action in front of each slit (slit 2 is the mirror image):
#   slit 1:  H -> L,  V -> iR        slit 2:  H -> R,  V -> -iL
_QWP = {
    ("1", "H"): [("L", 1.0)],
    ("1", "V"): [("R", 1.0j)],
    ("2", "H"): [("R", 1.0)],
    ("2", "V"): [("L", -1.0j)],
}


def _diag_components(label: str) -> list[tuple[str, complex]]:
    """Expand an L/R spin label in the +/- basis."""
    from .labstate import change_matrix

    m = change_matrix("LR", "DIAG")
    col = {"L": 0, "R": 1}[label]
    return [(lbl, complex(m[row, col])) for row, lbl in enumerate(("+", "-")) if m[row, col] != 0]


def build_walborn(cfg: WalbornConfig) -> Network:
    screen = _screen_labels(cfg.S)
    w = 1.0 / math.sqrt(2.0)
    src_cfg = SignalConfig.of(0, ["1"])
    source = LabState.single(0, ("H", "H"), src_cfg, cfg.source_amp)
    pair = LabState.from_terms(
        1,
        ("HV", "HV"),
        [
            (("H", "V"), SignalConfig.of(1, ["s", "p"]), w),
            (("V", "H"), SignalConfig.of(1, ["s", "p"]), w),
        ],
    )
    t01 = StageTransition(0, 1, (TransitionRule(("H", "H"), src_cfg, pair),))
    t12 = StageTransition(
        1,
        2,
        (
            _inert(
                1,
                ["s", "p"],
                [(["s1", "p"], cfg.alpha[0]), (["s2", "p"], cfg.alpha[1])],
            ),
        ),
    )
    v = cfg.V.entries

    if cfg.mode is WalbornMode.NO_POLARIZERS:
        stages = (
            Stage(0, ("1",)),
            Stage(1, ("s", "p")),
            Stage(2, ("s1", "s2", "p")),
            Stage(3, tuple(screen + ["p"])),
        )
        t23 = StageTransition(
            2,
            3,
            tuple(
                _inert(2, [slit, "p"], [([s, "p"], v[i, a]) for i, s in enumerate(screen)])
                for a, slit in enumerate(("s1", "s2"))
            ),
        )
        transitions = (t01, t12, t23)
    else:
        erase = cfg.mode is WalbornMode.CASE_II
        p_out = ("p1", "p2") if erase else ("p1",)
        p_minus = "p2" if erase else "p1"  # the "-" analyzer output port
        stages = (
            Stage(0, ("1",)),
            Stage(1, ("s", "p")),
            Stage(2, ("s1", "s2", "p")),
            Stage(3, ("s1", "s2") + p_out),
            Stage(4, tuple(screen + list(p_out))),
        )
        rules34: list[TransitionRule] = []
        for slit_idx, slit in enumerate(("s1", "s2")):
            for pd in p_out:
                rules34.append(
                    _inert(
                        3,
                        [slit, pd],
                        [([s, pd], v[i, slit_idx]) for i, s in enumerate(screen)],
                    )
                )
        rules23: list[TransitionRule] = []
        for slit in ("1", "2"):
            for s_lbl, p_lbl in (("H", "V"), ("V", "H")):
                entries = []
                for qwp_lbl, qwp_c in _QWP[(slit, s_lbl)]:
                    for s_diag, s_c in _diag_components(qwp_lbl):
                        # p photon resolved in the +/- basis: + exits at p1,
                        # - exits at the X port
                        for p_diag, port, p_c in (
                            ("+", "p1", w),
                            ("-", p_minus, -w if p_lbl == "V" else w),
                        ):
                            entries.append(
                                (
                                    (s_diag, p_diag),
                                    SignalConfig.of(3, ["s" + slit, port]),
                                    qwp_c * s_c * p_c,
                                )
                            )
                output = LabState.from_terms(3, ("DIAG", "DIAG"), entries)
                rules23.append(
                    TransitionRule(
                        (s_lbl, p_lbl), SignalConfig.of(2, ["s" + slit, "p"]), output
                    )
                )
        transitions = (t01, t12, StageTransition(2, 3, tuple(rules23)),
                       StageTransition(3, 4, tuple(rules34)))

    return Network(
        slots=2,
        stages=stages,
        transitions=transitions,
        source=source,
        params={
            "alpha1": cfg.alpha[0],
            "alpha2": cfg.alpha[1],
            "S": cfg.S,
            "mode": cfg.mode.value,
            "source_amp": cfg.source_amp,
        },
        meta={"experiment": "walborn", "config": cfg},
    )


# ---------------------------------------------------------------------------
# random draws and override plumbing
# ---------------------------------------------------------------------------


def _random_unit_pair(rng: np.random.Generator) -> tuple[complex, complex]:
    z = rng.standard_normal(2) + 1j * rng.standard_normal(2)
    z /= np.linalg.norm(z)
    return complex(z[0]), complex(z[1])


def _random_amp(rng: np.random.Generator) -> complex:
    return complex(rng.uniform(0.5, 2.0) * cmath.exp(2j * math.pi * rng.uniform()))


def random_double_slit(rng: np.random.Generator, S: int = 8) -> DoubleSlitConfig:
    return DoubleSlitConfig(
        S=S,
        alpha=_random_unit_pair(rng),
        V=TransferMatrix(random_isometry(S, 2, rng)),
        source_amp=_random_amp(rng),
    )


def random_dcqe(rng: np.random.Generator, S: int = 8) -> DcqeConfig:
    thetas = rng.uniform(0.0, math.pi / 2.0, size=3)
    a, b = _random_unit_pair(rng)
    # the pair-production spots act as a two-slit source for the screen, so
    # the two screen columns form one semi-unitary pair
    v = random_isometry(S, 2, rng)
    return DcqeConfig(
        S=S,
        alpha=a,
        beta=b,
        t1=math.cos(thetas[0]),
        r1=math.sin(thetas[0]),
        t2=math.cos(thetas[1]),
        r2=math.sin(thetas[1]),
        t3=math.cos(thetas[2]),
        r3=math.sin(thetas[2]),
        V_A=v[:, 0],
        V_B=v[:, 1],
        source_amp=_random_amp(rng),
    )


def random_wheeler(
    rng: np.random.Generator, R: int | None = None, S: int | None = None, T: int | None = None
) -> WheelerConfig:
    def feasible(r, s, t):
        # column 1 needs support (r+s >= 1); column 2 needs a direction
        # orthogonal to column 1's overlap-zone restriction
        return r + s >= 1 and (t >= 1 if s == 0 else s + t >= 2)

    if R is None or S is None or T is None:
        while True:
            R = int(rng.integers(0, 3))
            S = int(rng.integers(0, 4))
            T = int(rng.integers(0, 3))
            if feasible(R, S, T):
                break
    return WheelerConfig(
        R=R,
        S=S,
        T=T,
        alpha=_random_unit_pair(rng),
        V=wheeler_transfer(R, S, T, rng),
        source_amp=_random_amp(rng),
    )


def random_walborn(
    rng: np.random.Generator, S: int = 6, mode: WalbornMode | None = None
) -> WalbornConfig:
    if mode is None:
        mode = list(WalbornMode)[int(rng.integers(0, 3))]
    return WalbornConfig(
        S=S,
        alpha=_random_unit_pair(rng),
        V=TransferMatrix(random_isometry(S, 2, rng)),
        mode=mode,
        source_amp=_random_amp(rng),
    )


PRESETS = ("ds", "dcqe", "wheeler", "walborn")

_SYM = 1.0 / math.sqrt(2.0)


def default_config(
    kind: str,
    overrides: dict | None = None,
    rng: np.random.Generator | None = None,
    v_family: str = "fraunhofer",
    fringes: float = 2.5,
):
    """Build a preset config from defaults plus named field overrides.

    Numeric overrides address the dataclass fields (alpha, beta, t1..r3,
    alpha1/alpha2 for the two-slit amplitude pair, S/R/T, source_amp, mode).
    """
    ov = dict(overrides or {})
    fringes = _as_real(ov.pop("fringes", fringes), "fringes")

    def pick_v(sites: int, channels: int = 2) -> TransferMatrix:
        if v_family == "random":
            if rng is None:
                raise InvalidConfig("random V family needs a seed")
            return TransferMatrix(random_isometry(sites, channels, rng))
        if v_family != "fraunhofer":
            raise InvalidConfig(f"unknown V family {v_family!r}")
        return fraunhofer_columns(sites, fringes)

    if kind == "ds":
        S = _as_int(ov.pop("S", 16), "S")
        cfg = DoubleSlitConfig(
            S=S,
            alpha=_alpha_pair(ov, (_SYM, _SYM)),
            V=pick_v(S),
            source_amp=ov.pop("source_amp", 1.0),
        )
    elif kind == "dcqe":
        S = _as_int(ov.pop("S", 16), "S")
        base = pick_v(S)
        fields = {
            "alpha": _SYM, "beta": _SYM,
            "t1": _SYM, "r1": _SYM, "t2": _SYM, "r2": _SYM, "t3": _SYM, "r3": _SYM,
            "source_amp": 1.0,
        }
        for name in list(fields):
            if name in ov:
                value = ov.pop(name)
                fields[name] = _as_real(value, name) if name[0] in "tr" else value
        colA = base.entries[:, 0] / np.linalg.norm(base.entries[:, 0])
        colB = base.entries[:, 1] / np.linalg.norm(base.entries[:, 1])
        cfg = DcqeConfig(S=S, V_A=colA, V_B=colB, **fields)
    elif kind == "wheeler":
        R = _as_int(ov.pop("R", 2), "R")
        Sz = _as_int(ov.pop("S", 4), "S")
        T = _as_int(ov.pop("T", 2), "T")
        cfg = WheelerConfig(
            R=R,
            S=Sz,
            T=T,
            alpha=_alpha_pair(ov, (_SYM, _SYM)),
            V=wheeler_transfer(R, Sz, T, rng if v_family == "random" else None, fringes),
            source_amp=ov.pop("source_amp", 1.0),
        )
    elif kind == "walborn":
        S = _as_int(ov.pop("S", 16), "S")
        mode = ov.pop("mode", WalbornMode.NO_POLARIZERS)
        if isinstance(mode, complex):
            raise InvalidConfig("mode must be one of no_polarizers/case1/case2")
        cfg = WalbornConfig(
            S=S,
            alpha=_alpha_pair(ov, (_SYM, _SYM)),
            V=pick_v(S),
            mode=WalbornMode(mode) if not isinstance(mode, WalbornMode) else mode,
            source_amp=ov.pop("source_amp", 1.0),
        )
    else:
        raise InvalidConfig(f"unknown experiment {kind!r}; presets: {', '.join(PRESETS)}")

    if ov:
        raise InvalidConfig(f"unknown parameter(s) for {kind}: {sorted(ov)}")
    return cfg


def build_preset(
    kind: str,
    overrides: dict | None = None,
    rng: np.random.Generator | None = None,
    v_family: str = "fraunhofer",
    fringes: float = 2.5,
) -> Network:
    cfg = default_config(kind, overrides, rng, v_family, fringes)
    builder = {
        "ds": build_double_slit,
        "dcqe": build_dcqe,
        "wheeler": build_wheeler,
        "walborn": build_walborn,
    }[kind]
    return builder(cfg)


def _alpha_pair(ov: dict, default: tuple) -> tuple[complex, complex]:
    if "alpha" in ov:
        pair = ov.pop("alpha")
        if not isinstance(pair, (tuple, list)) or len(pair) != 2:
            raise InvalidConfig("alpha override must be a 2-tuple; use alpha1/alpha2")
        return tuple(pair)
    a1 = ov.pop("alpha1", default[0])
    a2 = ov.pop("alpha2", default[1])
    return (a1, a2)


def _as_int(value, name: str) -> int:
    if isinstance(value, complex):
        if abs(value.imag) > 0:
            raise InvalidConfig(f"{name} must be a real integer")
        value = value.real
    i = int(round(float(value)))
    if abs(i - float(value)) > 1e-9:
        raise InvalidConfig(f"{name} must be an integer, got {value!r}")
    return i


def _as_real(value, name: str) -> float:
    if isinstance(value, complex):
        if abs(value.imag) > 1e-12:
            raise InvalidConfig(f"{name} must be real")
        return float(value.real)
    return float(value)
