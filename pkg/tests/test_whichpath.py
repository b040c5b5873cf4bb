"""Which-path measure: closed forms, defaults, overrides."""
import math

import numpy as np
import pytest

from stagelab.errors import UnknownDetector, UnknownSignature
from stagelab.experiments import (
    DcqeConfig,
    WheelerConfig,
    build_dcqe,
    build_double_slit,
    build_wheeler,
    random_dcqe,
    random_double_slit,
    random_wheeler,
)
from stagelab.measurement import rates
from stagelab.whichpath import PathDisambiguation, which_path

SQ2 = 1.0 / math.sqrt(2.0)


def test_double_slit_phi_is_exactly_zero():
    net = build_double_slit(random_double_slit(np.random.default_rng(0), S=4))
    result = which_path(net)
    assert result.phi == 0.0
    assert result.contributions == {}


def test_dcqe_phi_closed_form():
    for seed in range(6):
        dc = random_dcqe(np.random.default_rng(seed), S=3)
        result = which_path(build_dcqe(dc))
        expect = dc.r1**2 * abs(dc.alpha) ** 2 + dc.r2**2 * abs(dc.beta) ** 2
        assert abs(result.phi - expect) <= 1e-12


def test_dcqe_symmetric_phi_is_half():
    dc = random_dcqe(np.random.default_rng(1), S=2)
    sym = DcqeConfig(
        S=2, alpha=SQ2, beta=SQ2, t1=SQ2, r1=SQ2, t2=SQ2, r2=SQ2, t3=dc.t3, r3=dc.r3,
        V_A=dc.V_A, V_B=dc.V_B,
    )
    assert abs(which_path(build_dcqe(sym)).phi - 0.5) <= 1e-12


def test_dcqe_phi_independent_of_final_beamsplitter():
    dc = random_dcqe(np.random.default_rng(2), S=2)
    phis = []
    for theta in np.linspace(0, math.pi / 2, 9):
        cfg = DcqeConfig(
            S=2, alpha=dc.alpha, beta=dc.beta, t1=dc.t1, r1=dc.r1, t2=dc.t2, r2=dc.r2,
            t3=math.cos(theta), r3=math.sin(theta), V_A=dc.V_A, V_B=dc.V_B,
            source_amp=dc.source_amp,
        )
        phis.append(which_path(build_dcqe(cfg)).phi)
    assert max(phis) - min(phis) <= 1e-12


def test_phi_invariant_under_transfer_phase_changes():
    dc = random_dcqe(np.random.default_rng(3), S=3)
    phases = np.exp(2j * math.pi * np.random.default_rng(4).uniform(size=3))
    rotated = DcqeConfig(
        S=3, alpha=dc.alpha, beta=dc.beta, t1=dc.t1, r1=dc.r1, t2=dc.t2, r2=dc.r2,
        t3=dc.t3, r3=dc.r3, V_A=dc.V_A * phases, V_B=dc.V_B * phases,
        source_amp=dc.source_amp,
    )
    assert abs(which_path(build_dcqe(dc)).phi - which_path(build_dcqe(rotated)).phi) <= 1e-12


def test_wheeler_phi_formula_and_limits():
    rng = np.random.default_rng(5)
    cfg = random_wheeler(rng, R=2, S=2, T=1)
    result = which_path(build_wheeler(cfg))
    v = cfg.V.entries
    expect = abs(cfg.alpha[0]) ** 2 * float(
        np.sum(np.abs(v[:2, 0]) ** 2)
    ) + abs(cfg.alpha[1]) ** 2 * float(np.sum(np.abs(v[4:, 1]) ** 2))
    assert abs(result.phi - expect) <= 1e-12

    closed = random_wheeler(rng, R=0, S=3, T=0)
    assert which_path(build_wheeler(closed)).phi == 0.0

    v_open = np.zeros((2, 2), dtype=complex)
    v_open[0, 0] = 1.0
    v_open[1, 1] = 1.0
    open_cfg = WheelerConfig(R=1, S=0, T=1, alpha=(0.6, 0.8), V=v_open)
    assert abs(which_path(build_wheeler(open_cfg)).phi - 1.0) <= 1e-12


def test_contributions_break_down_phi():
    dc = random_dcqe(np.random.default_rng(6), S=2)
    result = which_path(build_dcqe(dc))
    assert abs(sum(result.contributions.values()) - result.phi) <= 1e-15
    assert all("S+1" in sig or "S+4" in sig for sig in result.contributions)


def test_override_with_explicit_detectors():
    dc = random_dcqe(np.random.default_rng(7), S=2)
    net = build_dcqe(dc)
    table = rates(net)
    d = PathDisambiguation.from_detectors(table, ["S+2", "S+3"])
    result = which_path(net, d)
    expect = (
        dc.t1**2 * abs(dc.alpha) ** 2 + dc.t2**2 * abs(dc.beta) ** 2
    )  # everything transmitted past BS1/BS2
    assert abs(result.phi - expect) <= 1e-12


def test_unknown_revealing_signature_rejected():
    net = build_dcqe(random_dcqe(np.random.default_rng(8), S=2))
    from stagelab.labstate import SignalConfig

    bogus = PathDisambiguation(frozenset({SignalConfig.of(3, ["1", "2"])}))
    with pytest.raises(UnknownSignature):
        which_path(net, bogus)
    with pytest.raises(UnknownDetector):
        PathDisambiguation.from_detectors(rates(net), ["zz"])


def test_phi_within_unit_interval():
    for seed in range(5):
        rng = np.random.default_rng(20 + seed)
        net = build_wheeler(random_wheeler(rng))
        phi = which_path(net).phi
        assert -1e-15 <= phi <= 1.0 + 1e-12
