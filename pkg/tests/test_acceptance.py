"""Acceptance suite: one test per criterion, each printing a PASS/FAIL line.

Run with ``pytest tests/test_acceptance.py -v -s`` to see the per-criterion
lines as they complete.
"""
import functools
import math
import time

import numpy as np
import pytest

from stagelab.dsl import elaborate, parse, serialize
from stagelab.errors import DslError
from stagelab.experiments import (
    DcqeConfig,
    DoubleSlitConfig,
    WalbornConfig,
    WalbornMode,
    WheelerConfig,
    build_dcqe,
    build_double_slit,
    build_walborn,
    build_wheeler,
    dcqe_coincidence_formulas,
    random_dcqe,
    random_double_slit,
    random_walborn,
    random_wheeler,
)
from stagelab.measurement import (
    completeness_defect,
    marginal,
    max_row_difference,
    povm_elements,
    rates,
)
from stagelab.oracle import oracle_evolution, oracle_rates
from stagelab.whichpath import which_path
from _support import random_network_text

SQ2 = 1.0 / math.sqrt(2.0)

PRESET_MAKERS = {
    "ds": lambda rng: build_double_slit(random_double_slit(rng, S=8)),
    "dcqe": lambda rng: build_dcqe(random_dcqe(rng, S=6)),
    "wheeler": lambda rng: build_wheeler(random_wheeler(rng)),
    "walborn": lambda rng: build_walborn(random_walborn(rng, S=6)),
}


def criterion(number, summary):
    def wrap(fn):
        @functools.wraps(fn)
        def run():
            try:
                fn()
            except BaseException:
                print(f"[acceptance {number}] FAIL {summary}")
                raise
            print(f"[acceptance {number}] PASS {summary}")

        return run

    return wrap


@criterion(1, "closed-form eraser coincidence rates, 100 random configs, S=16, <5s")
def test_criterion_1_closed_form_reproduction():
    rng = np.random.default_rng(101)
    configs = [random_dcqe(rng, S=16) for _ in range(100)]
    start = time.perf_counter()
    worst = 0.0
    for cfg in configs:
        table = rates(build_dcqe(cfg))
        for (site, det), expect in dcqe_coincidence_formulas(cfg).items():
            worst = max(worst, abs(table.rate(f"{site}&{det}") - expect))
    elapsed = time.perf_counter() - start
    assert worst <= 1e-12, f"worst formula mismatch {worst:.2e}"
    assert elapsed < 5.0, f"took {elapsed:.2f}s"


@criterion(2, "delayed-choice invariance under the final beamsplitter sweep")
def test_criterion_2_delayed_choice_invariance():
    rng = np.random.default_rng(102)
    base = random_dcqe(rng, S=16)
    generic = DcqeConfig(
        S=16, alpha=0.6, beta=0.8, t1=base.t1, r1=base.r1, t2=base.t2, r2=base.r2,
        t3=base.t3, r3=base.r3, V_A=base.V_A, V_B=base.V_B, source_amp=1.0,
    )
    screen = [str(i) for i in range(1, 17)]
    early: dict[str, list[float]] = {}
    site_totals: dict[str, list[float]] = {}
    s2_totals: list[float] = []
    for t3 in np.linspace(0.0, 1.0, 11):
        cfg = DcqeConfig(
            S=16, alpha=generic.alpha, beta=generic.beta,
            t1=generic.t1, r1=generic.r1, t2=generic.t2, r2=generic.r2,
            t3=float(t3), r3=math.sqrt(1.0 - float(t3) ** 2),
            V_A=generic.V_A, V_B=generic.V_B,
        )
        table = rates(build_dcqe(cfg))
        for site in screen:
            for det in ("S+1", "S+4"):
                early.setdefault(f"{site}&{det}", []).append(table.rate(f"{site}&{det}"))
        site_marginal = marginal(table, screen)
        for site in screen:
            site_totals.setdefault(site, []).append(site_marginal.rate(site))
        off = marginal(table, ["S+1", "S+2", "S+3", "S+4"])
        s2_totals.append(off.rate("S+2"))
    spreads = [max(v) - min(v) for v in early.values()]
    spreads += [max(v) - min(v) for v in site_totals.values()]
    assert max(spreads) <= 1e-12, f"max spread {max(spreads):.2e}"
    assert max(s2_totals) - min(s2_totals) >= 1e-3


@criterion(3, "POVM completeness and rate conservation, 100 draws per preset")
def test_criterion_3_completeness_and_conservation():
    rng = np.random.default_rng(103)
    for kind, maker in PRESET_MAKERS.items():
        for _ in range(100):
            net = maker(rng)
            defect = completeness_defect(povm_elements(net), net.source)
            assert defect <= 1e-12, f"{kind}: completeness defect {defect:.2e}"
            table = rates(net)
            gap = abs(table.total() - net.source.norm_sq())
            assert gap <= 1e-12, f"{kind}: rate sum off by {gap:.2e}"
            assert all(v >= -1e-15 for _, v in table.rows)


@criterion(4, "which-path values: double slit 0, eraser closed form, zoned screen limits")
def test_criterion_4_which_path_values():
    rng = np.random.default_rng(104)
    assert which_path(build_double_slit(random_double_slit(rng, S=8))).phi == 0.0

    for _ in range(20):
        dc = random_dcqe(rng, S=4)
        phi = which_path(build_dcqe(dc)).phi
        expect = dc.r1**2 * abs(dc.alpha) ** 2 + dc.r2**2 * abs(dc.beta) ** 2
        assert abs(phi - expect) <= 1e-12

    sym = DcqeConfig(
        S=4, alpha=SQ2, beta=SQ2, t1=SQ2, r1=SQ2, t2=SQ2, r2=SQ2, t3=0.3,
        r3=math.sqrt(1 - 0.09), V_A=random_dcqe(rng, S=4).V_A,
        V_B=random_dcqe(rng, S=4).V_B,
    )
    assert abs(which_path(build_dcqe(sym)).phi - 0.5) <= 1e-12

    no_overlap = random_wheeler(rng, R=2, S=0, T=2)
    assert abs(which_path(build_wheeler(no_overlap)).phi - 1.0) <= 1e-12
    all_overlap = random_wheeler(rng, R=0, S=4, T=0)
    assert which_path(build_wheeler(all_overlap)).phi == 0.0


@criterion(5, "eraser-by-polarization: no-interference case, fringe sum, plain-case match")
def test_criterion_5_walborn_behavior():
    rng = np.random.default_rng(105)
    for _ in range(10):
        cfg = random_walborn(rng, S=6, mode=WalbornMode.CASE_I)
        rows = np.exp(2j * math.pi * rng.uniform(size=(6, 1)))
        cols = np.exp(2j * math.pi * rng.uniform(size=(1, 2)))
        rephased = WalbornConfig(
            S=6, alpha=cfg.alpha, V=cfg.V.entries * rows * cols,
            mode=WalbornMode.CASE_I, source_amp=cfg.source_amp,
        )
        diff = max_row_difference(
            rates(build_walborn(cfg)), rates(build_walborn(rephased))
        )
        assert diff <= 1e-12, f"rephasing moved rates by {diff:.2e}"

    for _ in range(10):
        cfg2 = random_walborn(rng, S=5, mode=WalbornMode.CASE_II)
        cfg1 = WalbornConfig(S=5, alpha=cfg2.alpha, V=cfg2.V, mode=WalbornMode.CASE_I,
                             source_amp=cfg2.source_amp)
        t2 = rates(build_walborn(cfg2))
        t1 = rates(build_walborn(cfg1))
        for i in range(5):
            fringe_sum = t2.rate(f"{i + 1}&p1") + t2.rate(f"{i + 1}&p2")
            assert abs(fringe_sum - t1.rate(f"{i + 1}&p1")) <= 1e-12

    for _ in range(10):
        cfg0 = random_walborn(rng, S=5, mode=WalbornMode.NO_POLARIZERS)
        table = rates(build_walborn(cfg0))
        v = cfg0.V.entries
        p0 = abs(cfg0.source_amp) ** 2
        for i in range(5):
            ds_formula = p0 * abs(
                cfg0.alpha[0] * v[i, 0] + cfg0.alpha[1] * v[i, 1]
            ) ** 2
            assert abs(table.rate(f"{i + 1}&p") - ds_formula) <= 1e-12


@criterion(6, "oracle equivalence, 50 networks per preset plus 20 generated documents")
def test_criterion_6_oracle_equivalence():
    rng = np.random.default_rng(106)
    sizes = lambda lo, hi: int(rng.integers(lo, hi + 1))
    completions_compared = 0
    for kind in ("ds", "dcqe", "wheeler", "walborn"):
        for _ in range(50):
            if kind == "ds":
                net = build_double_slit(random_double_slit(rng, S=sizes(2, 8)))
            elif kind == "dcqe":
                net = build_dcqe(random_dcqe(rng, S=sizes(2, 8)))
            elif kind == "wheeler":
                net = build_wheeler(random_wheeler(rng))
            else:
                net = build_walborn(random_walborn(rng, S=sizes(2, 8)))
            engine = rates(net)
            run_basis = oracle_evolution(net, completion="basis")
            diff = max_row_difference(engine, run_basis.table)
            assert diff <= 1e-10, f"{kind}: engine vs oracle {diff:.2e}"
            norms = run_basis.norms
            assert max(abs(n - norms[0]) for n in norms) <= 1e-10
            if all(run_basis.dense):
                other = oracle_rates(net, completion="random",
                                     rng=np.random.default_rng(rng.integers(2**32)))
                pair_diff = max_row_difference(run_basis.table, other)
                assert pair_diff <= 1e-10, f"{kind}: completions differ {pair_diff:.2e}"
                completions_compared += 1
    assert completions_compared >= 100

    for _ in range(20):
        net = elaborate(parse(random_network_text(rng)))
        diff = max_row_difference(rates(net), oracle_rates(net))
        assert diff <= 1e-10, f"generated network: {diff:.2e}"


@criterion(7, "two-detector correspondence: open vs closed interferometer")
def test_criterion_7_two_detector_correspondence():
    rng = np.random.default_rng(107)
    alpha = (0.6 * np.exp(0.7j), 0.8 * np.exp(-0.2j))
    v_open = np.zeros((2, 2), dtype=complex)
    v_open[0, 0] = np.exp(1j * rng.uniform(0, 2 * math.pi))
    v_open[1, 1] = np.exp(1j * rng.uniform(0, 2 * math.pi))
    open_net = build_wheeler(WheelerConfig(R=1, S=0, T=1, alpha=alpha, V=v_open))
    open_rates = rates(open_net)
    assert abs(open_rates.rate("1") - 0.36) <= 1e-12
    assert abs(open_rates.rate("2") - 0.64) <= 1e-12
    assert abs(which_path(open_net).phi - 1.0) <= 1e-12

    from stagelab.network import random_isometry

    v = random_isometry(2, 2, rng)
    closed_net = build_wheeler(WheelerConfig(R=0, S=2, T=0, alpha=alpha, V=v))
    ds_net = build_double_slit(DoubleSlitConfig(S=2, alpha=alpha, V=v))
    assert max_row_difference(rates(closed_net), rates(ds_net)) <= 1e-12
    assert which_path(closed_net).phi == 0.0


@criterion(8, "parser total on 1e5 fuzz inputs; presets round-trip rate-identically")
def test_criterion_8_parser_robustness():
    rng = np.random.default_rng(108)
    for _ in range(100_000):
        blob = rng.bytes(int(rng.integers(0, 120)))
        try:
            parse(blob)
        except DslError:
            pass

    import importlib.resources as resources

    names = ["ds.sn", "dcqe.sn", "wheeler.sn", "walborn_nopol.sn",
             "walborn_case1.sn", "walborn_case2.sn"]
    base = (resources.files("stagelab") / "presets" / "dcqe.sn").read_text().encode()
    for _ in range(10_000):
        data = bytearray(base)
        for _ in range(int(rng.integers(1, 6))):
            data[int(rng.integers(0, len(data)))] = int(rng.integers(0, 256))
        try:
            parse(bytes(data))
        except DslError:
            pass

    for name in names:
        text = (resources.files("stagelab") / "presets" / name).read_text()
        net = elaborate(parse(text))
        again = elaborate(parse(serialize(net)))
        diff = max_row_difference(rates(net), rates(again))
        assert diff <= 1e-12, f"{name}: round-trip changed rates by {diff:.2e}"
