"""Builder-level checks: each preset reproduces its closed-form rates."""
import math

import numpy as np
import pytest

from stagelab.errors import InvalidConfig
from stagelab.experiments import (
    DcqeConfig,
    DoubleSlitConfig,
    WalbornConfig,
    WalbornMode,
    WheelerConfig,
    build_dcqe,
    build_double_slit,
    build_preset,
    build_walborn,
    build_wheeler,
    dcqe_coincidence_formulas,
    default_config,
    random_dcqe,
    random_double_slit,
    random_walborn,
    random_wheeler,
    wheeler_transfer,
)
from stagelab.measurement import marginal, max_row_difference, rates
from stagelab.network import random_isometry

SQ2 = 1.0 / math.sqrt(2.0)


def all_transitions_semi_unitary(net, tol=1e-12):
    report = net.validate(tol)
    return report.ok, report.max_defect


# ---------------------------------------------------------------------------
# double slit
# ---------------------------------------------------------------------------


def test_ds_one_slit_blocked_kills_cross_terms():
    rng = np.random.default_rng(0)
    v = random_isometry(6, 2, rng)
    cfg = DoubleSlitConfig(S=6, alpha=(1.0, 0.0), V=v, source_amp=1.3)
    table = rates(build_double_slit(cfg))
    for i in range(6):
        assert abs(table.rate(str(i + 1)) - 1.3**2 * abs(v[i, 0]) ** 2) < 1e-12


def test_ds_rates_sum_to_beam_production_rate():
    cfg = random_double_slit(np.random.default_rng(1), S=9)
    table = rates(build_double_slit(cfg))
    assert abs(table.total() - abs(cfg.source_amp) ** 2) < 1e-12


def test_ds_general_rate_formula():
    cfg = random_double_slit(np.random.default_rng(2), S=5)
    table = rates(build_double_slit(cfg))
    v = cfg.V.entries
    for i in range(5):
        expect = abs(cfg.source_amp) ** 2 * abs(
            cfg.alpha[0] * v[i, 0] + cfg.alpha[1] * v[i, 1]
        ) ** 2
        assert abs(table.rate(str(i + 1)) - expect) < 1e-12


def test_ds_invalid_alpha_rejected():
    with pytest.raises(InvalidConfig):
        DoubleSlitConfig(S=2, alpha=(1.0, 1.0), V=np.eye(2))


# ---------------------------------------------------------------------------
# delayed-choice eraser
# ---------------------------------------------------------------------------


def test_dcqe_early_reflection_rate():
    dc = random_dcqe(np.random.default_rng(3), S=4)
    table = rates(build_dcqe(dc))
    p0 = abs(dc.source_amp) ** 2
    for i in range(4):
        expect = p0 * dc.r1**2 * abs(dc.alpha) ** 2 * abs(dc.V_A[i]) ** 2
        assert abs(table.rate(f"{i + 1}&S+1") - expect) < 1e-12


def test_dcqe_degenerate_beamsplitter_routes_pure_b_path():
    rng = np.random.default_rng(4)
    v = random_isometry(3, 2, rng)
    dc = DcqeConfig(
        S=3, alpha=0.6, beta=0.8, t1=SQ2, r1=SQ2, t2=0.9, r2=math.sqrt(1 - 0.81),
        t3=1.0, r3=0.0, V_A=v[:, 0], V_B=v[:, 1],
    )
    table = rates(build_dcqe(dc))
    for i in range(3):
        expect = dc.t2**2 * abs(dc.beta) ** 2 * abs(dc.V_B[i]) ** 2
        assert abs(table.rate(f"{i + 1}&S+2") - expect) < 1e-12


def test_dcqe_beta_zero_degenerates_but_conserves():
    rng = np.random.default_rng(5)
    v = random_isometry(3, 2, rng)
    dc = DcqeConfig(
        S=3, alpha=1.0, beta=0.0, t1=0.8, r1=0.6, t2=SQ2, r2=SQ2, t3=SQ2, r3=SQ2,
        V_A=v[:, 0], V_B=v[:, 1], source_amp=1.1,
    )
    table = rates(build_dcqe(dc))
    detectors = {table.signature_str(sig).split("&")[1] for sig, _ in table.rows}
    assert detectors == {"S+1", "S+2", "S+3"}
    assert abs(table.total() - 1.1**2) < 1e-12


def test_dcqe_all_formulas_random():
    dc = random_dcqe(np.random.default_rng(6), S=6)
    table = rates(build_dcqe(dc))
    for (site, det), expect in dcqe_coincidence_formulas(dc).items():
        assert abs(table.rate(f"{site}&{det}") - expect) < 1e-12


def test_dcqe_delayed_choice_invariance_over_t3():
    dc = random_dcqe(np.random.default_rng(7), S=3)
    early: dict[str, list[float]] = {}
    screen: dict[str, list[float]] = {}
    for theta in np.linspace(0, math.pi / 2, 7):
        cfg = DcqeConfig(
            S=3, alpha=dc.alpha, beta=dc.beta, t1=dc.t1, r1=dc.r1, t2=dc.t2,
            r2=dc.r2, t3=math.cos(theta), r3=math.sin(theta),
            V_A=dc.V_A, V_B=dc.V_B, source_amp=dc.source_amp,
        )
        table = rates(build_dcqe(cfg))
        for i in range(3):
            for det in ("S+1", "S+4"):
                early.setdefault(f"{i + 1}&{det}", []).append(table.rate(f"{i + 1}&{det}"))
        site_marg = marginal(table, ["1", "2", "3"])
        for i in range(3):
            screen.setdefault(str(i + 1), []).append(site_marg.rate(str(i + 1)))
    for series in list(early.values()) + list(screen.values()):
        assert max(series) - min(series) <= 1e-12


def test_dcqe_screen_pattern_blind_to_every_beamsplitter():
    dc = random_dcqe(np.random.default_rng(70), S=3)
    rng = np.random.default_rng(71)
    series: dict[str, list[float]] = {}
    for _ in range(6):
        thetas = rng.uniform(0.0, math.pi / 2.0, size=3)
        cfg = DcqeConfig(
            S=3, alpha=dc.alpha, beta=dc.beta,
            t1=math.cos(thetas[0]), r1=math.sin(thetas[0]),
            t2=math.cos(thetas[1]), r2=math.sin(thetas[1]),
            t3=math.cos(thetas[2]), r3=math.sin(thetas[2]),
            V_A=dc.V_A, V_B=dc.V_B, source_amp=dc.source_amp,
        )
        screen = marginal(rates(build_dcqe(cfg)), ["1", "2", "3"])
        for site in ("1", "2", "3"):
            series.setdefault(site, []).append(screen.rate(site))
    for values in series.values():
        assert max(values) - min(values) <= 1e-12


def test_dcqe_bs1_choice_does_affect_downstream_counts():
    dc = random_dcqe(np.random.default_rng(8), S=3)
    totals = []
    for theta in np.linspace(0.1, 1.4, 5):
        cfg = DcqeConfig(
            S=3, alpha=dc.alpha, beta=dc.beta, t1=math.cos(theta), r1=math.sin(theta),
            t2=dc.t2, r2=dc.r2, t3=dc.t3, r3=dc.r3,
            V_A=dc.V_A, V_B=dc.V_B, source_amp=dc.source_amp,
        )
        table = rates(build_dcqe(cfg))
        off = marginal(table, ["S+1", "S+2", "S+3", "S+4"])
        totals.append(off.rate("S+2"))
    assert max(totals) - min(totals) > 1e-3


# ---------------------------------------------------------------------------
# Wheeler
# ---------------------------------------------------------------------------


def test_wheeler_open_interferometer_two_detector_case():
    v = np.zeros((2, 2), dtype=complex)
    v[0, 0] = np.exp(0.3j)
    v[1, 1] = np.exp(-1.1j)
    cfg = WheelerConfig(R=1, S=0, T=1, alpha=(0.6, 0.8j), V=v)
    table = rates(build_wheeler(cfg))
    assert abs(table.rate("1") - 0.36) < 1e-12
    assert abs(table.rate("2") - 0.64) < 1e-12


def test_wheeler_closed_configuration_reproduces_double_slit():
    rng = np.random.default_rng(9)
    v = random_isometry(2, 2, rng)
    alpha = (0.48 + 0.36j, 0.8)
    wheeler = rates(build_wheeler(WheelerConfig(R=0, S=2, T=0, alpha=alpha, V=v)))
    ds = rates(build_double_slit(DoubleSlitConfig(S=2, alpha=alpha, V=v)))
    assert max_row_difference(wheeler, ds) <= 1e-12


def test_wheeler_single_slit_zone_ignores_other_amplitude():
    rng = np.random.default_rng(10)
    v = wheeler_transfer(2, 3, 2, rng)
    base = rates(build_wheeler(WheelerConfig(R=2, S=3, T=2, alpha=(0.6, 0.8), V=v)))
    flipped = rates(
        build_wheeler(WheelerConfig(R=2, S=3, T=2, alpha=(0.6, -0.8j), V=v))
    )
    for i in (1, 2):  # zone sites fed by slit 1 only: no alpha-2 dependence
        assert abs(base.rate(str(i)) - flipped.rate(str(i))) <= 1e-12


def test_wheeler_zone_rate_formulas():
    rng = np.random.default_rng(11)
    cfg = random_wheeler(rng, R=2, S=2, T=1)
    table = rates(build_wheeler(cfg))
    v = cfg.V.entries
    p0 = abs(cfg.source_amp) ** 2
    for i in range(5):
        amp = cfg.alpha[0] * v[i, 0] + cfg.alpha[1] * v[i, 1]
        assert abs(table.rate(str(i + 1)) - p0 * abs(amp) ** 2) < 1e-12
    # slit-1-only zone depends on |alpha1 V|^2 alone
    assert abs(table.rate("1") - p0 * abs(cfg.alpha[0] * v[0, 0]) ** 2) < 1e-12


def test_wheeler_support_constraints_enforced():
    v = random_isometry(4, 2, np.random.default_rng(12))
    with pytest.raises(InvalidConfig):
        WheelerConfig(R=1, S=2, T=1, alpha=(SQ2, SQ2), V=v)


# ---------------------------------------------------------------------------
# Walborn
# ---------------------------------------------------------------------------


def walborn_cfg(mode, S=2, alpha=(SQ2, SQ2), V=None, source_amp=1.0):
    if V is None:
        V = np.array([[SQ2, 1j * SQ2], [SQ2, -1j * SQ2]])
    return WalbornConfig(S=S, alpha=alpha, V=V, mode=mode, source_amp=source_amp)


def test_walborn_case1_flat_half_rates():
    table = rates(build_walborn(walborn_cfg("case1")))
    assert abs(table.rate("1&p1") - 0.5) < 1e-12
    assert abs(table.rate("2&p1") - 0.5) < 1e-12


def test_walborn_case2_fringe_antifringe_complementarity():
    table = rates(build_walborn(walborn_cfg("case2")))
    assert abs(table.rate("1&p1") - 0.5) < 1e-12
    assert table.rate("1&p2") <= 1e-15
    assert table.rate("2&p1") <= 1e-15
    assert abs(table.rate("2&p2") - 0.5) < 1e-12


def test_walborn_case2_formulas_random():
    cfg = random_walborn(np.random.default_rng(13), S=5, mode=WalbornMode.CASE_II)
    table = rates(build_walborn(cfg))
    v = cfg.V.entries
    p0 = abs(cfg.source_amp) ** 2
    for i in range(5):
        fringe = 0.5 * abs(1j * cfg.alpha[0] * v[i, 0] + cfg.alpha[1] * v[i, 1]) ** 2
        anti = 0.5 * abs(cfg.alpha[0] * v[i, 0] + 1j * cfg.alpha[1] * v[i, 1]) ** 2
        assert abs(table.rate(f"{i + 1}&p1") - p0 * fringe) < 1e-12
        assert abs(table.rate(f"{i + 1}&p2") - p0 * anti) < 1e-12


def test_walborn_fringe_plus_antifringe_equals_case1():
    cfg2 = random_walborn(np.random.default_rng(14), S=4, mode=WalbornMode.CASE_II)
    cfg1 = WalbornConfig(S=4, alpha=cfg2.alpha, V=cfg2.V, mode="case1",
                         source_amp=cfg2.source_amp)
    t2 = rates(build_walborn(cfg2))
    t1 = rates(build_walborn(cfg1))
    for i in range(4):
        together = t2.rate(f"{i + 1}&p1") + t2.rate(f"{i + 1}&p2")
        assert abs(together - t1.rate(f"{i + 1}&p1")) < 1e-12


def test_walborn_slit_swap_maps_fringe_to_antifringe():
    cfg = random_walborn(np.random.default_rng(15), S=4, mode=WalbornMode.CASE_II)
    swapped = WalbornConfig(
        S=4,
        alpha=(cfg.alpha[1], cfg.alpha[0]),
        V=cfg.V.entries[:, ::-1],
        mode=WalbornMode.CASE_II,
        source_amp=cfg.source_amp,
    )
    base = rates(build_walborn(cfg))
    twin = rates(build_walborn(swapped))
    for i in range(4):
        assert abs(base.rate(f"{i + 1}&p1") - twin.rate(f"{i + 1}&p2")) < 1e-12
        assert abs(base.rate(f"{i + 1}&p2") - twin.rate(f"{i + 1}&p1")) < 1e-12


def test_walborn_no_polarizers_matches_ds_interference():
    cfg = random_walborn(np.random.default_rng(16), S=5, mode=WalbornMode.NO_POLARIZERS)
    table = rates(build_walborn(cfg))
    v = cfg.V.entries
    p0 = abs(cfg.source_amp) ** 2
    for i in range(5):
        expect = p0 * abs(cfg.alpha[0] * v[i, 0] + cfg.alpha[1] * v[i, 1]) ** 2
        assert abs(table.rate(f"{i + 1}&p") - expect) < 1e-12


# ---------------------------------------------------------------------------
# structural invariants across presets
# ---------------------------------------------------------------------------


@pytest.mark.parametrize("seed", range(4))
def test_every_builder_is_semi_unitary(seed):
    rng = np.random.default_rng(100 + seed)
    nets = [
        build_double_slit(random_double_slit(rng, S=4)),
        build_dcqe(random_dcqe(rng, S=3)),
        build_wheeler(random_wheeler(rng)),
        build_walborn(random_walborn(rng, S=3)),
    ]
    for net in nets:
        ok, defect = all_transitions_semi_unitary(net)
        assert ok, f"defect {defect}"


def test_default_config_override_plumbing():
    net = build_preset("dcqe", {"t3": 0.6, "r3": 0.8, "S": 4})
    assert net.params["t3"] == 0.6 and net.params["S"] == 4
    with pytest.raises(InvalidConfig):
        build_preset("dcqe", {"nope": 1.0})
    with pytest.raises(InvalidConfig):
        default_config("bogus")
    with pytest.raises(InvalidConfig):
        build_preset("dcqe", {"t3": 0.9, "r3": 0.9})
