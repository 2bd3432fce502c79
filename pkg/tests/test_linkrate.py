"""
Tests for per-tone SNR, bit loading, operator rates and sweeps
"""

import math

import numpy as np
import pytest

from sbvsim.channel import CableModelParams, fext_gain
from sbvsim.exceptions import DomainError, ModelValidityError, ScenarioError
from sbvsim.linkrate import (
    SWEEP_COLUMNS,
    LinkScenario,
    Mode,
    bits_per_tone,
    fairness_gap,
    operator_rate,
    sweep_distance,
    sweep_fmax,
    sweep_frame,
    tone_snr,
)
from sbvsim.spectrum import LEGACY_EDGE_HZ, AllocationOrder, ToneGrid, allocate_subbands

from .conftest import TOY_DELTA_F, TOY_F_MAX, TOY_F_START

FMAX_SWEEP = (17.664e6, 35.2e6, 70.4e6, 105.6e6)
DISTANCES = tuple(float(d) for d in range(50, 1001, 50))


def brute_force_rate(mode, n_op, op, n_us, r_v_db, d, width, order, params):
    """Per-tone summation on the 16-tone toy grid, written out longhand"""
    p_tx = 10 ** (-60 / 10)
    n_bg = 10 ** (-140 / 10)
    gap = 10 ** ((9.75 + 6 - 3) / 10)
    ds_bands = [(0.138e6, 3.75e6), (5.2e6, 8.5e6), (12.0e6, 17.664e6)]

    def snr(f, vectored):
        loss_db = (params.k1 * math.sqrt(f / 1e6) + params.k2 * f / 1e6) * d / 1000
        h = 10 ** (-loss_db / 10)
        if vectored:
            return p_tx * h / (n_bg * 10 ** (r_v_db / 10))
        xt = h * 10 ** (params.kx_db / 10) * (n_us / 49) ** 0.6 * (d / params.d0) * (f / params.f0) ** 2
        return p_tx * h / (n_bg + p_tx * xt)

    def bits(s):
        return min(15.0, math.log2(1 + s / gap))

    def owner(f):
        j = int((f - 17.664e6) // width)
        if order is AllocationOrder.LINEAR:
            return j % n_op
        cycle, r = j // n_op, j % n_op
        return r if cycle % 2 == 0 else n_op - 1 - r

    legacy = 0.0
    extension = 0.0
    for i in range(16):
        f = 1e6 + 2e6 * i
        if f >= 17.664e6:
            if mode is Mode.SBV:
                if owner(f) == op:
                    extension += bits(snr(f, True))
            elif mode is Mode.NV:
                extension += bits(snr(f, False))
            else:
                extension += bits(snr(f, True))
        elif any(lo <= f < hi for lo, hi in ds_bands):
            legacy += bits(snr(f, mode is Mode.FULL_VECTOR))
    legacy *= 4000 / 1e6
    extension *= 4000 / 1e6
    if mode is not Mode.FULL_VECTOR:
        legacy /= n_op
    if mode is Mode.NV:
        extension /= n_op
    return legacy + extension


class TestToneSnr:
    def test_awgn_ceiling(self, make_scenario):
        sc = make_scenario(r_v_db=0.0)
        assert tone_snr(sc, 20e6, 0.0, vectored=True) == pytest.approx(1e-6 / 1e-14, rel=1e-12)

    def test_residual_vectoring_penalty(self, make_scenario):
        f = np.array([18e6, 25e6, 34e6])
        clean = tone_snr(make_scenario(r_v_db=0.0), f, 300.0, vectored=True)
        lifted = tone_snr(make_scenario(r_v_db=10.0), f, 300.0, vectored=True)
        assert 10 * np.log10(clean / lifted) == pytest.approx([10.0] * 3, abs=1e-9)

    def test_no_disturbers_equals_clean_vectoring(self, make_scenario):
        f = np.linspace(1e6, 35e6, 9)
        plain = tone_snr(make_scenario(n_us=0), f, 250.0, vectored=False)
        vectored = tone_snr(make_scenario(r_v_db=0.0), f, 250.0, vectored=True)
        assert plain == pytest.approx(vectored, rel=1e-12)

    def test_outside_grid(self, make_scenario):
        with pytest.raises(DomainError):
            tone_snr(make_scenario(), 36e6, 100.0, vectored=True)

    def test_vectoring_dominance_condition(self):
        # vectored >= non-vectored exactly when P_tx*fext >= N_bg*(10^(r_v/10) - 1)
        rng = np.random.default_rng(7)
        params = CableModelParams()
        grid = ToneGrid(f_max=105.6e6)
        ext = grid.frequencies()[grid.frequencies() >= LEGACY_EDGE_HZ]
        for _ in range(1000):
            n_us = int(rng.integers(0, 49))
            r_v = float(rng.uniform(0, 20))
            d = float(rng.uniform(0, 1500))
            f = float(ext[rng.integers(0, len(ext))])
            sc = LinkScenario(mode=Mode.NV, n_op=1, grid=grid, n_us=n_us, r_v_db=r_v)
            lhs = sc.p_tx * fext_gain(params, f, d, n_us)
            rhs = sc.noise_bg * (10 ** (r_v / 10) - 1)
            vectored = tone_snr(sc, f, d, vectored=True)
            plain = tone_snr(sc, f, d, vectored=False)
            if lhs >= rhs * (1 + 1e-9):
                assert vectored >= plain
            elif lhs <= rhs * (1 - 1e-9):
                assert vectored <= plain

    @pytest.mark.parametrize("f_max, d_max", [(35.2e6, 1000.0), (105.6e6, 500.0)])
    def test_vectoring_dominates_on_extension_band(self, f_max, d_max):
        rng = np.random.default_rng(8)
        grid = ToneGrid(f_max=f_max)
        ext = grid.frequencies()[grid.frequencies() >= LEGACY_EDGE_HZ]
        for _ in range(500):
            n_us = int(rng.integers(12, 49))
            d = float(rng.uniform(50, d_max))
            sc = LinkScenario(mode=Mode.NV, n_op=1, grid=grid, n_us=n_us)
            f = ext[rng.integers(0, len(ext), size=32)]
            assert np.all(tone_snr(sc, f, d, True) >= tone_snr(sc, f, d, False))



class TestBitsPerTone:
    def test_snr_equal_to_gap(self):
        assert bits_per_tone(10 ** (12.75 / 10), 12.75, 15) == pytest.approx(1.0, rel=1e-12)

    def test_zero_snr(self):
        assert bits_per_tone(0.0, 12.75, 15) == 0.0

    def test_cap(self):
        assert bits_per_tone(1e30, 12.75, 15) == 15.0

    def test_integer_flooring(self):
        assert bits_per_tone(10 ** (12.75 / 10) * 6, 12.75, 15, integer=True) == 2.0

    def test_vectorized(self):
        bits = bits_per_tone(np.array([0.0, 1e30]), 12.75, 12)
        assert bits.tolist() == [0.0, 12.0]


class TestLinkScenario:
    def test_full_vector_needs_single_operator(self, make_scenario):
        with pytest.raises(ScenarioError):
            make_scenario(mode=Mode.FULL_VECTOR, n_op=3)

    def test_sbv_needs_allocation(self):
        with pytest.raises(ScenarioError):
            LinkScenario(mode=Mode.SBV, n_op=2, grid=ToneGrid(f_max=35.2e6))

    def test_allocation_must_match(self):
        with pytest.raises(ScenarioError):
            LinkScenario(mode=Mode.SBV, n_op=2, grid=ToneGrid(f_max=35.2e6), alloc=allocate_subbands(2, 70.4e6))
        with pytest.raises(ScenarioError):
            LinkScenario(mode=Mode.SBV, n_op=2, grid=ToneGrid(f_max=35.2e6), alloc=allocate_subbands(3, 35.2e6))

    def test_legacy_only_sbv_needs_no_allocation(self):
        sc = LinkScenario(mode=Mode.SBV, n_op=2, grid=ToneGrid(f_max=LEGACY_EDGE_HZ))
        assert operator_rate(sc, 1, 100.0).extension_mbps == 0.0

    @pytest.mark.parametrize("field, value", [("n_op", 0), ("n_us", -1), ("r_v_db", -1.0), ("b_max", 0.5),
                                              ("f_sym", 0.0), ("coding_gain_db", 20.0)])
    def test_invariants(self, field, value):
        kwargs = {"mode": Mode.NV, "n_op": 1, "grid": ToneGrid(f_max=35.2e6), field: value}
        with pytest.raises(ScenarioError):
            LinkScenario(**kwargs)

    def test_beyond_model_validity(self):
        with pytest.raises(ModelValidityError):
            LinkScenario(mode=Mode.NV, n_op=1, grid=ToneGrid(f_max=210e6))

    def test_with_fmax_reallocates(self, make_scenario):
        sc = make_scenario(order=AllocationOrder.LINEAR, width=2e6).with_fmax(70.4e6)
        assert sc.grid.f_max == 70.4e6
        assert sc.alloc.f_max == 70.4e6
        assert sc.alloc.width_nominal == 2e6
        assert sc.alloc.order is AllocationOrder.LINEAR
        assert make_scenario().with_fmax(LEGACY_EDGE_HZ).alloc is None


class TestOperatorRate:
    def test_additivity_and_sign(self, make_scenario):
        for mode in (Mode.NV, Mode.SBV):
            sc = make_scenario(mode=mode)
            for op in range(3):
                r = operator_rate(sc, op, 200.0)
                assert r.rate_mbps == r.legacy_mbps + r.extension_mbps
                assert r.legacy_mbps >= 0 and r.extension_mbps >= 0

    def test_cap_limited_extension(self, make_scenario):
        r = operator_rate(make_scenario(n_op=1), 0, 0.0)
        assert r.extension_mbps == pytest.approx(4000 * 15 * 4066 / 1e6, rel=1e-12)
        assert r.extension_mbps == pytest.approx(243.96, rel=1e-12)
        assert r.legacy_mbps == pytest.approx(4000 * 15 * 2917 / 1e6, rel=1e-12)

    def test_single_operator_sbv_matches_full_vector(self, make_scenario):
        for d in (0.0, 100.0, 400.0):
            sbv = operator_rate(make_scenario(n_op=1), 0, d)
            full = operator_rate(make_scenario(mode=Mode.FULL_VECTOR, n_op=1), 0, d)
            assert sbv.extension_mbps == full.extension_mbps
        # Aggregates agree once the shared band sees no FEXT and vectoring is ideal
        sbv = operator_rate(make_scenario(n_op=1, n_us=0, r_v_db=0.0), 0, 250.0)
        full = operator_rate(make_scenario(mode=Mode.FULL_VECTOR, n_op=1, n_us=0, r_v_db=0.0), 0, 250.0)
        assert sbv.rate_mbps == pytest.approx(full.rate_mbps, rel=1e-12)

    def test_operator_out_of_range(self, make_scenario):
        with pytest.raises(DomainError):
            operator_rate(make_scenario(n_op=2), 2, 100.0)

    def test_negative_distance(self, make_scenario):
        with pytest.raises(DomainError):
            operator_rate(make_scenario(), 0, -5.0)

    def test_17a_calibration_window(self, make_scenario):
        rate = operator_rate(make_scenario(mode=Mode.NV, n_op=1, f_max=LEGACY_EDGE_HZ, n_us=12), 0, 100.0)
        assert 30.0 <= rate.rate_mbps <= 50.0

    def test_matches_brute_force_oracle(self):
        rng = np.random.default_rng(2024)
        grid = ToneGrid(f_max=TOY_F_MAX, delta_f=TOY_DELTA_F, f_start=TOY_F_START)
        for _ in range(50):
            mode = [Mode.NV, Mode.SBV, Mode.FULL_VECTOR][int(rng.integers(0, 3))]
            n_op = 1 if mode is Mode.FULL_VECTOR else int(rng.integers(1, 4))
            op = int(rng.integers(0, n_op))
            n_us = int(rng.integers(0, 40))
            r_v = float(rng.uniform(0, 15))
            d = float(rng.uniform(0, 1500))
            width = float(rng.choice([2.5e6, 3e6, 4e6, 5e6, 7e6]))
            order = AllocationOrder.SNAKE if rng.random() < 0.5 else AllocationOrder.LINEAR
            params = CableModelParams(k1=float(rng.uniform(5, 15)), k2=float(rng.uniform(0, 0.5)),
                                      kx_db=float(rng.uniform(-30, -15)))
            sc = LinkScenario(mode=mode, n_op=n_op, grid=grid, params=params,
                              alloc=allocate_subbands(n_op, TOY_F_MAX, width, order),
                              n_us=n_us, r_v_db=r_v)
            expected = brute_force_rate(mode, n_op, op, n_us, r_v, d, width, order, params)
            assert operator_rate(sc, op, d).rate_mbps == pytest.approx(expected, rel=1e-9)


class TestMonotonicity:
    def test_rate_nonincreasing_in_distance(self, make_scenario):
        rng = np.random.default_rng(11)
        scenarios = {
            (mode, n_op, f_max): make_scenario(mode=mode, n_op=n_op, f_max=f_max)
            for mode in (Mode.NV, Mode.SBV) for n_op in (1, 2, 3) for f_max in (35.2e6, 105.6e6)
        }
        keys = list(scenarios)
        for _ in range(1000):
            sc = scenarios[keys[int(rng.integers(0, len(keys)))]]
            op = int(rng.integers(0, sc.n_op))
            d1 = float(rng.uniform(0, 1200))
            d2 = d1 + float(rng.uniform(0.01, 300))
            assert operator_rate(sc, op, d2).rate_mbps <= operator_rate(sc, op, d1).rate_mbps

    def test_nv_nonincreasing_in_disturbers(self, make_scenario):
        rng = np.random.default_rng(12)
        for _ in range(200):
            n_us = int(rng.integers(0, 48))
            d = float(rng.uniform(0, 1000))
            low = operator_rate(make_scenario(mode=Mode.NV, n_us=n_us), 0, d)
            high = operator_rate(make_scenario(mode=Mode.NV, n_us=n_us + int(rng.integers(1, 10))), 0, d)
            assert high.rate_mbps <= low.rate_mbps

    def test_full_vector_constant_in_disturbers(self, make_scenario):
        rates = {operator_rate(make_scenario(mode=Mode.FULL_VECTOR, n_op=1, n_us=n), 0, 300.0).rate_mbps
                 for n in (0, 6, 12, 24, 48)}
        assert len(rates) == 1

    def test_sbv_disturber_insensitivity(self, make_scenario):
        for d in DISTANCES:
            for op in range(3):
                r12 = operator_rate(make_scenario(n_us=12), op, d)
                r24 = operator_rate(make_scenario(n_us=24), op, d)
                assert r12.extension_mbps == r24.extension_mbps
                assert r12.rate_mbps - r24.rate_mbps == pytest.approx(r12.legacy_mbps - r24.legacy_mbps,
                                                                      abs=1e-12)


class TestRateVsFmax:
    def test_nv_plateau(self, make_scenario):
        sc = make_scenario(mode=Mode.NV)
        low = operator_rate(sc.with_fmax(35.2e6), 0, 100.0).rate_mbps
        high = operator_rate(sc.with_fmax(105.6e6), 0, 100.0).rate_mbps
        assert high >= low
        assert high < 1.10 * low

    def test_sbv_growth_and_dominance(self, make_scenario):
        points = sweep_fmax(make_scenario(), 100.0, FMAX_SWEEP)
        rate = {(p.mode, p.operator, p.x): p.result.rate_mbps for p in points}
        for op in range(3):
            assert rate[(Mode.SBV, op, 105.6e6)] >= 1.5 * rate[(Mode.SBV, op, 35.2e6)]
            for f_max in FMAX_SWEEP[1:]:
                assert rate[(Mode.SBV, op, f_max)] >= rate[(Mode.NV, op, f_max)]
            gaps = [rate[(Mode.SBV, op, f)] - rate[(Mode.NV, op, f)] for f in FMAX_SWEEP]
            assert gaps == sorted(gaps)

    def test_sweep_layout(self, make_scenario):
        points = sweep_fmax(make_scenario(), 100.0, FMAX_SWEEP)
        assert len(points) == 2 * 3 * 4
        assert [p.x for p in points[:4]] == list(FMAX_SWEEP)
        assert (points[0].mode, points[0].operator) == (Mode.NV, 0)
        assert (points[-1].mode, points[-1].operator) == (Mode.SBV, 2)

    def test_single_entry_sweep(self, make_scenario):
        sc = make_scenario()
        (point,) = sweep_fmax(sc, 250.0, [35.2e6], modes=[Mode.SBV], operators=[1])
        assert point.result == operator_rate(sc, 1, 250.0)

    def test_sweep_rejects_unsorted_list(self, make_scenario):
        with pytest.raises(DomainError):
            sweep_fmax(make_scenario(), 100.0, [70.4e6, 35.2e6])
        with pytest.raises(DomainError):
            sweep_fmax(make_scenario(), 100.0, [])

    def test_threaded_sweep_keeps_order(self, make_scenario):
        serial = sweep_fmax(make_scenario(), 100.0, FMAX_SWEEP)
        threaded = sweep_fmax(make_scenario(), 100.0, FMAX_SWEEP, workers=4)
        assert serial == threaded


class TestDistanceSweep:
    def test_starts_at_cap_and_decreases(self, make_scenario):
        sc = make_scenario()
        points = sweep_distance(sc, 0, [0.0] + list(DISTANCES))
        rates = [p.result.rate_mbps for p in points]
        assert rates[0] == operator_rate(sc, 0, 0.0).rate_mbps
        assert all(b <= a for a, b in zip(rates, rates[1:]))

    def test_rejects_negative_distance(self, make_scenario):
        with pytest.raises(DomainError):
            sweep_distance(make_scenario(), 0, [10.0, -1.0])

    def test_frame_columns(self, make_scenario):
        frame = sweep_frame(sweep_distance(make_scenario(), 1, [100.0, 200.0]))
        assert list(frame.columns) == SWEEP_COLUMNS
        assert frame["mode"].tolist() == ["SBV", "SBV"]
        assert frame["operator"].tolist() == [1, 1]


class TestFairness:
    @pytest.mark.parametrize("n_op", [2, 3])
    def test_snake_one_megahertz_blocks(self, make_scenario, n_op):
        sc = make_scenario(n_op=n_op, f_max=105.6e6, width=1e6)
        for d in DISTANCES:
            assert fairness_gap(sc, d) <= 0.05

    def test_snake_five_megahertz_blocks_two_operators(self, make_scenario):
        sc = make_scenario(n_op=2, f_max=105.6e6, width=5e6)
        for d in DISTANCES:
            if d <= 650.0:
                assert fairness_gap(sc, d) <= 0.05
        assert fairness_gap(sc, 1000.0) > 0.05

    def test_snake_five_megahertz_blocks_three_operators(self, make_scenario):
        sc = make_scenario(n_op=3, f_max=105.6e6, width=5e6)
        for d in DISTANCES:
            if d <= 600.0:
                assert fairness_gap(sc, d) <= 0.05
        # at long range only the lowest blocks carry bits and SNAKE deals them out 0, 1, 2, 2
        assert fairness_gap(sc, 650.0) > 0.05
        assert fairness_gap(sc, 1000.0) > 0.05

    def test_single_operator_is_trivially_fair(self, make_scenario):
        assert fairness_gap(make_scenario(n_op=1), 300.0) == 0.0
