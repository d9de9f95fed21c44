"""Boundary-plus-mass minimization: exactness, thresholds, reach, pipeline.

The FROZEN table below was produced by tests/oracles.flatnorm_brute —
exhaustive enumeration of all 65536 labelings of a 4x4 window inside an
empty 6x6 frame.  Each row is (set_code, lam, energy, minimizer_code,
minimizer_count); codes pack the window row-major, bit k = flat cell k.
The solver must reproduce the energy to 1e-9 and the maximal minimizer
exactly.  A live slice of the table is re-derived on every run so the
table itself stays honest.
"""

import math

import numpy as np
import pytest

from covergeo import (
    GridSet,
    almost_cover_pipeline,
    disk,
    fill_in_experiment,
    flatnorm_minimize,
    lambda_threshold,
    minimizer_reach_check,
    perimeter,
    two_disks,
)
from covergeo.errors import (
    CovergeoError,
    DeltaLambdaIncompatible,
    DimensionError,
    EmptySourceError,
    LambdaBelowThreshold,
    NotCompactlyContained,
    StabilityRadiusExceeded,
    SymDiffTooLarge,
)
from covergeo.shapes import ball3

from oracles import flatnorm_brute, window_code

# (set_code, lam, energy, minimizer_code, minimizer_count)
FROZEN = [
    (65535, 0.3, 4.8, 0, 1),
    (65535, 3.0, 13.919163587, 65535, 1),
    (64, 0.5, 0.5, 0, 1),
    (64, 4.0, 2.084800689, 64, 1),
    (42405, 0.8, 6.4, 0, 1),
    (42405, 2.5, 14.630797521, 42405, 1),
    (1879, 1.0, 8.0, 0, 1),
    (0, 1.0, 0.0, 0, 1),
    (8328, 2.20988, 5.790754458, 8328, 1),
    (23499, 1.547786, 15.068574296, 23499, 1),
    (30635, 0.023043, 0.253473, 0, 1),
    (65213, 1.95235, 15.298784549, 65213, 1),
    (49099, 0.918652, 11.023824, 0, 1),
    (62173, 0.038449, 0.422939, 0, 1),
    (36164, 0.031825, 0.19095, 0, 1),
    (34432, 2.590381, 7.069290412, 34432, 1),
    (398, 2.543649, 8.454307882, 398, 1),
    (8193, 1.861111, 3.722222, 0, 1),
    (27219, 0.13946, 1.11568, 0, 1),
    (12484, 2.135689, 8.62992825, 12484, 1),
    (23592, 1.573535, 9.44121, 0, 1),
    (387, 0.090332, 0.361328, 0, 1),
    (16, 0.472136, 0.472136, 0, 1),
    (24708, 1.324395, 5.29758, 0, 1),
    (64445, 0.28556, 3.71228, 0, 1),
    (15837, 1.003477, 11.038247, 0, 1),
    (30719, 0.023865, 0.33411, 0, 1),
    (65467, 1.021064, 14.294896, 0, 1),
    (46063, 0.025126, 0.301512, 0, 1),
    (56191, 0.033366, 0.433758, 0, 1),
    (64895, 0.46335, 6.4869, 0, 1),
    (652, 0.347393, 1.389572, 0, 1),
    (16315, 0.046193, 0.554316, 0, 1),
    (3346, 0.044192, 0.22096, 0, 1),
    (8968, 0.166209, 0.664836, 0, 1),
    (48023, 1.500529, 15.40256781, 48023, 1),
    (34524, 0.20101, 1.60808, 0, 1),
    (56252, 0.137897, 1.516867, 0, 1),
    (48623, 0.32144, 4.17872, 0, 1),
    (31073, 0.874573, 6.996584, 0, 1),
    (17247, 0.41984, 3.77856, 0, 1),
    (46845, 0.125131, 1.501572, 0, 1),
    (63611, 0.86268, 9.48948, 0, 1),
    (28606, 2.479179, 13.21398386, 28606, 1),
    (48362, 1.277996, 12.77996, 0, 1),
    (41695, 0.204176, 2.04176, 0, 1),
    (32768, 1.501882, 1.501882, 0, 1),
    (45049, 0.206682, 2.480184, 0, 1),
    (1056, 0.651242, 1.302484, 0, 1),
    (63231, 0.101537, 1.421518, 0, 1),
    # targeted geometry: ring, block-plus-satellite, columns, concavities
    (1879, 1.3596754852526658, 10.654213697, 1879, 1),
    (1879, 0.33991887131316645, 2.719350971, 0, 1),
    (34679, 2.0, 11.480423908, 34679, 1),
    (34679, 4.0, 11.480423908, 34679, 1),
    (34679, 0.9, 9.0, 0, 1),
    (32771, 2.9, 5.790754458, 32771, 1),
    (13111, 1.4, 11.016776299, 13111, 1),
    (13111, 3.0, 11.016776299, 13111, 1),
    (21845, 1.6, 12.8, 0, 1),
    (21845, 2.6, 12.842797647, 21845, 1),
    (28951, 2.2, 12.275366777, 28951, 1),
    (28951, 5.0, 12.275366777, 28951, 1),
    # cases where the minimizer is strictly between empty and the input
    (52225, 1.8, 7.829588322, 52224, 1),
    (52225, 2.5, 8.11438901, 52225, 1),
    (52225, 1.3, 6.5, 0, 1),
    (52227, 1.7, 9.429588322, 52224, 1),
    (8207, 1.9, 8.848259928, 15, 1),
]


def decode(code):
    bits = (code >> np.arange(16)) & 1
    return bits.astype(bool).reshape(4, 4)


def embed(window):
    m = np.zeros((6, 6), dtype=bool)
    m[1:5, 1:5] = window
    return GridSet(m, 1.0)


class TestExactness:
    @pytest.mark.parametrize("e_code,lam,energy,sig_code,n_min", FROZEN)
    def test_frozen_instances(self, e_code, lam, energy, sig_code, n_min):
        res = flatnorm_minimize(embed(decode(e_code)), lam)
        assert res.energy == pytest.approx(energy, abs=1e-8)
        assert window_code(res.sigma.mask[1:5, 1:5]) == sig_code

    def test_oracle_live_slice(self):
        # re-derive a sample of the frozen table, including every row with a
        # nontrivial minimizer, straight from the exhaustive enumeration
        live = [r for r in FROZEN if r[3] not in (0, r[0])] + FROZEN[:8]
        for e_code, lam, energy, sig_code, n_min in live:
            emin, union, count = flatnorm_brute(decode(e_code), lam, 1.0)
            assert emin == pytest.approx(energy, abs=1e-8), e_code
            assert window_code(union) == sig_code, e_code
            assert count == n_min, e_code

    def test_energy_decomposition(self):
        for e_code, lam, *_ in FROZEN[8:20]:
            e = embed(decode(e_code))
            res = flatnorm_minimize(e, lam)
            sym = float(np.logical_xor(res.sigma.mask, e.mask).sum())
            assert res.sym_diff_measure == sym
            assert res.perim_sigma == pytest.approx(perimeter(res.sigma), rel=1e-9)
            assert res.energy == pytest.approx(res.perim_sigma + lam * sym, rel=1e-9)

    def test_never_beaten_by_random_candidates(self):
        rng = np.random.default_rng(1234)
        for e_code, lam, *_ in FROZEN[::7]:
            e = embed(decode(e_code))
            res = flatnorm_minimize(e, lam)
            for _ in range(40):
                w = rng.random((4, 4)) < rng.uniform(0.2, 0.8)
                cand = embed(w)
                cand_energy = perimeter(cand) + lam * float(
                    np.logical_xor(cand.mask, e.mask).sum()
                )
                assert res.energy <= cand_energy + 1e-9

    def test_feasibility_sandwich(self):
        # the empty set and the input itself are always feasible
        for e_code, lam, *_ in FROZEN[:25]:
            e = embed(decode(e_code))
            res = flatnorm_minimize(e, lam)
            assert res.energy <= lam * e.count + 1e-9
            assert res.energy <= perimeter(e) + 1e-9

    def test_maximality_via_fixed_point(self):
        # a minimizer fed back in is reproduced cell for cell
        sig = flatnorm_minimize(disk(32.0), 0.08).sigma
        again = flatnorm_minimize(sig, 0.08)
        assert again.sym_diff_measure == 0.0
        assert again.sigma == sig

    def test_sym_diff_monotone_in_lambda(self):
        e = disk(16.0)
        lams = [0.05, 0.08, 0.12, 0.2, 0.4, 0.8, 1.6]
        syms = [flatnorm_minimize(e, lam).sym_diff_measure for lam in lams]
        assert all(a >= b - 1e-12 for a, b in zip(syms, syms[1:]))
        assert syms[0] == e.measure  # below threshold: drop everything
        assert syms[-1] == 0.0  # far above: keep everything

    def test_disk_shaves_knife_edge_ring(self):
        e = disk(32.0)
        res = flatnorm_minimize(e, 1.1 * 2.0 / 32.0)
        assert res.sigma.count == e.count - 4
        assert not (res.sigma.mask & ~e.mask).any()

    def test_validation(self):
        with pytest.raises(CovergeoError):
            flatnorm_minimize(disk(8.0), 0.0)
        with pytest.raises(DimensionError):
            flatnorm_minimize(ball3(4.0), 0.5)


class TestLambdaThreshold:
    def test_disk_transition_near_analytic(self):
        # for a disk, the empty set wins below 2/R and loses above
        thr = lambda_threshold(disk(64.0))
        assert thr == pytest.approx(0.031211644593848297, abs=1e-9)
        assert 0.97 * (2.0 / 64.0) <= thr <= 1.03 * (2.0 / 64.0)

    def test_scales_with_resolution(self):
        thr = lambda_threshold(disk(32.0, 0.5))
        assert thr == pytest.approx(2 * 0.031211644593848297, rel=1e-6)

    def test_disjoint_pair_transitions_at_component_scale(self):
        thr = lambda_threshold(two_disks(24.0, 70.0))
        assert thr == pytest.approx(2.0 / 24.0, rel=0.03)

    def test_bracket_semantics(self):
        e = disk(24.0)
        thr = lambda_threshold(e)
        assert flatnorm_minimize(e, 0.9 * thr).sigma.is_empty
        assert not flatnorm_minimize(e, 1.1 * thr).sigma.is_empty

    def test_empty_input(self):
        with pytest.raises(EmptySourceError):
            lambda_threshold(GridSet(np.zeros((5, 5), bool), 1.0))


class TestReachCheck:
    def test_regularized_disk_beats_floor(self):
        res = flatnorm_minimize(disk(64.0), 2.5 / 64.0)
        assert res.sigma.count == 12833  # 20 knife-edge cells shed
        rep = minimizer_reach_check(res)
        assert rep.floor == pytest.approx(2.6755771772275674, abs=1e-9)
        assert rep.radius_sigma == 55.5
        assert rep.radius_complement == 132.5
        assert rep.verdict

    def test_vacuous_floor_still_true(self):
        rep = minimizer_reach_check(flatnorm_minimize(disk(32.0), 0.125))
        assert rep.floor < 0  # lambda too large for a meaningful floor
        assert (rep.radius_sigma, rep.radius_complement) == (29.5, 68.5)
        assert rep.verdict

    def test_empty_minimizer_rejected(self):
        res = flatnorm_minimize(disk(16.0), 0.05)
        assert res.sigma.is_empty
        with pytest.raises(EmptySourceError):
            minimizer_reach_check(res)


class TestFillIn:
    def make_hole(self, u, k):
        c = u.dims[0] // 2
        hm = np.zeros(u.dims, bool)
        lo = c - k // 2
        hm[lo : lo + k, lo : lo + k] = True
        return u.with_mask(hm)

    def test_small_hole_fills(self):
        u = disk(40.0)
        rep = fill_in_experiment(u, self.make_hole(u, 3), 0.1)
        assert rep.sym_diff_to_whole == 4.0  # only the knife-edge cells differ
        assert rep.tolerance == pytest.approx(2.0 * perimeter(u))
        assert rep.verdict
        assert rep.margin == pytest.approx(38.8330, abs=1e-3)

    def test_quarter_area_hole_still_fills(self):
        # even a hole of area R^2/4 costs less to fill than to excise:
        # its boundary is long relative to lam times its area
        u = disk(40.0)
        rep = fill_in_experiment(u, self.make_hole(u, 20), 0.1)
        assert rep.sym_diff_to_whole == 4.0
        assert rep.verdict

    def test_huge_round_hole_does_not_fill(self):
        u = disk(40.0)
        c = u.dims[0] // 2
        ii, jj = np.indices(u.dims)
        hole = u.with_mask((((ii - c) ** 2 + (jj - c) ** 2) <= 22.0**2) & u.mask)
        rep = fill_in_experiment(u, hole, 0.1)
        assert rep.sigma.is_empty  # the annulus is abandoned entirely
        assert rep.sym_diff_to_whole == u.measure
        assert not rep.verdict

    def test_lambda_below_ambient_scale(self):
        u = disk(40.0)
        with pytest.raises(StabilityRadiusExceeded):
            fill_in_experiment(u, self.make_hole(u, 3), 0.04)

    def test_hole_touching_boundary(self):
        u = disk(40.0)
        c = u.dims[0] // 2
        hm = np.zeros(u.dims, bool)
        hm[c, c + 40] = True  # margin exactly one cell
        with pytest.raises(NotCompactlyContained):
            fill_in_experiment(u, u.with_mask(hm), 0.1)

    def test_hole_outside_ambient(self):
        u = disk(40.0)
        hm = np.zeros(u.dims, bool)
        hm[1, 1] = True
        with pytest.raises(NotCompactlyContained):
            fill_in_experiment(u, u.with_mask(hm), 0.1)

    def test_empty_hole_is_plain_minimization(self):
        u = disk(40.0)
        rep = fill_in_experiment(u, u.with_mask(np.zeros(u.dims, bool)), 0.1)
        assert rep.margin == math.inf
        assert rep.verdict


def punctured_regular_disk():
    """The regularized disk with a 2x2 hole: an exact-fixed-point input."""
    s0 = flatnorm_minimize(disk(64.0), 2.5 / 64.0).sigma
    c = s0.dims[0] // 2
    m = s0.mask.copy()
    m[c : c + 2, c : c + 2] = False
    return s0.with_mask(m)


class TestPipeline:
    def test_end_to_end(self):
        e = punctured_regular_disk()
        part, bound = almost_cover_pipeline(e, 2.5 / 64.0, 4.5)
        assert part.region_count == 1289
        assert part.base.measure == 12829.0  # sigma restores the hole: A = E
        assert bound.kind == "flatnorm-almost"
        assert bound.m_regions == 1289
        assert 0 < bound.evaluate(21275) < 1

    def test_lambda_gate(self):
        e = punctured_regular_disk()
        with pytest.raises(LambdaBelowThreshold, match="threshold"):
            almost_cover_pipeline(e, 0.01, 4.5)

    def test_residual_gate(self):
        # the raw disk sheds 20 boundary cells: more than delta^2/2 allows
        with pytest.raises(SymDiffTooLarge, match=r"20\.0"):
            almost_cover_pipeline(disk(64.0), 2.5 / 64.0, 4.5)

    def test_delta_lambda_gate(self):
        with pytest.raises(DeltaLambdaIncompatible, match=r"1/\(5 lambda\)"):
            almost_cover_pipeline(disk(32.0), 0.08, 5.0)
