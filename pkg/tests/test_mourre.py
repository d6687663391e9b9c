import dataclasses
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from mourre_lab.mourre import (
    DiscardPolicy,
    analytic_rho,
    estimate_rho_eta,
    estimate_rho_window,
    opnorm,
    rho_scan,
    transfer_verify,
    virial_defects,
)
from mourre_lab.operators import HermitianOperator
from mourre_lab.spectral import EnergyWindow, bump, eigendecompose


class TestAnalyticRho:
    def test_below_lower_threshold_infinite(self):
        assert analytic_rho(0.0, 1.0, -1.0) == math.inf

    def test_between_thresholds(self):
        assert analytic_rho(0.0, 1.0, 0.5) == 1.0

    def test_above_upper_threshold(self):
        assert analytic_rho(0.0, 1.0, 2.0) == 2.0

    def test_branch_points(self):
        assert analytic_rho(0.0, 1.0, 0.0) == 0.0
        assert analytic_rho(0.0, 1.0, 1.0) == 0.0
        assert analytic_rho(0.0, 1.0, 1.0 - 1e-9) == pytest.approx(2.0, abs=1e-8)

    def test_order_of_thresholds_irrelevant(self):
        for lam in (-0.5, 0.3, 1.7):
            assert analytic_rho(1.0, 0.0, lam) == analytic_rho(0.0, 1.0, lam)

    @given(st.floats(-2.0, 4.0), st.floats(-2.0, 4.0))
    @settings(max_examples=30, deadline=None)
    def test_nondecreasing_in_lambda(self, a, b):
        lo, hi = min(a, b), max(a, b)
        grid = np.linspace(-3.0, 6.0, 181)
        vals = [analytic_rho(lo, hi, lam) for lam in grid]
        finite = [v for v in vals if math.isfinite(v)]
        # within each branch the formula is increasing; across the upper
        # threshold it drops -- monotone only below and at/above separately
        below = [v for lam, v in zip(grid, vals) if lo <= lam < hi]
        above = [v for lam, v in zip(grid, vals) if lam >= hi]
        assert all(x <= y + 1e-12 for x, y in zip(below, below[1:]))
        assert all(x <= y + 1e-12 for x, y in zip(above, above[1:]))
        assert all(v >= 0 for v in finite)


@pytest.fixture(scope="module")
def dec_H(small_ops):
    return eigendecompose(small_ops.H)


class TestWindowEstimate:
    def test_corrected_at_least_raw(self, small_ops, dec_H):
        est = estimate_rho_window(small_ops, dec_H, "H_A", EnergyWindow(0.5, 0.2))
        assert est.corrected >= est.raw_min

    def test_discard_nothing_equalizes(self, small_ops, dec_H):
        policy = DiscardPolicy(discard_nothing=True)
        est = estimate_rho_window(small_ops, dec_H, "H_A", EnergyWindow(0.5, 0.2), policy)
        assert est.corrected == est.raw_min
        assert est.n_discarded == 0

    def test_empty_window(self, small_ops, dec_H):
        est = estimate_rho_window(small_ops, dec_H, "H_A", EnergyWindow(-5.0, 0.1))
        assert est.raw_min == math.inf
        assert est.note == "no spectrum in window"

    def test_discard_log_complete(self, small_ops, dec_H):
        est = estimate_rho_window(small_ops, dec_H, "H_A", EnergyWindow(0.5, 0.2))
        assert len(est.discard_log) == est.compression_spectrum.size
        flagged = sum(1 for d in est.discard_log if d["discarded"])
        assert flagged == est.n_discarded

    def test_unknown_pair_rejected(self, small_ops, dec_H):
        with pytest.raises(ValueError):
            estimate_rho_window(small_ops, dec_H, "bogus", EnergyWindow(0.5, 0.2))

    def test_scaling_covariance(self, small_ops, dec_H):
        # replacing A by c*A multiplies every compression eigenvalue by c
        c = 2.5
        scaled = dataclasses.replace(
            small_ops,
            commutator_iHA=HermitianOperator(
                c * small_ops.commutator_iHA.entries,
                small_ops.commutator_iHA.hermiticity_defect,
            ),
        )
        win = EnergyWindow(0.5, 0.2)
        base = estimate_rho_window(small_ops, dec_H, "H_A", win)
        mult = estimate_rho_window(scaled, dec_H, "H_A", win)
        assert np.allclose(mult.compression_spectrum, c * base.compression_spectrum)
        assert mult.raw_min == pytest.approx(c * base.raw_min, rel=1e-12)
        assert mult.corrected == pytest.approx(c * base.corrected, rel=1e-12)
        assert mult.n_discarded == base.n_discarded


class TestEtaEstimate:
    def test_raw_not_above_corrected(self, small_ops, dec_H):
        est = estimate_rho_eta(small_ops, dec_H, "H_A", bump(0.5, 0.2))
        assert est.raw_min <= est.corrected + 1e-9

    def test_eta_off_spectrum_rejected(self, small_ops, dec_H):
        with pytest.raises(ValueError):
            estimate_rho_eta(small_ops, dec_H, "H_A", bump(-50.0, 0.1))

    def test_free_channel_positive_after_discards(self):
        # free pair: i[-Delta, D] compressed near lambda=1 carries the
        # positive ladder ~ 2*(lambda - eps) once localized modes are
        # removed; the window must hold several levels, so the box is wide
        from mourre_lab.grid import make_cutoffs, make_grid, make_steplike
        from mourre_lab.hypotheses import channel_decompositions
        from mourre_lab.operators import build_pair

        g = make_grid(80.0, 801)
        ops = build_pair(g, make_steplike(g, 0.0, 0.0), make_cutoffs(g))
        decs = channel_decompositions(ops)
        est = estimate_rho_eta(ops, decs.minus, "channel-", bump(1.0, 0.3))
        assert est.corrected > 1.0
        assert est.raw_min < 0  # the finite-box virial keeps the raw value down


class TestVirial:
    def test_eigenvector_defects_tiny(self, small_ops, dec_H):
        defects = virial_defects(small_ops, dec_H, range(20))
        assert np.max(defects) <= 1e-10


class TestOpnorm:
    def test_matches_dense_svd(self):
        rng = np.random.default_rng(21)
        m = rng.standard_normal((40, 25))
        assert opnorm(m) == pytest.approx(np.linalg.svd(m, compute_uv=False)[0], rel=1e-6)

    def test_zero_matrix(self):
        assert opnorm(np.zeros((5, 5))) == 0.0


class TestTransfer:
    def test_threshold_samples_excluded(self, small_ops, dec_H):
        rep = transfer_verify(small_ops, dec_H, [1.05], 0.1, 0.2)
        assert rep.excluded == [1.05]
        assert rep.lambda_samples == []
        assert not rep.verdict

    def test_report_shapes(self, small_ops, dec_H):
        rep = transfer_verify(small_ops, dec_H, [0.5, 1.05, 2.0], 0.1, 5.0)
        assert rep.lambda_samples == [0.5, 2.0]
        assert len(rep.margins) == 2
        assert len(rep.eone_residuals) == 2


class TestRhoScan:
    def test_row_schema(self, small_ops, dec_H):
        rows = rho_scan(small_ops, dec_H, [-5.0, 0.5], 0.1)
        assert len(rows) == 2
        lam, rho0, raw, corr, ndis, margin = rows[0]
        assert rho0 == math.inf and raw == math.inf and math.isnan(margin)
        lam, rho0, raw, corr, ndis, margin = rows[1]
        assert rho0 == 1.0
        assert margin == pytest.approx(corr - rho0)
