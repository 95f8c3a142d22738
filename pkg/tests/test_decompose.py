import dataclasses

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from tritplane.decompose import (
    DecomposeConfig,
    _scale_step,
    adapt_lambda,
    decompose,
    init_planes,
    reconstruct,
    update_trits_row,
)
from tritplane.linalg import frobenius_error, solve_ridge
from tritplane.trits import GroupLayout, group_reshape


def _reference_trit_choice(w, a1, a2):
    """Slow, independent 9-candidate search with the documented tie policy."""
    best = None
    for c1 in (-1, 0, 1):
        for c2 in (-1, 0, 1):
            err = (w - a1 * c1 - a2 * c2) ** 2
            key = (err, abs(c1) + abs(c2), (c1, c2))
            if best is None or key < best:
                best = key
    return best[2]


class TestConfig:
    def test_defaults(self):
        cfg = DecomposeConfig()
        assert cfg.group_size == 128
        assert cfg.max_iterations == 50
        assert cfg.tolerance == 1e-4
        assert cfg.lambda_init == 1e-8
        assert cfg.lambda_max == 1.0
        assert cfg.condition_threshold == 1e12
        assert cfg.final_refit is False

    @pytest.mark.parametrize(
        "kwargs",
        [
            {"group_size": 0},
            {"max_iterations": 0},
            {"tolerance": 0.0},
            {"tolerance": -1e-4},
            {"lambda_init": 0.0},
            {"lambda_init": 2.0},  # above lambda_max
            {"lambda_max": 0.0},
            {"condition_threshold": 0.0},
        ],
    )
    def test_rejects_bad_values(self, kwargs):
        with pytest.raises(ValueError):
            DecomposeConfig(**kwargs)


class TestAdaptLambda:
    def test_below_threshold_unchanged(self):
        assert adapt_lambda(1e-8, 1e6, DecomposeConfig()) == 1e-8

    def test_escalation(self):
        assert adapt_lambda(1e-8, 1e16, DecomposeConfig()) == pytest.approx(1e-6)

    def test_clamped_at_max(self):
        assert adapt_lambda(0.5, 1e20, DecomposeConfig()) == 1.0


class TestInitPlanes:
    def test_sign_with_zero_to_plus_one(self):
        grouped, layout = group_reshape([[2.0, -3.0, 0.0]], 3)
        t1, t2, alpha = init_planes(grouped, layout)
        assert t1.tolist() == [[1, -1, 1]]
        assert t2.tolist() == [[1, -1, 1]]
        assert alpha.tolist() == [[1.0, 1.0]]

    def test_all_positive(self, rng):
        grouped, layout = group_reshape(np.abs(rng.standard_normal((3, 4))) + 0.1, 2)
        t1, t2, _ = init_planes(grouped, layout)
        assert (t1 == 1).all() and (t2 == 1).all()

    def test_padding_stays_zero(self):
        grouped, layout = group_reshape([[5.0, -5.0, 5.0]], 2)
        t1, t2, _ = init_planes(grouped, layout)
        assert t1.tolist() == [[1, -1], [1, 0]]
        assert t2.tolist() == [[1, -1], [1, 0]]

    def test_rejects_non_finite(self):
        layout = GroupLayout(1, 2, 2)
        with pytest.raises(ValueError):
            init_planes(np.array([[1.0, np.nan]]), layout)


class TestUpdateTritsRow:
    def test_zero_target_prefers_sparse_pair(self):
        t1, t2 = update_trits_row(np.array([0.0]), (1.0, 1.0))
        assert (t1[0], t2[0]) == (0, 0)

    def test_exact_combination(self):
        t1, t2 = update_trits_row(np.array([3.0]), (2.0, 1.0))
        assert (t1[0], t2[0]) == (1, 1)

    def test_l1_tie_break(self):
        # -1.4 at alpha=(2,1): (0,-1) and (-1,1) both give value -1; L1 wins
        t1, t2 = update_trits_row(np.array([-1.4]), (2.0, 1.0))
        assert (t1[0], t2[0]) == (0, -1)

    def test_padding_forced_to_zero(self):
        t1, t2 = update_trits_row(np.array([3.0, 3.0]), (2.0, 1.0), valid=1)
        assert (t1[1], t2[1]) == (0, 0)
        assert (t1[0], t2[0]) == (1, 1)

    def test_rejects_non_finite_alpha(self):
        with pytest.raises(ValueError):
            update_trits_row(np.array([1.0]), (np.nan, 1.0))

    @given(
        w=st.floats(-5, 5),
        a1=st.floats(-3, 3),
        a2=st.floats(-3, 3),
    )
    def test_matches_reference_search(self, w, a1, a2):
        t1, t2 = update_trits_row(np.array([w]), (a1, a2))
        assert (int(t1[0]), int(t2[0])) == _reference_trit_choice(w, a1, a2)


class TestDecompose:
    def test_zero_matrix_fixed_point(self):
        layer, trace = decompose(np.zeros((4, 4)), DecomposeConfig(group_size=4))
        assert trace.final_error == 0.0
        assert layer.meta.iterations == 1
        assert trace.converged
        assert not layer.plane1.any() and not layer.plane2.any()
        assert not layer.scale1.any() and not layer.scale2.any()
        assert not reconstruct(layer).any()

    def test_gaussian_converges_and_is_monotone(self, rng):
        w = rng.standard_normal((8, 16))
        layer, trace = decompose(w, DecomposeConfig(group_size=16))
        assert layer.meta.iterations <= 50
        assert trace.converged
        errors = [r.error_after_trit_step for r in trace.records]
        for prev, cur in zip(errors, errors[1:]):
            assert cur <= prev * (1 + 1e-9)

    def test_trit_step_never_increases_error(self, rng):
        for _ in range(5):
            w = rng.standard_normal((6, 20))
            _, trace = decompose(w, DecomposeConfig(group_size=8))
            for r in trace.records:
                assert r.error_after_trit_step <= r.error_after_scale_step * (1 + 1e-9)

    def test_scale_step_improves_regularized_objective(self, rng):
        # fixed planes, fixed lambda: the ridge output must beat the old alpha
        w = rng.standard_normal((4, 24))
        grouped, layout = group_reshape(w, 8)
        t1, t2, alpha_old = init_planes(grouped, layout)
        cfg = DecomposeConfig(group_size=8)
        lam = np.full(layout.m, cfg.lambda_init)
        alpha_new, lam_new, _ = _scale_step(grouped, t1, t2, lam, cfg)

        def objective(alpha, row):
            resid = grouped[row] - alpha[row, 0] * t1[row] - alpha[row, 1] * t2[row]
            return resid @ resid + lam_new[row] * (alpha[row] @ alpha[row])

        for g in range(layout.m):
            assert objective(alpha_new, g) <= objective(alpha_old, g) + 1e-12

    def test_scale_step_matches_scalar_solver(self, rng):
        # vectorized path against the per-row closed-form solver
        w = rng.standard_normal((5, 33))
        grouped, layout = group_reshape(w, 8)
        cfg = DecomposeConfig(group_size=8)
        t1, _, _ = init_planes(grouped, layout)
        t2 = rng.integers(-1, 2, size=t1.shape).astype(np.int8)
        t2[layout.padding_mask()] = 0
        lam = np.full(layout.m, cfg.lambda_init)
        alpha, _, _ = _scale_step(grouped, t1, t2, lam, cfg)
        for g in range(layout.m):
            s = np.stack([t1[g], t2[g]], axis=1)
            expected = solve_ridge(s, grouped[g], cfg.lambda_init)
            assert np.linalg.norm(alpha[g] - expected) <= 1e-12 * max(
                np.linalg.norm(expected), 1.0
            )

    def test_final_error_not_worse_than_initial_state(self, rng):
        for _ in range(5):
            w = rng.standard_normal((8, 40))
            _, trace = decompose(w, DecomposeConfig(group_size=16))
            initial = trace.records[0].error_after_scale_step
            assert trace.final_error <= initial * (1 + 1e-6)

    def test_determinism(self, rng):
        w = rng.standard_normal((8, 50))
        cfg = DecomposeConfig(group_size=16)
        a, trace_a = decompose(w, cfg)
        b, trace_b = decompose(w, cfg)
        assert np.array_equal(a.plane1, b.plane1)
        assert np.array_equal(a.plane2, b.plane2)
        assert np.array_equal(a.scale1, b.scale1)
        assert np.array_equal(a.scale2, b.scale2)
        assert trace_a.final_error == trace_b.final_error

    def test_lambda_escalation_engages_and_clamps(self, rng):
        # a tiny threshold forces escalation on every row each iteration
        w = rng.standard_normal((4, 16))
        cfg = DecomposeConfig(group_size=16, condition_threshold=1e0, max_iterations=10,
                              tolerance=1e-12)
        _, trace = decompose(w, cfg)
        assert any(r.escalated_rows > 0 for r in trace.records)
        grouped, layout = group_reshape(w, 16)
        t1, t2, _ = init_planes(grouped, layout)
        lam = np.full(layout.m, cfg.lambda_init)
        for _ in range(200):
            _, lam, _ = _scale_step(grouped, t1, t2, lam, cfg)
        assert (lam <= cfg.lambda_max).all()
        assert (lam > cfg.lambda_init).all()

    def test_lambda_never_decreases(self, rng):
        w = rng.standard_normal((3, 8))
        cfg = DecomposeConfig(group_size=8, condition_threshold=1e2)
        grouped, layout = group_reshape(w, 8)
        t1, t2, _ = init_planes(grouped, layout)
        lam = np.full(layout.m, cfg.lambda_init)
        for _ in range(20):
            _, lam_next, _ = _scale_step(grouped, t1, t2, lam, cfg)
            assert (lam_next >= lam).all()
            lam = lam_next

    def test_final_refit_weakly_improves_regularized_objective(self, rng):
        w = rng.standard_normal((6, 32))
        base = DecomposeConfig(group_size=8)
        layer_a, trace_a = decompose(w, base)
        layer_b, trace_b = decompose(w, dataclasses.replace(base, final_refit=True))
        assert np.array_equal(layer_a.plane1, layer_b.plane1)
        assert np.array_equal(layer_a.plane2, layer_b.plane2)
        # raw error may shift either way by the lambda-shrinkage margin only
        assert trace_b.final_error <= trace_a.final_error * (1 + 1e-6)

    def test_rejects_non_finite(self):
        with pytest.raises(ValueError):
            decompose(np.array([[1.0, np.inf]]), DecomposeConfig())

    def test_appended_zero_columns_reconstruct_to_zero(self, rng):
        # real zero columns collapse to (0, 0) trits after the first trit
        # update, so the extension contributes exactly nothing
        w = rng.standard_normal((4, 13))
        ext = np.zeros((4, 16))
        ext[:, :13] = w
        layer, _ = decompose(ext, DecomposeConfig(group_size=8))
        assert not reconstruct(layer)[:, 13:].any()


class TestReconstruct:
    def test_zero_planes_give_zero_matrix(self):
        layer, _ = decompose(np.zeros((2, 6)), DecomposeConfig(group_size=4))
        layer.scale1[:] = 3.0  # scales are irrelevant against zero planes
        assert not reconstruct(layer).any()

    def test_single_group_hand_case(self):
        from tritplane.trits import LayerMeta, QuantizedLayer

        layer = QuantizedLayer(
            layout=GroupLayout(1, 4, 4),
            plane1=np.array([[1, 0, 0, -1]], dtype=np.int8),
            plane2=np.array([[1, 1, -1, -1]], dtype=np.int8),
            scale1=np.array([2.0]),
            scale2=np.array([1.0]),
            meta=LayerMeta(iterations=1, final_error=0.0),
        )
        assert reconstruct(layer).tolist() == [[3.0, 1.0, -1.0, -3.0]]

    def test_error_matches_trace(self, rng):
        for _ in range(5):
            w = rng.standard_normal((7, 19))
            layer, trace = decompose(w, DecomposeConfig(group_size=8))
            err = frobenius_error(w, reconstruct(layer))
            assert err == pytest.approx(trace.final_error, rel=1e-9)
