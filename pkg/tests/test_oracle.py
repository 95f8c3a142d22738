import numpy as np
import pytest

from tritplane.decompose import DecomposeConfig, decompose, reconstruct
from tritplane.linalg import build_basis, solve_ridge
from tritplane.oracle import (
    MAX_ORACLE_LEN,
    global_optimum_row,
    naive_reconstruct_error,
    regularized_objective,
)

LAM = 1e-8


def _brute_force_reference(w, lam):
    """Independent double-loop enumeration using the scalar ridge solver."""
    import itertools

    best = None
    for t1 in itertools.product((-1, 0, 1), repeat=len(w)):
        for t2 in itertools.product((-1, 0, 1), repeat=len(w)):
            alpha = solve_ridge(build_basis(t1, t2), w, lam)
            obj = regularized_objective(w, t1, t2, alpha, lam)
            if best is None or obj < best:
                best = obj
    return best


def _decomposer_objective(w_row, lam):
    layer, trace = decompose(w_row[None, :], DecomposeConfig(group_size=len(w_row)))
    return trace.final_error**2 + lam * float(layer.scale1[0] ** 2 + layer.scale2[0] ** 2)


class TestGlobalOptimum:
    def test_zero_row(self):
        res = global_optimum_row([0.0, 0.0], LAM)
        assert res.objective == 0.0
        assert res.squared_error == 0.0
        assert res.t1.tolist() == [0, 0] and res.t2.tolist() == [0, 0]
        assert res.alpha.tolist() == [0.0, 0.0]
        assert res.enumeration_count == 81

    def test_exactly_representable_row(self):
        res = global_optimum_row([3.0, 1.0, -1.0, -3.0], LAM)
        assert res.objective < 1e-6
        assert res.enumeration_count == 9**4
        recon = res.alpha[0] * res.t1 + res.alpha[1] * res.t2
        assert np.allclose(recon, [3.0, 1.0, -1.0, -3.0], atol=1e-6)

    def test_matches_independent_double_loop(self, rng):
        for _ in range(5):
            w = rng.standard_normal(3)
            fast = global_optimum_row(w, LAM).objective
            slow = _brute_force_reference(w, LAM)
            assert fast == pytest.approx(slow, rel=1e-9, abs=1e-12)

    def test_is_lower_bound_for_decomposer(self, rng):
        for _ in range(20):
            w = rng.standard_normal(4)
            gap = _decomposer_objective(w, LAM) - global_optimum_row(w, LAM).objective
            assert gap >= -1e-9

    def test_row_too_long(self):
        with pytest.raises(ValueError):
            global_optimum_row(np.zeros(MAX_ORACLE_LEN + 1), LAM)

    def test_lambda_must_be_positive(self):
        with pytest.raises(ValueError):
            global_optimum_row([1.0, 2.0], 0.0)

    def test_objective_consistent_with_witness(self, rng):
        w = rng.standard_normal(5)
        res = global_optimum_row(w, LAM)
        recomputed = regularized_objective(w, res.t1, res.t2, res.alpha, LAM)
        assert res.objective == pytest.approx(recomputed, rel=1e-12, abs=1e-15)


class TestNaiveReconstructError:
    def test_zero_layer_zero_matrix(self):
        layer, _ = decompose(np.zeros((3, 5)), DecomposeConfig(group_size=4))
        assert naive_reconstruct_error(np.zeros((3, 5)), layer) == 0.0

    def test_zero_layer_unit_norm_matrix(self):
        layer, _ = decompose(np.zeros((2, 2)), DecomposeConfig(group_size=2))
        w = np.full((2, 2), 0.5)  # Frobenius norm exactly 1
        assert naive_reconstruct_error(w, layer) == pytest.approx(1.0, rel=1e-12)

    def test_matches_trace_error(self, rng):
        for _ in range(5):
            w = rng.standard_normal((4, 11))
            layer, trace = decompose(w, DecomposeConfig(group_size=4))
            assert naive_reconstruct_error(w, layer) == pytest.approx(
                trace.final_error, rel=1e-9
            )

    def test_matches_vectorized_reconstruction(self, rng):
        w = rng.standard_normal((3, 7))
        layer, _ = decompose(w, DecomposeConfig(group_size=3))
        vec = np.linalg.norm(w - reconstruct(layer))
        assert naive_reconstruct_error(w, layer) == pytest.approx(float(vec), rel=1e-12)

    def test_shape_mismatch(self, rng):
        layer, _ = decompose(np.zeros((2, 3)), DecomposeConfig(group_size=3))
        with pytest.raises(ValueError):
            naive_reconstruct_error(np.zeros((2, 4)), layer)
