import numpy as np
import pytest

from tritplane.decompose import reconstruct
from tritplane.errors import InvalidTritCodeError, ShapeError
from tritplane.kernel import (
    MultiplyCensus,
    bench_matvec,
    forward,
    forward_packed,
    random_layer,
    ternary_dot,
)
from tritplane.trits import pack_trits


class TestTernaryDot:
    def test_one_hot_selects(self):
        x = np.array([3.0, 5.0, 2.0])
        assert ternary_dot([0, 1, 0], x) == 5.0

    def test_mixed_signs(self):
        assert ternary_dot([1, 0, -1], [3.0, 5.0, 2.0]) == 1.0

    def test_all_zero(self):
        assert ternary_dot([0, 0, 0], [3.0, 5.0, 2.0]) == 0.0

    def test_length_mismatch(self):
        with pytest.raises(ShapeError):
            ternary_dot([1, 0], [1.0, 2.0, 3.0])

    def test_equals_dot_product(self, rng):
        for _ in range(20):
            d = int(rng.integers(1, 40))
            t = rng.integers(-1, 2, size=d)
            x = rng.standard_normal(d)
            assert ternary_dot(t, x) == pytest.approx(float(t @ x), rel=1e-12, abs=1e-12)


class TestForward:
    def test_zero_activations(self, rng):
        layer = random_layer(5, 12, 4, rng)
        assert not forward(layer, np.zeros(12)).any()

    def test_single_group_hand_case(self):
        from tritplane.trits import GroupLayout, LayerMeta, QuantizedLayer

        layer = QuantizedLayer(
            layout=GroupLayout(1, 4, 4),
            plane1=np.array([[1, 0, 0, -1]], dtype=np.int8),
            plane2=np.array([[1, 1, -1, -1]], dtype=np.int8),
            scale1=np.array([2.0]),
            scale2=np.array([1.0]),
            meta=LayerMeta(iterations=1, final_error=0.0),
        )
        # both plane rows sum to zero against all-ones activations
        assert forward(layer, np.ones(4)).tolist() == [0.0]

    def test_matches_dense_reconstruction(self, rng):
        for _ in range(10):
            n = int(rng.integers(1, 40))
            d = int(rng.integers(1, 200))
            g = int(rng.integers(1, 40))
            layer = random_layer(n, d, g, rng)
            x = rng.standard_normal(d)
            expected = reconstruct(layer) @ x
            got = forward(layer, x)
            scale = max(np.linalg.norm(expected), 1e-12)
            assert np.linalg.norm(got - expected) / scale < 1e-5

    def test_batched_matches_columnwise(self, rng):
        layer = random_layer(6, 20, 8, rng)
        x = rng.standard_normal((20, 5))
        batched = forward(layer, x)
        assert batched.shape == (6, 5)
        for b in range(5):
            assert np.array_equal(batched[:, b], forward(layer, x[:, b]))

    def test_linearity(self, rng):
        layer = random_layer(7, 33, 8, rng)
        x = rng.standard_normal(33)
        y = rng.standard_normal(33)
        a, b = 2.5, -1.25
        lhs = forward(layer, a * x + b * y)
        rhs = a * forward(layer, x) + b * forward(layer, y)
        assert np.linalg.norm(lhs - rhs) <= 1e-9 * max(np.linalg.norm(rhs), 1.0)

    def test_dimension_mismatch(self, rng):
        layer = random_layer(3, 8, 4, rng)
        with pytest.raises(ShapeError):
            forward(layer, np.zeros(9))
        with pytest.raises(ShapeError):
            forward(layer, np.zeros((9, 2)))
        with pytest.raises(ShapeError):
            forward(layer, np.zeros((2, 8, 1)))

    def test_multiplication_census(self, rng):
        # exactly 2 * n * ceil(d/G) scalar multiplies, independent of d
        for n, d, g in [(4, 100, 128), (4, 128, 128), (6, 129, 128), (3, 17, 4)]:
            layer = random_layer(n, d, g, rng)
            census = MultiplyCensus()
            forward(layer, rng.standard_normal(d), census)
            assert census.count == 2 * n * (-(-d // g))

    def test_census_for_batches_scales_with_columns(self, rng):
        layer = random_layer(4, 16, 8, rng)
        census = MultiplyCensus()
        forward(layer, rng.standard_normal((16, 3)), census)
        assert census.count == 3 * 2 * 4 * 2


class TestForwardPacked:
    def test_agrees_bit_for_bit(self, rng):
        for _ in range(5):
            n = int(rng.integers(1, 20))
            d = int(rng.integers(1, 100))
            g = int(rng.integers(1, 20))
            layer = random_layer(n, d, g, rng)
            x = rng.standard_normal(d)
            y = forward_packed(
                layer.layout,
                pack_trits(layer.plane1),
                pack_trits(layer.plane2),
                layer.scale1,
                layer.scale2,
                x,
            )
            assert np.array_equal(y, forward(layer, x))

    def test_zero_activations(self, rng):
        layer = random_layer(3, 8, 4, rng)
        y = forward_packed(
            layer.layout,
            pack_trits(layer.plane1),
            pack_trits(layer.plane2),
            layer.scale1,
            layer.scale2,
            np.zeros(8),
        )
        assert not y.any()

    def test_corrupt_code_rejected(self, rng):
        layer = random_layer(2, 8, 4, rng)
        bad = b"\xff" * len(pack_trits(layer.plane1))
        with pytest.raises(InvalidTritCodeError):
            forward_packed(
                layer.layout, bad, pack_trits(layer.plane2),
                layer.scale1, layer.scale2, np.zeros(8),
            )


class TestBench:
    def test_small_report(self):
        report = bench_matvec(64, 64, 32, repetitions=3, seed=1)
        assert report["n"] == 64 and report["d"] == 64 and report["G"] == 32
        assert report["reps"] == 3
        assert report["ns_dense"] > 0 and report["ns_ternary"] > 0
        assert report["ratio"] == pytest.approx(report["ns_ternary"] / report["ns_dense"])

    def test_zero_repetitions_rejected(self):
        with pytest.raises(ValueError):
            bench_matvec(8, 8, 4, repetitions=0)

    def test_sparsity_fields_present(self):
        report = bench_matvec(512, 512, 128, repetitions=1, seed=2)
        assert 0.0 <= report["sparsity1"] <= 1.0
        assert 0.0 <= report["sparsity2"] <= 1.0

    def test_bad_sizes_rejected(self):
        with pytest.raises(ValueError):
            bench_matvec(0, 8, 4, repetitions=1)
