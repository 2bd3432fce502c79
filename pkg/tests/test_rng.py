"""
Tests for the counter-based variate stream
"""

import numpy as np
import pytest

from sbvsim.exceptions import DomainError
from sbvsim.rng import MAX_SEED, uniform_variates


class TestUniformVariates:
    def test_shape_and_range(self):
        u = uniform_variates(5, 0, 1000)
        assert u.shape == (1000, 2)
        assert np.all((u >= 0) & (u < 1))

    def test_chunks_reassemble(self):
        whole = uniform_variates(42, 0, 500)
        parts = [uniform_variates(42, start, count) for start, count in ((0, 123), (123, 7), (130, 370))]
        assert np.array_equal(np.concatenate(parts), whole)

    def test_order_independent(self):
        late = uniform_variates(9, 300, 50)
        early = uniform_variates(9, 0, 300)
        assert np.array_equal(uniform_variates(9, 0, 350), np.concatenate([early, late]))

    def test_seed_changes_stream(self):
        assert not np.array_equal(uniform_variates(1, 0, 16), uniform_variates(2, 0, 16))

    def test_repeatable(self):
        assert np.array_equal(uniform_variates(MAX_SEED, 10, 64), uniform_variates(MAX_SEED, 10, 64))

    def test_empty(self):
        assert uniform_variates(1, 0, 0).shape == (0, 2)

    @pytest.mark.parametrize("seed, start, count", [(-1, 0, 1), (MAX_SEED + 1, 0, 1), (1, -1, 1), (1, 0, -1)])
    def test_invalid_arguments(self, seed, start, count):
        with pytest.raises(DomainError):
            uniform_variates(seed, start, count)

    def test_roughly_uniform(self):
        u = uniform_variates(3, 0, 100_000)
        assert u.mean(axis=0) == pytest.approx([0.5, 0.5], abs=0.005)
