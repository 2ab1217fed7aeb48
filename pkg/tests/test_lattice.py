"""Configurations, the front, gap events and front-anchored observables."""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from fa1f.lattice import (FrontPath, NoFrontError, SpinConfig, WindowTooSmallError,
                          distance_to_zero, front, gap_event, is_front_anchored,
                          make_initial, pattern_code, seen_from_front)


def config_from_zeros(window_lo, window_hi, zeros):
    spins = np.ones(window_hi - window_lo + 1, dtype=np.uint8)
    for z in zeros:
        spins[z - window_lo] = 0
    return SpinConfig(window_lo, spins)


class TestMakeInitial:
    def test_delta0(self):
        cfg = make_initial("delta0", (-10, 10))
        assert list(cfg.zeros()) == [0]
        assert front(cfg) == 0

    def test_bernoulli_right(self):
        cfg = make_initial("bernoulli_right", (-50, 5000), p=0.9, seed=3)
        assert cfg.get(0) == 0
        assert np.all(cfg.spins[:50] == 1)
        density = (cfg.spins[51:] == 0).mean()
        assert abs(density - 0.1) < 0.02
        assert front(cfg) == 0

    def test_bernoulli_fill_cap(self):
        cfg = make_initial("bernoulli_right", (-10, 1000), p=0.5, seed=1, fill_hi=100)
        assert np.all(cfg.spins[cfg.index(101):] == 1)
        # the draw does not depend on the window beyond the cap
        cfg2 = make_initial("bernoulli_right", (-10, 500), p=0.5, seed=1, fill_hi=100)
        assert np.array_equal(cfg.spins[:cfg.index(101)], cfg2.spins[:cfg2.index(101)])

    def test_explicit(self):
        cfg = make_initial("explicit", (-5, 10), pattern="0110")
        assert cfg.get(0) == 0 and cfg.get(1) == 1 and cfg.get(3) == 0
        assert front(cfg) == 0

    def test_explicit_must_anchor_a_zero_at_origin(self):
        with pytest.raises(ValueError):
            make_initial("explicit", (-5, 10), pattern="10")
        with pytest.raises(ValueError):
            make_initial("explicit", (-5, 10), pattern="")

    def test_window_must_contain_origin(self):
        with pytest.raises(ValueError):
            make_initial("delta0", (1, 10))

    def test_unknown_kind(self):
        with pytest.raises(ValueError):
            make_initial("noise", (-5, 5))


class TestFront:
    def test_delta0(self):
        assert front(make_initial("delta0", (-4, 4))) == 0

    def test_leftmost_of_several(self):
        cfg = config_from_zeros(-10, 10, [-3, 5])
        assert front(cfg) == -3

    def test_all_ones_is_an_error(self):
        cfg = SpinConfig(-2, np.ones(5, dtype=np.uint8))
        with pytest.raises(NoFrontError):
            front(cfg)
        assert not is_front_anchored(cfg)


class TestGapEvent:
    def test_zeros_everywhere(self):
        cfg = config_from_zeros(0, 10, range(0, 11))
        for l in (1, 3, 11):
            assert gap_event(cfg, 0, 10, l)

    def test_all_ones_box(self):
        cfg = config_from_zeros(-20, 20, [-15])
        assert not gap_event(cfg, 0, 10, 5)

    def test_spec_example_zeros_0_4_8(self):
        cfg = config_from_zeros(-2, 12, [0, 4, 8])
        assert gap_event(cfg, 0, 10, 4)
        assert not gap_event(cfg, 0, 10, 3)

    def test_box_shorter_than_gap_is_vacuous(self):
        cfg = config_from_zeros(0, 10, [0])
        assert gap_event(cfg, 5, 8, 10)

    def test_validation(self):
        cfg = config_from_zeros(0, 5, [0])
        with pytest.raises(ValueError):
            gap_event(cfg, 3, 1, 2)
        with pytest.raises(ValueError):
            gap_event(cfg, 1, 3, 0)

    @settings(max_examples=200, deadline=None)
    @given(st.lists(st.integers(0, 1), min_size=1, max_size=40),
           st.data())
    def test_matches_quantifier_definition(self, bits, data):
        """Oracle: direct double loop over the defining quantifiers."""
        spins = np.array(bits, dtype=np.uint8)
        cfg = SpinConfig(0, spins)
        a = data.draw(st.integers(-3, len(bits) + 2))
        b = data.draw(st.integers(a, len(bits) + 4))
        l = data.draw(st.integers(1, 12))

        def brute():
            for y in range(a, b - l + 2):
                if not any(cfg.get(z) == 0 for z in range(y, y + l)):
                    return False
            return True

        assert gap_event(cfg, a, b, l) == brute()


class TestSeenFromFront:
    def test_delta0(self):
        cfg = make_initial("delta0", (-10, 10))
        assert list(seen_from_front(cfg, 3)) == [0, 1, 1, 1]

    def test_front_bit_is_zero(self):
        cfg = config_from_zeros(-5, 15, [2, 4])
        pat = seen_from_front(cfg, 3)
        assert pat[0] == 0
        assert list(pat) == [0, 1, 0, 1]

    def test_window_too_small(self):
        cfg = config_from_zeros(0, 3, [2])
        with pytest.raises(WindowTooSmallError):
            seen_from_front(cfg, 5)

    def test_pattern_code_is_little_endian(self):
        assert pattern_code([0, 1, 1, 1]) == 0b1110
        assert pattern_code([0, 0, 0, 0]) == 0
        assert pattern_code([0, 1, 0, 1]) == 0b1010


class TestDistanceToZero:
    def test_zero_at_site(self):
        cfg = config_from_zeros(0, 6, [3])
        assert distance_to_zero(cfg, 3, (0, 6)) == 0

    def test_adjacent_zero(self):
        cfg = config_from_zeros(0, 6, [4])
        assert distance_to_zero(cfg, 3, (0, 6)) == 1

    def test_boundary_counts_as_empty(self):
        cfg = SpinConfig(1, np.ones(5, dtype=np.uint8))
        assert distance_to_zero(cfg, 3, (1, 5)) == 3
        assert distance_to_zero(cfg, 1, (1, 5)) == 1

    def test_x_outside_boundary(self):
        cfg = SpinConfig(1, np.ones(5, dtype=np.uint8))
        with pytest.raises(ValueError):
            distance_to_zero(cfg, 9, (1, 5))


class TestFrontPath:
    def test_position_lookup_and_increments(self):
        path = FrontPath(times=[0.0, 0.7, 2.1, 2.9],
                         positions=[0, -1, -2, -1])
        assert path.position_at(0.0) == 0
        assert path.position_at(0.7) == -1
        assert path.position_at(1.0) == -1
        assert path.position_at(2.0) == -1
        # integer-time positions: X(1)=-1, X(2)=-1, X(3)=-1
        assert list(path.increments(3)) == [-1, 0, 0]
        assert list(path.jump_sizes()) == [-1, -1, 1]

    def test_query_before_start_fails(self):
        path = FrontPath(times=[1.0], positions=[0])
        with pytest.raises(ValueError):
            path.position_at(0.5)


def test_spin_config_validation():
    with pytest.raises(ValueError):
        SpinConfig(0, np.array([0, 2, 1], dtype=np.uint8))
    with pytest.raises(ValueError):
        SpinConfig(0, np.zeros(0, dtype=np.uint8))
