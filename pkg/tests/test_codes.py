"""Modulation code generation and correlation kernel tests."""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from phasesweep import codes
from phasesweep.errors import (DimensionError, InvalidParameterError,
                               InvalidSeedError, UnsupportedParameterError)


def chip_oracle_correlation(f, g, lag_chips):
    """Direct-summation oracle for the discrete circular correlation."""
    length = f.length
    return sum(int(f.chips[t]) * int(g.chips[(t + lag_chips) % length])
               for t in range(length))


class TestGenerateMsequence:
    def test_length_31_for_register_5(self):
        code = codes.generate_msequence(5)
        assert code.length == 31

    def test_register_3_balanced_levels(self):
        # enumerating the 7 LFSR states by hand gives four of one level,
        # three of the other
        code = codes.generate_msequence(3)
        counts = sorted([np.sum(code.chips == 1), np.sum(code.chips == -1)])
        assert counts == [3, 4]

    def test_zero_seed_rejected(self):
        with pytest.raises(InvalidSeedError):
            codes.generate_msequence(5, seed_state=0)

    def test_unsupported_register_length(self):
        for bad in (1, 17, 0, -3):
            with pytest.raises(UnsupportedParameterError):
                codes.generate_msequence(bad)

    def test_levels_are_plus_minus_one(self):
        code = codes.generate_msequence(6)
        assert set(np.unique(code.chips)) == {-1, 1}

    @pytest.mark.parametrize("m", range(2, 11))
    def test_period_is_exactly_2m_minus_1(self, m):
        length = (1 << m) - 1
        doubled = np.concatenate([codes.generate_msequence(m).chips] * 2)
        # no smaller period divides the sequence
        for p in range(1, length):
            if length % p == 0 and np.array_equal(doubled[:p],
                                                  doubled[p:2 * p]):
                repeats = np.array_equal(
                    doubled[:length], np.tile(doubled[:p], length // p))
                assert not repeats, f"period {p} < {length}"

    @pytest.mark.parametrize("m", range(2, 11))
    def test_every_nonzero_state_once(self, m):
        # the output bits, windowed m at a time, visit every nonzero state
        code = codes.generate_msequence(m)
        bits = (code.chips + 1) // 2
        doubled = np.concatenate([bits, bits])
        states = set()
        for i in range((1 << m) - 1):
            word = 0
            for j in range(m):
                word = (word << 1) | int(doubled[i + j])
            states.add(word)
        assert len(states) == (1 << m) - 1
        assert 0 not in states

    def test_seed_changes_phase_not_content(self):
        a = codes.generate_msequence(5, seed_state=1)
        b = codes.generate_msequence(5, seed_state=9)
        rolled = any(np.array_equal(np.roll(a.chips, s), b.chips)
                     for s in range(a.length))
        assert rolled


class TestCircularCrossCorrelation:
    @pytest.mark.parametrize("m", range(2, 11))
    def test_msequence_two_level_autocorrelation(self, m):
        code = codes.generate_msequence(m)
        corr = codes.circular_cross_correlation(code, code)
        assert corr[0] == code.length
        assert np.all(corr[1:] == -1)

    def test_matches_direct_summation_oracle(self):
        f = codes.generate_msequence(5)
        g = codes.ModulationCode(np.roll(f.chips, 7), f.chip_duration)
        corr = codes.circular_cross_correlation(f, g)
        for lag in range(f.length):
            assert corr[lag] == chip_oracle_correlation(f, g, lag)

    def test_shift_moves_peak(self):
        f = codes.generate_msequence(5)
        for shift in (0, 1, 5, 30):
            g = f.shifted(shift)  # g delayed by `shift` chips
            corr = codes.circular_cross_correlation(f, g)
            assert np.argmax(corr) == shift

    def test_constant_sequences(self):
        length = 9
        ones = codes.ModulationCode(np.ones(length, dtype=int), 1e-8)
        corr = codes.circular_cross_correlation(ones, ones)
        assert np.all(corr == length)

    def test_length_mismatch(self):
        with pytest.raises(DimensionError):
            codes.circular_cross_correlation(codes.generate_msequence(3),
                                             codes.generate_msequence(4))

    def test_integer_dtype(self):
        code = codes.generate_msequence(4)
        corr = codes.circular_cross_correlation(code, code)
        assert np.issubdtype(corr.dtype, np.integer)


def numerical_kernel_oracle(f, g, lag, substeps=1000):
    """Riemann integral of f(t) g(t + lag) over one period.

    Exact when lag is a multiple of chip_duration / substeps because the
    integrand is then piecewise constant between grid points.
    """
    dt = f.chip_duration / substeps
    fs = np.repeat(f.chips, substeps).astype(float)
    gs = np.repeat(g.chips, substeps).astype(float)
    shift = int(round(lag / dt))
    return float(np.sum(fs * np.roll(gs, -shift)) * dt)


class TestContinuousKernel:
    def test_peak_and_adjacent_chip_values(self):
        code = codes.generate_msequence(5)
        kernel = codes.continuous_kernel(code, code, upsample=10)
        chip = code.chip_duration
        assert kernel.evaluate(0.0) == pytest.approx(31 * chip, rel=1e-12)
        assert kernel.evaluate(chip) == pytest.approx(-chip, rel=1e-12)
        assert kernel.evaluate(-chip) == pytest.approx(-chip, rel=1e-12)

    def test_upsample_one_matches_discrete_correlation(self):
        code = codes.generate_msequence(4)
        kernel = codes.continuous_kernel(code, code, upsample=1)
        discrete = codes.circular_cross_correlation(code, code)
        np.testing.assert_allclose(kernel.samples,
                                   discrete * code.chip_duration, rtol=1e-12)

    def test_triangular_around_peak(self):
        code = codes.generate_msequence(5)
        kernel = codes.continuous_kernel(code, code, upsample=8)
        chip = code.chip_duration
        xs = np.linspace(0, chip, 9)
        values = kernel.evaluate(xs)
        slopes = np.diff(values) / np.diff(xs)
        np.testing.assert_allclose(slopes, slopes[0], rtol=1e-9)
        # symmetric triangle: h(x) == h(-x) near the peak
        np.testing.assert_allclose(kernel.evaluate(-xs), values, rtol=1e-9)

    def test_agrees_with_integration_oracle_at_fine_lags(self):
        f = codes.generate_msequence(5)
        g = f.shifted(11)
        kernel = codes.continuous_kernel(f, g, upsample=10)
        rng = np.random.default_rng(42)
        dt = f.chip_duration / 1000
        lags = np.round(rng.uniform(-2, 35, 25) * f.chip_duration / dt) * dt
        for lag in lags:
            expect = numerical_kernel_oracle(f, g, lag)
            assert kernel.evaluate(lag) == pytest.approx(expect, rel=1e-9,
                                                         abs=1e-22)

    def test_integer_chip_lags_match_discrete(self):
        f = codes.generate_msequence(6)
        g = f.shifted(3)
        kernel = codes.continuous_kernel(f, g, upsample=7)
        discrete = codes.circular_cross_correlation(f, g)
        lags = np.arange(f.length) * f.chip_duration
        np.testing.assert_allclose(kernel.evaluate(lags),
                                   discrete * f.chip_duration, rtol=1e-9)

    def test_unique_peak_in_period_for_msequence(self):
        code = codes.generate_msequence(5)
        kernel = codes.continuous_kernel(code, code, upsample=4)
        assert np.sum(kernel.samples == kernel.samples.max()) == 1

    def test_length_mismatch(self):
        with pytest.raises(DimensionError):
            codes.continuous_kernel(codes.generate_msequence(3),
                                    codes.generate_msequence(4))

    def test_bad_upsample(self):
        code = codes.generate_msequence(3)
        with pytest.raises(InvalidParameterError):
            codes.continuous_kernel(code, code, upsample=0)


class TestModulationCode:
    def test_rejects_bad_levels(self):
        with pytest.raises(InvalidParameterError):
            codes.ModulationCode(np.array([1, 0, -1]), 1e-8)

    def test_rejects_bad_chip_duration(self):
        with pytest.raises(InvalidParameterError):
            codes.ModulationCode(np.array([1, -1]), 0.0)

    @given(st.integers(min_value=2, max_value=8),
           st.integers(min_value=1, max_value=255))
    @settings(max_examples=25, deadline=None)
    def test_any_valid_seed_is_maximal(self, m, seed):
        seed = seed % ((1 << m) - 1) + 1
        code = codes.generate_msequence(m, seed_state=seed)
        corr = codes.circular_cross_correlation(code, code)
        assert corr[0] == code.length and np.all(corr[1:] == -1)


def test_code_csv_round_trip(tmp_path):
    from phasesweep import fileio
    code = codes.generate_msequence(3)
    path = tmp_path / "code.csv"
    codes.code_to_csv(code, path)
    header, rows = fileio.read_csv(path)
    assert header == ["index", "lag_seconds", "value"]
    assert len(rows) == code.length
    assert [int(r[2]) for r in rows] == list(code.chips)


def test_kernel_csv(tmp_path):
    from phasesweep import fileio
    code = codes.generate_msequence(3)
    kernel = codes.continuous_kernel(code, code, upsample=2)
    path = tmp_path / "kernel.csv"
    codes.kernel_to_csv(kernel, path)
    header, rows = fileio.read_csv(path)
    assert header == ["index", "lag_seconds", "value"]
    assert len(rows) == kernel.samples.size
    assert float(rows[0][2]) == kernel.samples[0]
