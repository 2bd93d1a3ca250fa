import math

import numpy as np
import pytest

from hetasym import (
    QuadratureTrace,
    ReferenceSignalSpec,
    UNITS,
    ValidationError,
    make_phase_ramp,
    to_external_quadratures,
    to_internal_quadratures,
)

TWO_PI = 2.0 * math.pi


class TestMakePhaseRamp:
    def test_four_points(self):
        np.testing.assert_allclose(make_phase_ramp(4, 0.0, TWO_PI),
                                   [0.0, math.pi / 2, math.pi, 3 * math.pi / 2])

    def test_two_points(self):
        np.testing.assert_allclose(make_phase_ramp(2, 0.0, math.pi), [0.0, math.pi / 2])

    def test_uniform_step(self):
        ramp = make_phase_ramp(360, 0.0, TWO_PI)
        np.testing.assert_allclose(np.diff(ramp), TWO_PI / 360, rtol=1e-12)
        assert ramp[0] == 0.0
        assert ramp[-1] < TWO_PI

    def test_strictly_monotone_and_duplicate_free(self):
        ramp = make_phase_ramp(1000, -1.0, 5.0)
        assert np.all(np.diff(ramp) > 0)
        assert np.unique(ramp).size == ramp.size

    @pytest.mark.parametrize("n,start,stop", [(1, 0, 1), (0, 0, 1), (5, 1.0, 1.0), (5, 2.0, 1.0)])
    def test_rejects_bad_arguments(self, n, start, stop):
        with pytest.raises(ValidationError):
            make_phase_ramp(n, start, stop)


class TestQuadratureTrace:
    def test_basic_construction(self):
        tr = QuadratureTrace([1.0, 2.0], [3.0, 4.0], [0.1, 0.2])
        assert tr.n == 2
        assert tr.convention == "snu"

    def test_arrays_are_read_only(self):
        tr = QuadratureTrace([1.0], [2.0])
        with pytest.raises(ValueError):
            tr.x[0] = 5.0

    def test_rejects_length_mismatch(self):
        with pytest.raises(ValidationError):
            QuadratureTrace([1.0, 2.0], [3.0])
        with pytest.raises(ValidationError):
            QuadratureTrace([1.0, 2.0], [3.0, 4.0], [0.1])

    def test_rejects_non_finite(self):
        with pytest.raises(ValidationError):
            QuadratureTrace([1.0, np.nan], [3.0, 4.0])
        with pytest.raises(ValidationError):
            QuadratureTrace([1.0, 2.0], [np.inf, 4.0])

    def test_rejects_empty(self):
        with pytest.raises(ValidationError):
            QuadratureTrace([], [])

    def test_require_samples_guard(self):
        tr = QuadratureTrace([1.0], [2.0])
        with pytest.raises(ValidationError):
            tr.require_samples(2, "variance")


class TestConventionBridge:
    def test_sqrt_two_division(self):
        tr = QuadratureTrace([math.sqrt(2.0)], [0.0])
        internal = to_internal_quadratures(tr)
        assert internal.x[0] == pytest.approx(1.0, abs=1e-15)
        assert internal.p[0] == 0.0
        assert internal.convention == "internal"

    def test_zero_fixed_point(self):
        internal = to_internal_quadratures(QuadratureTrace([0.0], [0.0]))
        assert internal.x[0] == 0.0 and internal.p[0] == 0.0

    def test_round_trip_identity(self):
        rng = np.random.default_rng(3)
        x, p = rng.normal(size=50), rng.normal(size=50)
        tr = QuadratureTrace(x, p)
        back = to_external_quadratures(to_internal_quadratures(tr))
        np.testing.assert_allclose(back.x, x, rtol=1e-12)
        np.testing.assert_allclose(back.p, p, rtol=1e-12)
        assert back.convention == "snu"

    def test_double_conversion_rejected(self):
        internal = to_internal_quadratures(QuadratureTrace([1.0], [1.0]))
        with pytest.raises(ValidationError):
            to_internal_quadratures(internal)
        with pytest.raises(ValidationError):
            to_external_quadratures(QuadratureTrace([1.0], [1.0]))

    def test_ratio_preserved(self):
        tr = QuadratureTrace([3.0, 5.0], [7.0, 11.0])
        internal = to_internal_quadratures(tr)
        for i in range(2):
            for j in range(2):
                assert internal.x[i] / internal.p[j] == pytest.approx(
                    tr.x[i] / tr.p[j], rel=1e-14)

    def test_units_constant(self):
        assert UNITS.vacuum_variance == 1.0
        assert UNITS.tomography_scale == pytest.approx(math.sqrt(2.0))


class TestReferenceSignalSpec:
    def test_ramp_constructor(self):
        spec = ReferenceSignalSpec.ramp(552.0, 360)
        assert spec.amplitude == pytest.approx(math.sqrt(552.0))
        assert spec.n_samples == 360
        assert spec.spans_full_rotation

    def test_pulses_per_phase(self):
        spec = ReferenceSignalSpec.ramp(16.0, 10, pulses_per_phase=3)
        assert spec.n_samples == 30
        phases = spec.sample_phases()
        assert phases.size == 30
        np.testing.assert_allclose(phases[:3], spec.phases[0])

    def test_partial_sweep_flagged(self):
        spec = ReferenceSignalSpec(16.0, make_phase_ramp(100, 0.0, math.pi))
        assert not spec.spans_full_rotation

    def test_rejects_bad_amplitude(self):
        with pytest.raises(ValidationError):
            ReferenceSignalSpec(-1.0)
        with pytest.raises(ValidationError):
            ReferenceSignalSpec(0.0)

    def test_rejects_bad_pulses(self):
        with pytest.raises(ValidationError):
            ReferenceSignalSpec(1.0, pulses_per_phase=0)
