import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from q3p.bits import as_bits, from_index, occupation_table, to_index
from q3p.constants import DELTA_MAX_DEFAULT, MHZ, OMEGA_MAX_DEFAULT, US
from q3p.pulse import (
    PulseProgram,
    Waveform,
    constant_pulse,
    evaluate,
    knot_times,
    parametrized_pulse,
)

FAST = settings(max_examples=40, deadline=None)


def test_midpoint_interpolation():
    assert evaluate(Waveform([0, 1], [0, 10]), 0.5) == 5.0


def test_exact_at_knots():
    w = Waveform([0, 0.3, 1.0], [1.0, -2.5, 7.0])
    assert [evaluate(w, t) for t in w.times] == [1.0, -2.5, 7.0]


def test_constant_waveform():
    w = Waveform.constant(3.0, 2.0)
    np.testing.assert_array_equal(w(np.linspace(0, 2, 11)), 3.0)


def test_outside_support_rejected():
    w = Waveform([0, 1], [0, 1])
    with pytest.raises(ValueError):
        evaluate(w, 1.1)
    with pytest.raises(ValueError):
        evaluate(w, -0.01)


@pytest.mark.parametrize(
    "times, values",
    [([0.0], [1.0]), ([0.1, 1.0], [0, 0]), ([0, 0.5, 0.5], [0, 1, 2]), ([0, 1], [0, np.nan])],
)
def test_waveform_validation(times, values):
    with pytest.raises(ValueError):
        Waveform(times, values)


@FAST
@given(
    st.lists(st.floats(-1e7, 1e7), min_size=2, max_size=8),
    st.floats(0, 1),
)
def test_continuous_and_bounded(vals, u):
    w = Waveform(np.linspace(0, 1e-6, len(vals)), vals)
    t = u * w.duration
    v = evaluate(w, t)
    assert min(vals) - 1e-6 <= v <= max(vals) + 1e-6
    eps = 1e-15
    assert abs(evaluate(w, min(t + eps, w.duration)) - v) < 1e-6 * (1 + max(map(abs, vals)))


def test_program_modes():
    w = Waveform.constant(1.0, 1.0)
    with pytest.raises(ValueError):
        PulseProgram((w, w), (w,), mode="global")
    local = PulseProgram((w,), (w, w, w), mode="local")
    local.check_qubits(3)
    with pytest.raises(ValueError):
        local.check_qubits(4)
    with pytest.raises(ValueError, match="non-negative"):
        PulseProgram(Waveform.constant(-1.0, 1.0), w)
    with pytest.raises(ValueError, match="duration"):
        PulseProgram(w, Waveform.constant(1.0, 2.0))


def test_program_json_round_trip():
    p = parametrized_pulse([1e6, 2e6, 3e6], [-1e6, 0.0, 1e6])
    q = PulseProgram.from_dict(p.to_dict())
    for a, b in zip(p.omega + p.delta, q.omega + q.delta):
        assert np.array_equal(a.times, b.times) and np.array_equal(a.values, b.values)


def test_trapezoid_for_flat_rabi_params():
    om = OMEGA_MAX_DEFAULT
    p = parametrized_pulse([om] * 3, [0.0] * 3)
    w = p.omega[0]
    np.testing.assert_array_equal(w.values, [0, om, om, om, 0])
    assert w.times[0] == 0 and w.times[-1] == pytest.approx(4 * US)


def test_two_point_detuning_ramp():
    d = 2 * MHZ
    p = parametrized_pulse([1e6, 1e6], [-d, d], 1e-6)
    w = p.delta[0]
    assert evaluate(w, 0.0) == -d and evaluate(w, 1e-6) == d
    assert evaluate(w, 0.5e-6) == pytest.approx(0.0, abs=1e-6)


@FAST
@given(st.integers(2, 25), st.integers(0, 10_000))
def test_params_round_trip_through_knots(m, seed):
    rng = np.random.default_rng(seed)
    om = rng.uniform(0, OMEGA_MAX_DEFAULT, m)
    de = rng.uniform(-DELTA_MAX_DEFAULT, DELTA_MAX_DEFAULT, m)
    p = parametrized_pulse(om, de)
    to, td = knot_times(m, p.duration)
    np.testing.assert_allclose(evaluate(p.omega[0], to), om, rtol=1e-12)
    np.testing.assert_allclose(evaluate(p.delta[0], td), de, rtol=1e-12)
    assert evaluate(p.omega[0], 0.0) == 0.0
    assert evaluate(p.omega[0], p.duration) == 0.0


def test_bounds_enforced():
    with pytest.raises(ValueError):
        parametrized_pulse([OMEGA_MAX_DEFAULT * 1.01, 0], [0, 0])
    with pytest.raises(ValueError):
        parametrized_pulse([0, 0], [0, -DELTA_MAX_DEFAULT * 1.5])
    with pytest.raises(ValueError):
        parametrized_pulse([0], [0])


def test_constant_pulse():
    p = constant_pulse(1.0, -2.0, 3.0)
    assert p.duration == 3.0
    np.testing.assert_array_equal(p.omega_at(1.0, 4), [1.0] * 4)
    np.testing.assert_array_equal(p.delta_at(2.0, 2), [-2.0] * 2)


# -- bit conventions ------------------------------------------------------------


def test_bit_order():
    assert to_index("100") == 1
    assert to_index("001") == 4
    assert from_index(6, 3) == "011"
    np.testing.assert_array_equal(occupation_table(2), [[0, 0], [1, 0], [0, 1], [1, 1]])


def test_bits_validation():
    with pytest.raises(ValueError):
        as_bits("10a")
    with pytest.raises(ValueError):
        as_bits([0, 2])
    with pytest.raises(ValueError):
        as_bits("101", 4)


@FAST
@given(st.integers(1, 12), st.data())
def test_index_round_trip(m, data):
    k = data.draw(st.integers(0, 2**m - 1))
    assert to_index(from_index(k, m)) == k
    assert to_index(occupation_table(m)[k]) == k
