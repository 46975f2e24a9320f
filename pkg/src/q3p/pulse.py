"""Piecewise-linear laser controls for global and locally addressed drives."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .constants import DELTA_MAX_DEFAULT, DURATION_DEFAULT, OMEGA_MAX_DEFAULT

_T_TOL = 1e-12


@dataclass(frozen=True)
class Waveform:
    """Piecewise-linear function of time defined by ``(time, value)`` knots.

    Times are in seconds, values in rad/s. The first knot sits at ``t = 0`` and
    the last one defines the duration.
    """

    times: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        times = np.asarray(self.times, dtype=float).reshape(-1)
        values = np.asarray(self.values, dtype=float).reshape(-1)
        if times.size < 2:
            raise ValueError("a waveform needs at least two knots")
        if times.size != values.size:
            raise ValueError("times and values must have the same length")
        if times[0] != 0.0:
            raise ValueError("the first knot must be at t = 0")
        if np.any(np.diff(times) <= 0):
            raise ValueError("knot times must be strictly increasing")
        if not np.all(np.isfinite(values)):
            raise ValueError("knot values must be finite")
        times.setflags(write=False)
        values.setflags(write=False)
        object.__setattr__(self, "times", times)
        object.__setattr__(self, "values", values)

    @classmethod
    def constant(cls, value: float, duration: float) -> "Waveform":
        return cls([0.0, duration], [value, value])

    @classmethod
    def ramp(cls, start: float, stop: float, duration: float) -> "Waveform":
        return cls([0.0, duration], [start, stop])

    @property
    def duration(self) -> float:
        return float(self.times[-1])

    def __call__(self, t):
        return evaluate(self, t)

    def max_abs(self) -> float:
        # piecewise linear: extrema are at the knots
        return float(np.max(np.abs(self.values)))

    def to_dict(self) -> dict:
        return {"knots": [[float(t), float(v)] for t, v in zip(self.times, self.values)]}

    @classmethod
    def from_dict(cls, data: dict) -> "Waveform":
        knots = np.asarray(data["knots"], dtype=float)
        return cls(knots[:, 0], knots[:, 1])


def evaluate(w: Waveform, t):
    """Linear interpolation of ``w`` at time(s) ``t``; raises outside ``[0, T]``."""
    t_arr = np.asarray(t, dtype=float)
    if np.any(t_arr < -_T_TOL) or np.any(t_arr > w.duration + _T_TOL):
        raise ValueError(f"time {t} outside waveform support [0, {w.duration}]")
    out = np.interp(t_arr, w.times, w.values)
    return float(out) if out.ndim == 0 else out


@dataclass(frozen=True)
class PulseProgram:
    """Rabi and detuning controls for an M-qubit register.

    In ``global`` mode there is one Rabi and one detuning waveform shared by all
    qubits. In ``local`` mode there is one detuning waveform per qubit and either
    one shared Rabi waveform or one per qubit.
    """

    omega: tuple
    delta: tuple
    mode: str = "global"

    def __post_init__(self):
        omega = tuple(self.omega) if not isinstance(self.omega, Waveform) else (self.omega,)
        delta = tuple(self.delta) if not isinstance(self.delta, Waveform) else (self.delta,)
        object.__setattr__(self, "omega", omega)
        object.__setattr__(self, "delta", delta)
        if self.mode not in ("global", "local"):
            raise ValueError(f"unknown pulse mode {self.mode!r}")
        if not omega or not delta:
            raise ValueError("pulse needs at least one Rabi and one detuning waveform")
        if self.mode == "global" and (len(omega) != 1 or len(delta) != 1):
            raise ValueError("global pulses carry exactly one Rabi and one detuning waveform")
        if self.mode == "local" and len(omega) not in (1, len(delta)):
            raise ValueError("local pulses need one shared Rabi waveform or one per qubit")
        duration = omega[0].duration
        for w in omega + delta:
            if abs(w.duration - duration) > _T_TOL * max(1.0, duration) + 1e-18:
                raise ValueError("all waveforms must share the same duration")
        for w in omega:
            if np.any(w.values < 0):
                raise ValueError("Rabi frequency must be non-negative")

    @property
    def duration(self) -> float:
        return self.omega[0].duration

    @property
    def n_channels(self) -> int | None:
        """Number of addressed qubits in local mode, ``None`` for global pulses."""
        return len(self.delta) if self.mode == "local" else None

    def check_qubits(self, n_qubits: int) -> None:
        if self.mode == "local" and len(self.delta) != n_qubits:
            raise ValueError(
                f"local pulse has {len(self.delta)} detuning channels for {n_qubits} qubits"
            )

    def omega_at(self, t: float, n_qubits: int) -> np.ndarray:
        vals = np.array([np.interp(t, w.times, w.values) for w in self.omega])
        return np.broadcast_to(vals, (n_qubits,)) if vals.size == 1 else vals

    def delta_at(self, t: float, n_qubits: int) -> np.ndarray:
        vals = np.array([np.interp(t, w.times, w.values) for w in self.delta])
        return np.broadcast_to(vals, (n_qubits,)) if vals.size == 1 else vals

    def uniform_omega(self) -> bool:
        first = self.omega[0]
        return all(
            np.array_equal(w.times, first.times) and np.array_equal(w.values, first.values)
            for w in self.omega[1:]
        )

    def max_omega(self) -> float:
        return max(w.max_abs() for w in self.omega)

    def max_delta(self) -> float:
        return max(w.max_abs() for w in self.delta)

    def to_dict(self) -> dict:
        return {
            "mode": self.mode,
            "duration": self.duration,
            "omega": [w.to_dict() for w in self.omega],
            "delta": [w.to_dict() for w in self.delta],
        }

    @classmethod
    def from_dict(cls, data: dict) -> "PulseProgram":
        return cls(
            omega=tuple(Waveform.from_dict(w) for w in data["omega"]),
            delta=tuple(Waveform.from_dict(w) for w in data["delta"]),
            mode=data.get("mode", "global"),
        )


def constant_pulse(omega: float, delta: float, duration: float) -> PulseProgram:
    """Square global pulse with instantaneous switch-on."""
    return PulseProgram(Waveform.constant(omega, duration), Waveform.constant(delta, duration))


def knot_times(m: int, duration: float) -> tuple[np.ndarray, np.ndarray]:
    """Control times for ``m`` Rabi points (interior) and ``m`` detuning points (inclusive)."""
    omega_t = duration * np.arange(1, m + 1) / (m + 1)
    delta_t = duration * np.arange(m) / (m - 1)
    return omega_t, delta_t


def parametrized_pulse(
    omega_params: Sequence[float],
    delta_params: Sequence[float],
    duration: float = DURATION_DEFAULT,
    omega_max: float = OMEGA_MAX_DEFAULT,
    delta_max: float = DELTA_MAX_DEFAULT,
) -> PulseProgram:
    """Global pulse from ``m`` Rabi and ``m`` detuning control points.

    Rabi points sit at ``T*k/(m+1)`` for ``k = 1..m`` with zero knots added at
    both ends, so the drive always switches on and off smoothly. Detuning points
    sit at ``T*k/(m-1)`` for ``k = 0..m-1``.
    """
    omega_params = np.asarray(omega_params, dtype=float)
    delta_params = np.asarray(delta_params, dtype=float)
    m = omega_params.size
    if m < 2 or delta_params.size != m:
        raise ValueError("need the same number (>= 2) of Rabi and detuning parameters")
    tol = 1e-9 * max(omega_max, delta_max)
    if np.any(omega_params < -tol) or np.any(omega_params > omega_max + tol):
        raise ValueError(f"Rabi parameters must lie in [0, {omega_max}]")
    if np.any(np.abs(delta_params) > delta_max + tol):
        raise ValueError(f"detuning parameters must lie in [-{delta_max}, {delta_max}]")
    omega_params = np.clip(omega_params, 0.0, omega_max)
    delta_params = np.clip(delta_params, -delta_max, delta_max)

    omega_t, delta_t = knot_times(m, duration)
    omega = Waveform(
        np.concatenate([[0.0], omega_t, [duration]]),
        np.concatenate([[0.0], omega_params, [0.0]]),
    )
    delta = Waveform(delta_t, delta_params)
    return PulseProgram(omega, delta, mode="global")
