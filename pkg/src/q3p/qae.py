"""Adiabatic solver: local detunings mapped from the one-body terms, then sample."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import bits as _bits
from .constants import DELTA_MAX_DEFAULT, DURATION_DEFAULT, OMEGA_MAX_DEFAULT
from .emulator import NoiseModel, SampleHistogram, sample_dynamics
from .ising import Placement, PlacementProblem, extract_placement
from .pulse import PulseProgram, Waveform
from .register import BlockadeGraph, Register, blockade_graph


@dataclass(frozen=True)
class AdiabaticSchedule:
    """Triangular Rabi drive with per-qubit linear detuning ramps from ``-c``."""

    final_deltas: np.ndarray
    duration: float = DURATION_DEFAULT
    omega_max: float = OMEGA_MAX_DEFAULT
    c: float = DELTA_MAX_DEFAULT
    delta_max: float = DELTA_MAX_DEFAULT

    def __post_init__(self):
        object.__setattr__(self, "final_deltas", np.asarray(self.final_deltas, dtype=float))
        if self.omega_max <= 0:
            raise ValueError("omega_max must be positive")
        if self.c <= 0:
            raise ValueError("initial detuning magnitude c must be positive")
        if self.duration <= 0:
            raise ValueError("duration must be positive")
        if np.any(np.abs(self.final_deltas) > self.delta_max * (1 + 1e-12)):
            raise ValueError("final detunings exceed delta_max")

    def to_dict(self) -> dict:
        return {
            "final_deltas": self.final_deltas.tolist(),
            "duration": self.duration,
            "omega_max": self.omega_max,
            "c": self.c,
            "delta_max": self.delta_max,
        }


def map_detunings(gamma, graph: BlockadeGraph, delta_max: float = DELTA_MAX_DEFAULT) -> np.ndarray:
    """Final detunings from the one-body terms.

    Each ``Gamma_i`` is offset by the mean over its blockade neighbours (kept as
    is for isolated nodes), then everything is rescaled so the largest magnitude
    equals ``delta_max``. An all-zero result stays zero.
    """
    if delta_max <= 0:
        raise ValueError("delta_max must be positive")
    gamma = np.asarray(gamma, dtype=float)
    if gamma.size != graph.n_nodes:
        raise ValueError("one Gamma per graph node required")
    shifted = gamma.copy()
    for i in range(gamma.size):
        nb = graph.neighbors(i)
        if nb:
            shifted[i] = gamma[i] - gamma[nb].mean()
    top = np.abs(shifted).max(initial=0.0)
    # treat round-off residue of an exactly cancelling offset as zero
    if top <= 1e-12 * max(np.abs(gamma).max(initial=0.0), 1e-300):
        return np.zeros_like(gamma)
    return shifted * (delta_max / top)


def build_adiabatic_pulse(schedule: AdiabaticSchedule) -> PulseProgram:
    T = schedule.duration
    omega = Waveform(np.array([0.0, T / 2, T]), np.array([0.0, schedule.omega_max, 0.0]))
    deltas = tuple(Waveform.ramp(-schedule.c, float(d), T) for d in schedule.final_deltas)
    return PulseProgram((omega,), deltas, mode="local")


def select_winner(problem: PlacementProblem, hist: SampleHistogram) -> str:
    """Sampled bitstring of minimal cost; ties go to fewer excitations, then lexicographic."""
    keys = list(hist.counts)
    c = problem_costs(problem, keys)
    order = sorted(range(len(keys)), key=lambda k: (c[k], keys[k].count("1"), keys[k]))
    return keys[order[0]]


def problem_costs(problem: PlacementProblem, keys) -> np.ndarray:
    from .ising import costs

    rows = np.array([_bits.as_bits(k, problem.n_sites) for k in keys])
    return costs(problem, rows)


@dataclass
class QAEResult:
    placement: Placement
    histogram: SampleHistogram
    schedule: AdiabaticSchedule
    pulse: PulseProgram

    def summary(self) -> dict:
        return {
            "bitstring": self.placement.bitstring,
            "cost": self.placement.cost,
            "count": self.placement.count,
            "positions": np.asarray(self.placement.positions).tolist(),
            "frequency": self.histogram.frequency(self.placement.bitstring),
            "shots": self.histogram.shots,
        }


def run_qae(
    problem: PlacementProblem,
    register: Register,
    shots: int = 1000,
    noise: NoiseModel | None = None,
    seed: int = 0,
    duration: float = DURATION_DEFAULT,
    omega_max: float = OMEGA_MAX_DEFAULT,
    delta_max: float = DELTA_MAX_DEFAULT,
    c: float | None = None,
    dt: float | None = None,
    trajectories: int | None = None,
    threads: int = 1,
) -> QAEResult:
    """Map Gamma onto local detunings, sweep adiabatically, sample and keep the cheapest string."""
    if len(register) != problem.n_sites:
        raise ValueError("register and problem have different site counts")
    final = map_detunings(problem.gamma, blockade_graph(register), delta_max)
    schedule = AdiabaticSchedule(
        final, duration, omega_max, delta_max if c is None else c, delta_max
    )
    pulse = build_adiabatic_pulse(schedule)
    hist = sample_dynamics(register, pulse, shots, noise, seed, dt, trajectories, threads)
    winner = select_winner(problem, hist)
    hist.winner = winner
    return QAEResult(extract_placement(problem, winner), hist, schedule, pulse)
