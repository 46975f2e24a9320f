"""Variational pulse search: Bayesian optimisation of a global pulse against sampled costs."""
from __future__ import annotations

import json
import logging
import warnings
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy.stats import norm
from sklearn.exceptions import ConvergenceWarning
from sklearn.gaussian_process import GaussianProcessRegressor
from sklearn.gaussian_process.kernels import ConstantKernel, Matern, WhiteKernel

from .constants import DELTA_MAX_DEFAULT, DURATION_DEFAULT, OMEGA_MAX_DEFAULT
from .emulator import (
    NoiseModel,
    SampleHistogram,
    evolve,
    sample,
    sample_dynamics,
)
from .ising import Placement, PlacementProblem, diagonal, extract_placement
from .pulse import PulseProgram, parametrized_pulse
from .qae import problem_costs, select_winner
from .register import Register

log = logging.getLogger(__name__)

MINIMIZERS = ("gp", "dummy")


class OptimizationError(RuntimeError):
    """Objective failure; ``trace`` holds every completed evaluation."""

    def __init__(self, message, trace):
        super().__init__(message)
        self.trace = trace


@dataclass(frozen=True)
class OptimizerConfig:
    m: int = 9
    n_c: int = 50
    n_r: int = 10
    shots_per_cycle: int = 200
    minimizer: str = "gp"
    omega_max: float = OMEGA_MAX_DEFAULT
    delta_max: float = DELTA_MAX_DEFAULT
    duration: float = DURATION_DEFAULT
    seed: int = 0
    n_candidates: int = 1024
    n_local: int = 256
    final_shots: int | None = None

    def __post_init__(self):
        if not 2 <= self.m <= 25:
            raise ValueError("m must lie in [2, 25]")
        if not 1 <= self.n_r < self.n_c:
            raise ValueError("need 1 <= n_r < n_c")
        if self.shots_per_cycle < 0:
            raise ValueError("shots_per_cycle must be >= 0 (0 means exact expectation)")
        if self.minimizer not in MINIMIZERS:
            raise ValueError(f"minimizer must be one of {MINIMIZERS}")
        if self.omega_max <= 0 or self.delta_max <= 0 or self.duration <= 0:
            raise ValueError("bounds and duration must be positive")

    def bounds(self) -> tuple[np.ndarray, np.ndarray]:
        lo = np.concatenate([np.zeros(self.m), np.full(self.m, -self.delta_max)])
        hi = np.concatenate([np.full(self.m, self.omega_max), np.full(self.m, self.delta_max)])
        return lo, hi

    def to_dict(self) -> dict:
        return {k: getattr(self, k) for k in self.__dataclass_fields__}


@dataclass
class CycleRecord:
    index: int
    params: np.ndarray
    cost_estimate: float
    histogram: SampleHistogram | None = None
    phase: str = "random"

    def to_json(self) -> str:
        return json.dumps(
            {
                "index": self.index,
                "phase": self.phase,
                "params": np.asarray(self.params).tolist(),
                "cost_estimate": self.cost_estimate,
                "shots": None if self.histogram is None else self.histogram.shots,
                "counts": None if self.histogram is None else dict(self.histogram.ordered()),
            },
            sort_keys=True,
        )


@dataclass
class BayesResult:
    best_params: np.ndarray
    best_value: float
    trace: list = field(default_factory=list)


def estimate_cost(problem: PlacementProblem, hist: SampleHistogram) -> float:
    """Shot-weighted mean cost of the sampled bitstrings."""
    if hist.shots < 1:
        raise ValueError("histogram holds no shots")
    keys = list(hist.counts)
    w = np.array([hist.counts[k] for k in keys], dtype=float) / hist.shots
    return float(w @ problem_costs(problem, keys))


class Surrogate:
    """Gaussian-process model of the objective on the unit hypercube.

    Isotropic Matern-5/2 kernel times a constant; ``noise > 0`` adds a fitted
    white-noise term starting at that level.
    """

    def __init__(self, noise: float = 1e-3, seed: int = 0, restarts: int = 2):
        kernel = ConstantKernel(1.0, (1e-3, 1e3)) * Matern(0.3, (1e-2, 1e1), nu=2.5)
        if noise > 0:
            kernel = kernel + WhiteKernel(noise, (1e-8, 1.0))
        self.gp = GaussianProcessRegressor(
            kernel,
            alpha=1e-10,
            normalize_y=True,
            n_restarts_optimizer=restarts,
            random_state=seed,
        )

    def fit(self, x, y) -> "Surrogate":
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", ConvergenceWarning)
            self.gp.fit(np.asarray(x), np.asarray(y))
        return self

    def predict(self, x) -> tuple[np.ndarray, np.ndarray]:
        mu, sd = self.gp.predict(np.asarray(x), return_std=True)
        return mu, sd


def expected_improvement(mu, sd, best: float) -> np.ndarray:
    sd = np.maximum(sd, 1e-12)
    z = (best - mu) / sd
    return (best - mu) * norm.cdf(z) + sd * norm.pdf(z)


def bayesian_minimize(
    objective: Callable[[np.ndarray], tuple],
    lower,
    upper,
    n_c: int,
    n_r: int,
    minimizer: str = "gp",
    seed: int = 0,
    n_candidates: int = 1024,
    n_local: int = 256,
) -> BayesResult:
    """Minimise ``objective`` over a box.

    ``objective(x)`` returns the value, or ``(value, payload)``; payloads are
    kept on the matching :class:`CycleRecord`. The first ``n_r`` points are
    uniform random; the rest maximise expected improvement of a GP surrogate
    (``gp``) or stay uniform random (``dummy``).
    """
    lower = np.asarray(lower, dtype=float)
    upper = np.asarray(upper, dtype=float)
    if lower.shape != upper.shape or np.any(upper <= lower):
        raise ValueError("bounds must satisfy lower < upper elementwise")
    if not 1 <= n_r < n_c:
        raise ValueError("need 1 <= n_r < n_c")
    if minimizer not in MINIMIZERS:
        raise ValueError(f"minimizer must be one of {MINIMIZERS}")
    dim = lower.size
    rng = np.random.default_rng(seed)
    xs, ys, trace = [], [], []

    def propose(k):
        if k < n_r or minimizer == "dummy":
            return rng.random(dim), "random"
        model = Surrogate(seed=int(rng.integers(2**31))).fit(xs, ys)
        inc = xs[int(np.argmin(ys))]
        cands = np.vstack(
            [
                rng.random((n_candidates, dim)),
                np.clip(inc + rng.normal(0.0, 0.05, (n_local, dim)), 0.0, 1.0),
            ]
        )
        mu, sd = model.predict(cands)
        return cands[int(np.argmax(expected_improvement(mu, sd, min(ys))))], "model"

    for k in range(n_c):
        u, phase = propose(k)
        x = lower + u * (upper - lower)
        try:
            out = objective(x)
        except Exception as exc:
            raise OptimizationError(f"objective failed at cycle {k}: {exc}", trace) from exc
        value, payload = out if isinstance(out, tuple) else (out, None)
        value = float(value)
        if not np.isfinite(value):
            raise OptimizationError(f"objective returned {value} at cycle {k}", trace)
        xs.append(u)
        ys.append(value)
        trace.append(CycleRecord(k, x, value, payload, phase))
        log.debug("cycle %d (%s): J = %.6g", k, phase, value)

    best = int(np.argmin(ys))
    return BayesResult(trace[best].params, ys[best], trace)


@dataclass
class VQAResult:
    placement: Placement
    modal: str
    histogram: SampleHistogram
    best_params: np.ndarray
    pulse: PulseProgram
    trace: list

    def summary(self) -> dict:
        return {
            "bitstring": self.placement.bitstring,
            "cost": self.placement.cost,
            "count": self.placement.count,
            "positions": np.asarray(self.placement.positions).tolist(),
            "frequency": self.histogram.frequency(self.placement.bitstring),
            "modal_bitstring": self.modal,
            "best_cost_estimate": min(r.cost_estimate for r in self.trace),
            "shots": self.histogram.shots,
        }


def run_vqa(
    problem: PlacementProblem,
    register: Register,
    config: OptimizerConfig,
    noise: NoiseModel | None = None,
    dt: float | None = None,
    threads: int = 1,
) -> VQAResult:
    """Optimise a global pulse, then re-run it and report the cheapest sampled bitstring."""
    if len(register) != problem.n_sites:
        raise ValueError("register and problem have different site counts")
    m = config.m
    energies = diagonal(problem)
    opt_seed, sample_seed, final_seed = np.random.SeedSequence(config.seed).spawn(3)
    cycle_seeds = iter(sample_seed.generate_state(config.n_c))

    def pulse_of(params):
        return parametrized_pulse(
            params[:m], params[m:], config.duration, config.omega_max, config.delta_max
        )

    def measure(pulse, shots, seed):
        if noise is not None and noise.has_dynamics():
            return sample_dynamics(register, pulse, shots, noise, seed, dt, threads=threads)
        return sample(evolve(register, pulse, dt), shots, noise, seed)

    def objective(params):
        pulse = pulse_of(params)
        seed = int(next(cycle_seeds))
        if config.shots_per_cycle == 0:
            probs = evolve(register, pulse, dt).probabilities()
            return float(probs @ energies), None
        hist = measure(pulse, config.shots_per_cycle, seed)
        return estimate_cost(problem, hist), hist

    lo, hi = config.bounds()
    res = bayesian_minimize(
        objective,
        lo,
        hi,
        config.n_c,
        config.n_r,
        config.minimizer,
        int(opt_seed.generate_state(1)[0]),
        config.n_candidates,
        config.n_local,
    )
    final_shots = config.final_shots or config.shots_per_cycle or 1000
    pulse = pulse_of(res.best_params)
    hist = measure(pulse, final_shots, int(final_seed.generate_state(1)[0]))
    winner = select_winner(problem, hist)
    hist.winner = winner
    return VQAResult(
        extract_placement(problem, winner),
        hist.most_common(),
        hist,
        res.best_params,
        pulse,
        res.trace,
    )
