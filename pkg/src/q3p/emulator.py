"""State-vector emulation of driven Rydberg arrays, with readout and decay noise.

The Hamiltonian is taken literally as

    H(t) = sum_i Omega_i(t) X_i - sum_i Delta_i(t) n_i + sum_{i<j} C6 / r_ij^6 n_i n_j

so the coefficient of ``X`` is ``Omega`` itself (many hardware stacks use
``Omega/2``). A lone qubit driven at constant ``Omega`` is fully transferred to
``|1>`` at ``Omega t = pi/2``.

Time stepping is a symmetric (Strang) splitting with controls frozen at each
step midpoint: half a step of the diagonal part, an exact single-qubit X
rotation on every qubit, then the other diagonal half step. Each step is
unitary and carries an O(dt^3) local error.
"""
from __future__ import annotations

import csv
import io
import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass
from typing import Sequence

import numpy as np

from . import bits as _bits
from .constants import MAX_EMULATED_QUBITS, MHZ, TWO_PI
from .pulse import PulseProgram, constant_pulse
from .register import Register

log = logging.getLogger(__name__)

_DENSE_ROTATION_MAX = 8
_CHUNK_ELEMENTS = 1 << 21
STEPS_PER_PERIOD = 50
# default resolution of the drive alone; splitting error grows with (dt * drive)^2
DRIVE_STEPS_PER_PERIOD = 500


class EmulationError(ValueError):
    pass


@dataclass
class QuantumState:
    """State vector; bit ``i`` of the basis index is the occupation of qubit ``i``."""

    amplitudes: np.ndarray

    def __post_init__(self):
        self.amplitudes = np.asarray(self.amplitudes, dtype=complex)
        m = int(round(math.log2(self.amplitudes.size)))
        if 2**m != self.amplitudes.size:
            raise ValueError("state vector length must be a power of two")

    @property
    def n_qubits(self) -> int:
        return int(round(math.log2(self.amplitudes.size)))

    @classmethod
    def ground(cls, n_qubits: int) -> "QuantumState":
        psi = np.zeros(2**n_qubits, dtype=complex)
        psi[0] = 1.0
        return cls(psi)

    @classmethod
    def basis(cls, b) -> "QuantumState":
        n = _bits.as_bits(b)
        psi = np.zeros(2 ** len(n), dtype=complex)
        psi[_bits.to_index(n)] = 1.0
        return cls(psi)

    def probabilities(self) -> np.ndarray:
        p = np.abs(self.amplitudes) ** 2
        return p / p.sum()

    def norm(self) -> float:
        return float(np.vdot(self.amplitudes, self.amplitudes).real)


@dataclass(frozen=True)
class NoiseModel:
    """Readout errors, calibration errors and effective decay.

    ``epsilon`` is the probability of reading ``|0>`` as excited, ``epsilon_prime``
    of reading ``|1>`` as ground. ``omega_inhomogeneity`` draws static per-site Rabi
    factors from ``seed``; the other fluctuations are redrawn for every shot.
    Rates are in rad/s (``delta_shift_sigma``) and 1/s (``gamma_eff``).
    """

    epsilon: float = 0.0
    epsilon_prime: float = 0.0
    omega_rel_sigma: float = 0.0
    omega_inhomogeneity: float = 0.0
    spacing_sigma: float = 0.0
    delta_shift_sigma: float = 0.0
    gamma_eff: float = 0.0
    seed: int = 0

    def __post_init__(self):
        for name in ("epsilon", "epsilon_prime"):
            p = getattr(self, name)
            if not 0.0 <= p <= 1.0:
                raise ValueError(f"{name} must be a probability, got {p}")
        for name in (
            "omega_rel_sigma",
            "omega_inhomogeneity",
            "spacing_sigma",
            "delta_shift_sigma",
            "gamma_eff",
        ):
            if getattr(self, name) < 0:
                raise ValueError(f"{name} must be non-negative")

    @classmethod
    def device(cls, seed: int = 0, epsilon_prime: float = 0.18) -> "NoiseModel":
        """Typical calibrated noise levels of a neutral-atom device."""
        return cls(
            epsilon=0.02,
            epsilon_prime=epsilon_prime,
            omega_rel_sigma=0.05,
            omega_inhomogeneity=0.04,
            spacing_sigma=0.01,
            delta_shift_sigma=0.06 * MHZ,
            gamma_eff=0.05 * MHZ,
            seed=seed,
        )

    def has_dynamics(self) -> bool:
        return any(
            getattr(self, n) > 0
            for n in (
                "omega_rel_sigma",
                "omega_inhomogeneity",
                "spacing_sigma",
                "delta_shift_sigma",
                "gamma_eff",
            )
        )

    def has_readout(self) -> bool:
        return self.epsilon > 0 or self.epsilon_prime > 0

    def site_factors(self, n_qubits: int) -> np.ndarray:
        if self.omega_inhomogeneity == 0:
            return np.ones(n_qubits)
        rng = np.random.default_rng([self.seed, 1])
        return np.maximum(rng.normal(1.0, self.omega_inhomogeneity, n_qubits), 0.0)

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, data: dict) -> "NoiseModel":
        return cls(**data)


@dataclass
class SampleHistogram:
    counts: dict
    shots: int
    noise: NoiseModel | None = None
    winner: str | None = None

    def __post_init__(self):
        if sum(self.counts.values()) != self.shots:
            raise ValueError("histogram counts do not add up to the number of shots")

    @property
    def n_qubits(self) -> int:
        return len(next(iter(self.counts))) if self.counts else 0

    def frequency(self, b: str) -> float:
        return self.counts.get(b, 0) / self.shots

    def ordered(self) -> list[tuple[str, int]]:
        """Entries sorted by count (descending), then bitstring."""
        return sorted(self.counts.items(), key=lambda kv: (-kv[1], kv[0]))

    def most_common(self) -> str:
        return self.ordered()[0][0]

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["bitstring", "count"])
        w.writerows(self.ordered())
        return buf.getvalue()

    @classmethod
    def from_csv(cls, text: str) -> "SampleHistogram":
        rows = list(csv.reader(io.StringIO(text)))
        if not rows or rows[0] != ["bitstring", "count"]:
            raise ValueError("histogram CSV must start with a 'bitstring,count' header")
        counts = {b: int(c) for b, c in rows[1:] if b}
        return cls(counts, sum(counts.values()))

    def to_dict(self) -> dict:
        return {
            "shots": self.shots,
            "counts": dict(self.ordered()),
            "winner": self.winner,
            "noise": None if self.noise is None else self.noise.to_dict(),
        }


# -- propagation ------------------------------------------------------------


def _hadamard(m: int) -> np.ndarray:
    h = np.array([[1.0]])
    h1 = np.array([[1.0, 1.0], [1.0, -1.0]]) / math.sqrt(2.0)
    for _ in range(m):
        h = np.kron(h1, h)
    return h


def _apply_dense(w: np.ndarray, psi: np.ndarray) -> np.ndarray:
    # real matrix times complex vector without upcasting the matrix
    out = w @ psi.view(np.float64).reshape(-1, 2)
    return out.reshape(-1).view(np.complex128)


def _rotate_qubits(psi: np.ndarray, m: int, cos: np.ndarray, isin: np.ndarray) -> None:
    """In place ``exp(-i theta_q X_q)`` on every qubit ``q``; ``isin = -1j*sin(theta)``."""
    for q in range(m):
        v = psi.reshape(1 << (m - 1 - q), 2, 1 << q)
        a0 = v[:, 0, :].copy()
        a1 = v[:, 1, :]
        v[:, 0, :] = cos[q] * a0 + isin[q] * a1
        v[:, 1, :] = isin[q] * a0 + cos[q] * a1


def max_time_step(register: Register, pulse: PulseProgram) -> float:
    """Largest step resolving every frequency scale with ``STEPS_PER_PERIOD`` steps."""
    u = register.interactions()
    scale = max(pulse.max_omega(), pulse.max_delta(), float(u.max(initial=0.0)))
    return math.inf if scale == 0 else TWO_PI / (STEPS_PER_PERIOD * scale)


def _step_count(register: Register, pulse: PulseProgram, dt: float | None) -> int:
    limit = max_time_step(register, pulse)
    if dt is None:
        drive = max(pulse.max_omega(), pulse.max_delta())
        dt = limit if drive == 0 else min(limit, TWO_PI / (DRIVE_STEPS_PER_PERIOD * drive))
    elif dt <= 0:
        raise EmulationError("time step must be positive")
    elif dt > limit * (1 + 1e-9):
        raise EmulationError(
            f"time step {dt:.3e} s too coarse; at most {limit:.3e} s resolves this pulse"
        )
    if math.isinf(dt):
        return 1
    return max(1, math.ceil(pulse.duration / dt - 1e-9))


def _check_size(register: Register, pulse: PulseProgram) -> int:
    m = len(register)
    if m > MAX_EMULATED_QUBITS:
        raise EmulationError(f"{m} qubits exceed the emulation ceiling of {MAX_EMULATED_QUBITS}")
    pulse.check_qubits(m)
    return m


def _integrate(
    sites: np.ndarray,
    c6: float,
    pulse: PulseProgram,
    n_steps: int,
    omega_factors: np.ndarray | None = None,
    delta_offset: float = 0.0,
    gamma_eff: float = 0.0,
    rng: np.random.Generator | None = None,
    initial: np.ndarray | None = None,
) -> np.ndarray:
    m = len(sites)
    dim = 1 << m
    occ = _bits.occupation_table(m).astype(float)
    popcount = occ.sum(axis=1)
    if m > 1:
        diff = sites[:, None, :] - sites[None, :, :]
        r6 = (diff**2).sum(axis=2) ** 3
        np.fill_diagonal(r6, 1.0)
        u = c6 / r6
        np.fill_diagonal(u, 0.0)
        u_diag = 0.5 * np.einsum("ki,ij,kj->k", occ, u, occ)
    else:
        u_diag = np.zeros(dim)

    T = pulse.duration
    h = T / n_steps
    mids = (np.arange(n_steps) + 0.5) * h
    omega = np.stack([np.interp(mids, w.times, w.values) for w in pulse.omega], axis=1)
    delta = np.stack([np.interp(mids, w.times, w.values) for w in pulse.delta], axis=1)
    uniform = omega.shape[1] == 1 and omega_factors is None
    if omega_factors is not None:
        omega = np.broadcast_to(omega, (n_steps, m)) * omega_factors
    if delta_offset:
        delta = delta + delta_offset
    global_delta = delta.shape[1] == 1

    # in the Hadamard basis every X_q is diagonal with eigenvalue 1 - 2 n_q
    dense = _hadamard(m) if m <= _DENSE_ROTATION_MAX else None
    # amplitude damping of the no-jump evolution over half a step
    decay_half = -0.25 * gamma_eff * h * popcount if gamma_eff > 0 else 0.0

    psi = QuantumState.ground(m).amplitudes if initial is None else np.array(initial, complex)
    threshold = rng.random() if gamma_eff > 0 else None

    def half_exponent(rows):
        if global_delta:
            e = u_diag[None, :] - delta[rows, :1] * popcount[None, :]
        else:
            e = u_diag[None, :] - delta[rows] @ occ.T
        return -0.5j * h * e + decay_half

    chunk = max(1, _CHUNK_ELEMENTS // dim)
    a_prev = None
    for start in range(0, n_steps, chunk):
        rows = np.arange(start, min(start + chunk, n_steps))
        a = half_exponent(rows)
        # the closing half step of step k-1 merges with the opening one of step k
        lead = np.empty_like(a)
        lead[0] = a[0] if a_prev is None else a_prev + a[0]
        lead[1:] = a[:-1] + a[1:]
        phase = np.exp(lead)
        theta = omega[rows] * h
        if dense is not None and uniform:
            rot = np.exp(-1j * theta[:, :1] * (m - 2.0 * popcount)[None, :])
        elif dense is not None:
            th = np.broadcast_to(theta, (len(rows), m))
            rot = np.exp(-1j * (th.sum(axis=1)[:, None] - 2.0 * th @ occ.T))
        else:
            th = np.broadcast_to(theta, (len(rows), m))
            cos, isin = np.cos(th), -1j * np.sin(th)
        for k in range(len(rows)):
            psi *= phase[k]
            if threshold is not None:
                psi, threshold = _maybe_jump(psi, m, threshold, rng)
            if dense is not None:
                psi = _apply_dense(dense, rot[k] * _apply_dense(dense, psi))
            else:
                _rotate_qubits(psi, m, cos[k], isin[k])
        a_prev = a[-1]
    psi *= np.exp(a_prev)
    if threshold is not None:
        psi, threshold = _maybe_jump(psi, m, threshold, rng)
        psi /= math.sqrt(np.vdot(psi, psi).real)
    return psi


def _maybe_jump(psi, m, threshold, rng):
    norm2 = np.vdot(psi, psi).real
    if norm2 >= threshold:
        return psi, threshold
    psi = psi / math.sqrt(norm2)
    p = np.abs(psi) ** 2
    weights = np.array([p[(np.arange(p.size) >> q) & 1 == 1].sum() for q in range(m)])
    total = weights.sum()
    if total <= 0:
        return psi, rng.random()
    q = int(rng.choice(m, p=weights / total))
    v = psi.reshape(1 << (m - 1 - q), 2, 1 << q)
    out = np.zeros_like(v)
    out[:, 0, :] = v[:, 1, :]
    out = out.reshape(-1)
    out /= math.sqrt(np.vdot(out, out).real)
    return out, rng.random()


def evolve(
    register: Register,
    pulse: PulseProgram,
    dt: float | None = None,
    initial: QuantumState | None = None,
) -> QuantumState:
    """Noiseless propagation from ``|0...0>`` (or ``initial``) over the whole pulse."""
    m = _check_size(register, pulse)
    n_steps = _step_count(register, pulse, dt)
    psi = _integrate(
        register.sites,
        register.c6,
        pulse,
        n_steps,
        initial=None if initial is None else initial.amplitudes,
    )
    assert psi.size == 1 << m
    return QuantumState(psi)


def evolve_trajectory(
    register: Register,
    pulse: PulseProgram,
    noise: NoiseModel,
    rng: np.random.Generator,
    dt: float | None = None,
    initial: QuantumState | None = None,
) -> QuantumState:
    """One stochastic realisation of the noisy dynamics.

    Draws a shot-wide Rabi scale, detuning offset and array-spacing scale, applies
    the static per-site Rabi factors, then unravels decay ``|1> -> |0>`` at rate
    ``gamma_eff`` into quantum jumps. With every noise term zero this reproduces
    :func:`evolve` exactly.
    """
    m = _check_size(register, pulse)
    n_steps = _step_count(register, pulse, dt)
    omega_scale = rng.normal(1.0, noise.omega_rel_sigma) if noise.omega_rel_sigma > 0 else 1.0
    delta_offset = rng.normal(0.0, noise.delta_shift_sigma) if noise.delta_shift_sigma > 0 else 0.0
    spacing = rng.normal(1.0, noise.spacing_sigma) if noise.spacing_sigma > 0 else 1.0
    factors = None
    if noise.omega_rel_sigma > 0 or noise.omega_inhomogeneity > 0:
        factors = max(omega_scale, 0.0) * noise.site_factors(m)
    sites = register.sites * spacing if noise.spacing_sigma > 0 else register.sites
    psi = _integrate(
        sites,
        register.c6,
        pulse,
        n_steps,
        omega_factors=factors,
        delta_offset=delta_offset,
        gamma_eff=noise.gamma_eff,
        rng=rng,
        initial=None if initial is None else initial.amplitudes,
    )
    return QuantumState(psi)


# -- measurement ------------------------------------------------------------


def _readout_flips(rows: np.ndarray, noise: NoiseModel | None, rng) -> np.ndarray:
    if noise is None or not noise.has_readout():
        return rows
    u = rng.random(rows.shape)
    flip = np.where(rows == 1, u < noise.epsilon_prime, u < noise.epsilon)
    return rows ^ flip.astype(rows.dtype)


def _draw(probs: np.ndarray, shots: int, m: int, noise, rng) -> np.ndarray:
    idx = rng.choice(probs.size, size=shots, p=probs)
    rows = ((idx[:, None] >> np.arange(m)) & 1).astype(np.int8)
    return _readout_flips(rows, noise, rng)


def _histogram(rows: np.ndarray, shots: int, noise) -> SampleHistogram:
    uniq, counts = np.unique(rows, axis=0, return_counts=True)
    keys = _bits.rows_to_str(uniq)
    return SampleHistogram(dict(zip(keys, (int(c) for c in counts))), shots, noise)


def sample(
    state: QuantumState, shots: int, noise: NoiseModel | None = None, seed: int = 0
) -> SampleHistogram:
    """Projective measurements of ``state`` followed by independent readout flips."""
    if shots < 1:
        raise ValueError("shots must be >= 1")
    rng = np.random.default_rng(seed)
    rows = _draw(state.probabilities(), shots, state.n_qubits, noise, rng)
    return _histogram(rows, shots, noise)


def run_trajectories(
    register: Register,
    pulse: PulseProgram,
    noise: NoiseModel,
    count: int,
    seed: int = 0,
    dt: float | None = None,
    threads: int = 1,
    initial: QuantumState | None = None,
) -> list[QuantumState]:
    """``count`` independent trajectories; stream ``k`` is derived from ``(seed, k)``."""
    streams = np.random.SeedSequence(seed).spawn(count)

    def one(ss):
        return evolve_trajectory(register, pulse, noise, np.random.default_rng(ss), dt, initial)

    if threads > 1 and count > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            return list(pool.map(one, streams))
    return [one(ss) for ss in streams]


def sample_dynamics(
    register: Register,
    pulse: PulseProgram,
    shots: int,
    noise: NoiseModel | None = None,
    seed: int = 0,
    dt: float | None = None,
    trajectories: int | None = None,
    threads: int = 1,
) -> SampleHistogram:
    """Evolve and measure, running noisy trajectories when the noise model needs them.

    Without dynamical noise the state is evolved once and sampled ``shots``
    times. Otherwise ``trajectories`` (default: one per shot) realisations are
    run and the shots are spread evenly over them.
    """
    if shots < 1:
        raise ValueError("shots must be >= 1")
    if noise is None or not noise.has_dynamics():
        return sample(evolve(register, pulse, dt), shots, noise, seed)
    n_traj = shots if trajectories is None else max(1, min(trajectories, shots))
    root = np.random.SeedSequence(seed)
    traj_seed, meas_seed = root.spawn(2)
    states = run_trajectories(
        register, pulse, noise, n_traj, int(traj_seed.generate_state(1)[0]), dt, threads
    )
    rng = np.random.default_rng(meas_seed)
    per = [shots // n_traj + (1 if k < shots % n_traj else 0) for k in range(n_traj)]
    m = len(register)
    rows = np.concatenate(
        [_draw(s.probabilities(), n, m, noise, rng) for s, n in zip(states, per) if n > 0]
    )
    return _histogram(rows, shots, noise)


# -- observables ------------------------------------------------------------


def occupation(state: QuantumState, i: int) -> float:
    m = state.n_qubits
    if not 0 <= i < m:
        raise IndexError(f"qubit {i} out of range for {m} qubits")
    p = state.probabilities()
    mask = (np.arange(p.size) >> i) & 1 == 1
    return float(p[mask].sum())


def occupations(state: QuantumState) -> np.ndarray:
    return state.probabilities() @ _bits.occupation_table(state.n_qubits)


def occupation_error(mean: float, shots: int) -> float:
    """Binomial standard error ``sqrt(<n>(1 - <n>)/shots)``."""
    if shots < 1:
        raise ValueError("shots must be >= 1")
    return math.sqrt(max(mean * (1.0 - mean), 0.0) / shots)


def projector_expectation(state: QuantumState, b) -> float:
    n = _bits.as_bits(b, state.n_qubits)
    return float(abs(state.amplitudes[_bits.to_index(n)]) ** 2 / state.norm())


def readout_probability(state: QuantumState, b, noise: NoiseModel | None) -> float:
    """Probability of *reading* ``b`` once detection errors are applied."""
    if noise is None or not noise.has_readout():
        return projector_expectation(state, b)
    n = _bits.as_bits(b, state.n_qubits)
    occ = _bits.occupation_table(state.n_qubits)
    # P(read 1 | 0) = eps, P(read 0 | 1) = eps'
    p_read = np.where(
        occ == 1,
        np.where(n == 1, 1 - noise.epsilon_prime, noise.epsilon_prime),
        np.where(n == 1, noise.epsilon, 1 - noise.epsilon),
    ).prod(axis=1)
    return float(state.probabilities() @ p_read)


def landscape_scan(
    register: Register,
    b,
    omega: float,
    deltas: Sequence[float],
    durations: Sequence[float],
    shots: int = 0,
    noise: NoiseModel | None = None,
    seed: int = 0,
    dt: float | None = None,
    threads: int = 1,
) -> np.ndarray:
    """Probability of observing ``b`` after a square global pulse, per (detuning, duration).

    ``shots = 0`` returns exact probabilities (with readout errors folded in
    analytically); otherwise each cell is estimated from ``shots`` samples.
    """
    deltas = np.asarray(deltas, dtype=float)
    durations = np.asarray(durations, dtype=float)
    if deltas.size < 2 or durations.size < 2:
        raise ValueError("landscape grid must be at least 2 x 2")
    if np.any(durations < 0):
        raise ValueError("durations must be non-negative")
    m = len(register)
    n = _bits.as_bits(b, m)
    key = _bits.to_str(n)
    cells = [(i, j) for i in range(deltas.size) for j in range(durations.size)]
    seeds = np.random.SeedSequence(seed).spawn(len(cells))
    dynamic = shots > 0 and noise is not None and noise.has_dynamics()

    def cell(k):
        i, j = cells[k]
        T = durations[j]
        cell_seed = int(seeds[k].generate_state(1)[0])
        if T == 0:
            state = QuantumState.ground(m)
        elif dynamic:
            pulse = constant_pulse(omega, deltas[i], T)
            return sample_dynamics(register, pulse, shots, noise, cell_seed, dt).frequency(key)
        else:
            state = evolve(register, constant_pulse(omega, deltas[i], T), dt)
        if shots == 0:
            return readout_probability(state, n, noise)
        return sample(state, shots, noise, cell_seed).frequency(key)

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            vals = list(pool.map(cell, range(len(cells))))
    else:
        vals = [cell(k) for k in range(len(cells))]
    return np.array(vals).reshape(deltas.size, durations.size)
