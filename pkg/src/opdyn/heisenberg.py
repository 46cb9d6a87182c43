"""Closed-form mode-operator dynamics and mean-value trajectories.

Because the Hamiltonian is quadratic, the 2N mode operators close under the
Heisenberg equations and evolve by the unitary ``exp(iVt)``.  For product
number initial states the occupation means then follow from the squared
moduli of that propagator applied to the initial means; the same formula is
applied verbatim to fractional initial means.
"""

from dataclasses import dataclass

import numpy as np

from .errors import DimensionError, ParameterError, ValidationError
from .model import NetworkSpec, build_v_matrix

MEAN_TOL = 1e-9        # admissible excursion of occupation means outside [0, 1]
UNITARITY_TOL = 1e-10


@dataclass(frozen=True, eq=False)
class MeanState:
    """Per-agent mean occupation numbers of the fake (F) and good (G) modes."""

    F: np.ndarray
    G: np.ndarray

    def __post_init__(self):
        f = np.asarray(self.F, dtype=float)
        g = np.asarray(self.G, dtype=float)
        if f.ndim != 1 or f.shape != g.shape:
            raise DimensionError("F and G must be equal-length 1-d vectors")
        for name, v in (("F", f), ("G", g)):
            if (v < -MEAN_TOL).any() or (v > 1.0 + MEAN_TOL).any():
                raise ValidationError("mean_out_of_bounds",
                                      f"{name} entries must lie in [0, 1]")
        f.flags.writeable = False
        g.flags.writeable = False
        object.__setattr__(self, "F", f)
        object.__setattr__(self, "G", g)

    @property
    def n(self) -> int:
        return self.F.size

    def vector(self) -> np.ndarray:
        """Length-2N concatenation (F then G), matching the mode order."""
        return np.concatenate([self.F, self.G])

    @classmethod
    def from_vector(cls, v) -> "MeanState":
        v = np.asarray(v, dtype=float)
        n = v.size // 2
        return cls(F=v[:n], G=v[n:])


@dataclass(frozen=True, eq=False)
class Propagator:
    """The matrix ``exp(iVt)`` for one Hermitian V and one time."""

    matrix: np.ndarray
    t: float

    def moduli_squared(self) -> np.ndarray:
        return np.abs(self.matrix) ** 2


class Eigenbasis:
    """Eigendecomposition of a Hermitian V, reused to evaluate ``exp(iVt)``
    for many times.  Guarantees unitarity up to rounding."""

    def __init__(self, v: np.ndarray):
        v = np.asarray(v)
        if v.ndim != 2 or v.shape[0] != v.shape[1]:
            raise DimensionError("V must be square")
        if np.abs(v - v.conj().T).max() > UNITARITY_TOL:
            raise ParameterError("V must be Hermitian")
        self.energies, self.vectors = np.linalg.eigh(v)

    def unitary(self, t: float) -> np.ndarray:
        w = self.vectors
        return (w * np.exp(1j * self.energies * t)) @ w.conj().T


def propagator(v: np.ndarray, t: float) -> Propagator:
    """``exp(iVt)`` by Hermitian eigendecomposition."""
    u = Eigenbasis(v).unitary(t)
    dev = np.abs(u @ u.conj().T - np.eye(u.shape[0])).max()
    if dev > UNITARITY_TOL:
        raise ParameterError(f"propagator unitarity deviation {dev:.2e} exceeds {UNITARITY_TOL}")
    return Propagator(matrix=u, t=float(t))


def evolve_means(prop: Propagator, init: MeanState) -> MeanState:
    """Propagate occupation means: row moduli squared of the propagator act
    on the initial mean vector.  The map is doubly stochastic, so outputs are
    convex combinations of the inputs and the total mean is conserved."""
    m0 = init.vector()
    if prop.matrix.shape[0] != m0.size:
        raise DimensionError(
            f"propagator dimension {prop.matrix.shape[0]} does not match state {m0.size}")
    return MeanState.from_vector(prop.moduli_squared() @ m0)


def global_means(state: MeanState) -> tuple:
    """Arithmetic means of the fake and good occupations across agents."""
    return float(state.F.mean()), float(state.G.mean())


@dataclass(frozen=True, eq=False)
class Trajectory:
    """Time-sampled mean values: per-agent F/G plus their global means."""

    times: np.ndarray
    F: np.ndarray       # (n_times, N)
    G: np.ndarray       # (n_times, N)
    f_mean: np.ndarray
    g_mean: np.ndarray

    def __post_init__(self):
        if (np.diff(self.times) <= 0).any():
            raise ValidationError("times_not_increasing", "time grid must be strictly increasing")
        for name in ("F", "G"):
            v = getattr(self, name)
            if (v < -MEAN_TOL).any() or (v > 1.0 + MEAN_TOL).any():
                raise ValidationError("mean_out_of_bounds",
                                      f"trajectory {name} leaves [0, 1] beyond tolerance")

    @property
    def n_agents(self) -> int:
        return self.F.shape[1]

    def state_at(self, i: int) -> MeanState:
        return MeanState(F=self.F[i], G=self.G[i])


def output_grid(t_max: float, dt_out: float) -> np.ndarray:
    """Grid {0, dt_out, ..., t_max}; t_max must be a multiple of dt_out."""
    if t_max <= 0 or dt_out <= 0:
        raise ParameterError("t_max and dt_out must be positive")
    n = int(round(t_max / dt_out))
    if n < 1 or abs(n * dt_out - t_max) > 1e-9 * max(1.0, abs(t_max)):
        raise ParameterError(f"t_max {t_max} is not a multiple of dt_out {dt_out}")
    return np.arange(n + 1) * dt_out


def trajectory_from_means(times: np.ndarray, means: np.ndarray) -> Trajectory:
    n = means.shape[1] // 2
    f, g = means[:, :n], means[:, n:]
    return Trajectory(times=times, F=f, G=g,
                      f_mean=f.mean(axis=1), g_mean=g.mean(axis=1))


def run_heisenberg(spec: NetworkSpec, init: MeanState,
                   t_max: float, dt_out: float) -> Trajectory:
    """Sample the closed-form evolution on {0, dt_out, ..., t_max}."""
    if init.n != spec.n:
        raise DimensionError(f"initial state has {init.n} agents, spec has {spec.n}")
    times = output_grid(t_max, dt_out)
    basis = Eigenbasis(build_v_matrix(spec))
    m0 = init.vector()
    means = np.empty((times.size, m0.size))
    means[0] = m0
    for i, t in enumerate(times[1:], start=1):
        means[i] = np.abs(basis.unitary(t)) ** 2 @ m0
    return trajectory_from_means(times, means)
