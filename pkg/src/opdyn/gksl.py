"""Dissipative network dynamics through the quantum master equation.

Channels are number-basis monomials (directed transfers ``a_dst^dag a_src``,
on-site switches ``g^dag f`` / ``f^dag g``, and pumps ``a^dag``), and the
Hamiltonian entering the commutator is the diagonal free part only.  Under
these two facts a diagonal density operator stays diagonal, so the engine
carries, per configuration of the Fock basis, just its population; the
populations obey a classical master equation whose rates are the squared
channel prefactors, with moves blocked whenever the target mode is occupied.

The integrator is classic fixed-step fourth-order Runge-Kutta.  For the
linear population equation one RK4 step is multiplication by the degree-4
Taylor polynomial of ``exp(dt*Q)``; that step matrix is formed once and
applied repeatedly, restricted to the set of configurations reachable from
the initial support.  A dense density-matrix path (small systems, used by the
oracle comparisons) integrates the full generator with the same stepper.
"""

import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from enum import Enum

import numpy as np
from scipy import sparse

from . import fock
from .errors import DimensionError, ParameterError, ValidationError
from .heisenberg import MeanState, Trajectory, output_grid, trajectory_from_means
from .model import NetworkSpec, free_hamiltonian_diagonal, validate_spec

log = logging.getLogger(__name__)

TRACE_TOL = 1e-10         # renormalize (and log) only beyond this drift
DENSE_MAX_MODES = 8       # dense-matrix integration cap
SUBSPACE_DENSE_MAX = 1024 # larger reachable sets fall back to sparse stepping
RK4_RATE_STEP = 0.05      # auto step: max total exit rate times dt


class ChannelKind(Enum):
    TRANSFER_GOOD = "transfer_good"
    TRANSFER_FAKE = "transfer_fake"
    SWITCH_FAKE_TO_GOOD = "switch_fake_to_good"
    SWITCH_GOOD_TO_FAKE = "switch_good_to_fake"
    PUMP_GOOD = "pump_good"
    PUMP_FAKE = "pump_fake"


TRANSFER_KINDS = {ChannelKind.TRANSFER_GOOD, ChannelKind.TRANSFER_FAKE}
PUMP_KINDS = {ChannelKind.PUMP_GOOD, ChannelKind.PUMP_FAKE}


@dataclass(frozen=True)
class ChannelSpec:
    """One Lindblad operator: ``strength`` is the prefactor multiplying the
    monomial, so the effective jump rate is ``strength**2``."""

    kind: ChannelKind
    strength: float
    agent: int = None
    src: int = None
    dst: int = None

    def __post_init__(self):
        if self.strength < 0:
            raise ValidationError("strength_negative", "channel strength must be nonnegative")
        if self.kind in TRANSFER_KINDS:
            if self.agent is not None or self.src is None or self.dst is None:
                raise ValidationError("bad_channel", f"{self.kind.value} needs src and dst")
            if self.src == self.dst:
                raise ValidationError("transfer_loop", "transfer src and dst must differ")
        else:
            if self.src is not None or self.dst is not None or self.agent is None:
                raise ValidationError("bad_channel", f"{self.kind.value} needs a single agent")

    def mode_action(self, n_agents: int):
        """(created_mode, annihilated_mode_or_None) as 0-based flat bits."""
        def f(a):
            return a - 1

        def g(a):
            return n_agents + a - 1

        k = self.kind
        if k is ChannelKind.TRANSFER_GOOD:
            return g(self.dst), g(self.src)
        if k is ChannelKind.TRANSFER_FAKE:
            return f(self.dst), f(self.src)
        if k is ChannelKind.SWITCH_FAKE_TO_GOOD:
            return g(self.agent), f(self.agent)
        if k is ChannelKind.SWITCH_GOOD_TO_FAKE:
            return f(self.agent), g(self.agent)
        if k is ChannelKind.PUMP_GOOD:
            return g(self.agent), None
        return f(self.agent), None


@dataclass(frozen=True)
class LindbladSet:
    """Ordered channel list; the order never affects observables."""

    channels: tuple
    n_agents: int

    @property
    def count(self) -> int:
        return len(self.channels)

    @property
    def has_pumps(self) -> bool:
        return any(c.kind in PUMP_KINDS for c in self.channels)


def build_lindblads(channels, n_agents: int) -> LindbladSet:
    channels = tuple(channels)
    for c in channels:
        for name, a in (("agent", c.agent), ("src", c.src), ("dst", c.dst)):
            if a is not None and not 1 <= a <= n_agents:
                raise ValidationError("agent_out_of_range",
                                      f"channel {name}={a} outside 1..{n_agents}")
    return LindbladSet(channels=channels, n_agents=n_agents)


def channel_matrix(channel: ChannelSpec, n_agents: int) -> sparse.csr_matrix:
    """Sparse Fock-space matrix of the channel operator."""
    m = 2 * n_agents
    create, annihilate = channel.mode_action(n_agents)
    op = fock.creation(create + 1, m)
    if annihilate is not None:
        op = op @ fock.annihilator(annihilate + 1, m)
    return (channel.strength * op).tocsr()


@dataclass(frozen=True, eq=False)
class DensityState:
    """Either a dense Hermitian matrix or, for diagonal states, the
    populations over the 2^(2N) Fock configurations."""

    n_agents: int
    populations: np.ndarray = None
    dense: np.ndarray = None

    def __post_init__(self):
        if (self.populations is None) == (self.dense is None):
            raise ParameterError("exactly one of populations/dense must be given")
        dim = 1 << (2 * self.n_agents)
        if self.populations is not None:
            p = np.asarray(self.populations, dtype=float)
            if p.shape != (dim,):
                raise DimensionError(f"populations must have length {dim}")
            if (p < -1e-10).any():
                raise ValidationError("population_negative", "populations must be nonnegative")
            if abs(p.sum() - 1.0) > 1e-8:
                raise ValidationError("trace_not_one", f"populations sum {p.sum()!r} != 1")
            object.__setattr__(self, "populations", p)
        else:
            rho = np.asarray(self.dense, dtype=complex)
            if rho.shape != (dim, dim):
                raise DimensionError(f"dense state must be {dim}x{dim}")
            if np.abs(rho - rho.conj().T).max() > 1e-8:
                raise ValidationError("not_hermitian", "dense state must be Hermitian")
            if abs(np.trace(rho).real - 1.0) > 1e-8:
                raise ValidationError("trace_not_one", "dense state must have unit trace")
            object.__setattr__(self, "dense", rho)

    @property
    def is_diagonal(self) -> bool:
        return self.populations is not None

    def trace(self) -> float:
        if self.is_diagonal:
            return float(self.populations.sum())
        return float(np.trace(self.dense).real)

    def diagonal(self) -> np.ndarray:
        if self.is_diagonal:
            return self.populations
        return np.real(np.diag(self.dense))

    def to_dense(self) -> "DensityState":
        if not self.is_diagonal:
            return self
        return DensityState(n_agents=self.n_agents, dense=np.diag(self.populations.astype(complex)))


def build_initial_density(init: MeanState) -> DensityState:
    """Product of single-mode diagonal states diag(1-x, x) with the requested
    means; modes are statistically independent."""
    x = init.vector()
    if (x < 0).any() or (x > 1).any():
        raise ValidationError("mean_out_of_bounds", "initial means must lie in [0, 1]")
    p = np.ones(1)
    for b in range(x.size):
        p = np.kron(np.array([1.0 - x[b], x[b]]), p)  # mode b lands on bit b
    return DensityState(n_agents=init.n, populations=p)


def build_single_excitation_density(init: MeanState) -> DensityState:
    """Diagonal state carrying exactly one excitation, distributed over the
    modes with the requested means (which must sum to 1).  This realizes a
    single packet of information whose nature/location is uncertain, and is
    the initial state the network experiments use."""
    x = init.vector()
    if (x < 0).any():
        raise ValidationError("mean_out_of_bounds", "initial means must be nonnegative")
    if abs(x.sum() - 1.0) > 1e-9:
        raise ValidationError("single_excitation_total",
                              f"single-excitation means must sum to 1, got {x.sum()!r}")
    p = np.zeros(1 << x.size)
    for b in range(x.size):
        p[1 << b] = x[b]
    return DensityState(n_agents=init.n, populations=p)


# ---------------------------------------------------------------------------
# population master equation machinery

def _channel_moves(lindblads: LindbladSet):
    """[(rate, created_bit, annihilated_bit_or_None)] with zero rates dropped."""
    out = []
    for c in lindblads.channels:
        if c.strength > 0:
            create, annihilate = c.mode_action(lindblads.n_agents)
            out.append((c.strength ** 2, create, annihilate))
    return out


def reachable_states(support, lindblads: LindbladSet) -> np.ndarray:
    """Closure of the initial support under all channel moves."""
    moves = _channel_moves(lindblads)
    seen = set(int(s) for s in support)
    frontier = list(seen)
    while frontier:
        s = frontier.pop()
        for rate, create, annihilate in moves:
            if annihilate is not None and not (s >> annihilate) & 1:
                continue
            if (s >> create) & 1:
                continue
            d = s | (1 << create)
            if annihilate is not None:
                d &= ~(1 << annihilate)
            if d not in seen:
                seen.add(d)
                frontier.append(d)
    return np.array(sorted(seen), dtype=np.int64)


def population_generator(states: np.ndarray, lindblads: LindbladSet) -> sparse.csr_matrix:
    """Rate matrix Q on the given configurations: dp/dt = Q p.  Columns sum
    to zero, so the stepper conserves total probability exactly."""
    pos = {int(s): i for i, s in enumerate(states)}
    n = states.size
    rows, cols, vals = [], [], []
    for rate, create, annihilate in _channel_moves(lindblads):
        active = (states >> create) & 1 == 0
        if annihilate is not None:
            active &= (states >> annihilate) & 1 == 1
        for s in states[active]:
            d = int(s) | (1 << create)
            if annihilate is not None:
                d &= ~(1 << annihilate)
            j = pos[int(s)]
            rows.append(pos[d]); cols.append(j); vals.append(rate)
            rows.append(j); cols.append(j); vals.append(-rate)
    return sparse.csr_matrix((vals, (rows, cols)), shape=(n, n))


def rk4_step_matrix(q: np.ndarray, dt: float) -> np.ndarray:
    """One classic RK4 step for the linear system dp/dt = Q p, i.e. the
    degree-4 Taylor polynomial of exp(dt*Q)."""
    a = dt * np.asarray(q)
    r = np.eye(a.shape[0]) + a
    term = a
    for k in (2, 3, 4):
        term = a @ term / k
        r = r + term
    return r


def _occupation_table(states: np.ndarray, n_modes: int) -> np.ndarray:
    return np.stack([((states >> b) & 1).astype(float) for b in range(n_modes)])


def max_exit_rate(states: np.ndarray, lindblads: LindbladSet) -> float:
    """Largest total outflow rate over the given configurations; bounds the
    stiffness of the population equation."""
    total = np.zeros(states.size)
    for rate, create, annihilate in _channel_moves(lindblads):
        active = (states >> create) & 1 == 0
        if annihilate is not None:
            active &= (states >> annihilate) & 1 == 1
        total += rate * active
    return float(total.max()) if states.size else 0.0


def _dense_ops(lindblads: LindbladSet):
    ops = []
    for c in lindblads.channels:
        if c.strength == 0:
            continue
        l_op = channel_matrix(c, lindblads.n_agents).toarray()
        ops.append((l_op, l_op.conj().T @ l_op))
    return ops


def _dense_rhs(rho, h_diag, ops):
    out = -1j * (h_diag[:, None] * rho - rho * h_diag[None, :])
    for l_op, ldl in ops:
        out += l_op @ rho @ l_op.conj().T - 0.5 * (ldl @ rho + rho @ ldl)
    return out


def liouvillian_apply(rho: DensityState, spec: NetworkSpec, lindblads: LindbladSet):
    """Generator applied once: returns a populations-derivative vector or a
    dense-matrix derivative, matching the representation of ``rho``."""
    validate_spec(spec)
    if rho.n_agents != spec.n or lindblads.n_agents != spec.n:
        raise DimensionError("state, spec and channels must agree on the agent count")
    if rho.is_diagonal:
        p = rho.populations
        dim = p.size
        out = np.zeros(dim)
        idx = np.arange(dim, dtype=np.int64)
        for rate, create, annihilate in _channel_moves(lindblads):
            active = (idx >> create) & 1 == 0
            if annihilate is not None:
                active &= (idx >> annihilate) & 1 == 1
            src = idx[active]
            dst = src | (1 << create)
            if annihilate is not None:
                dst &= ~(1 << annihilate)
            out[dst] += rate * p[src]
            out[src] -= rate * p[src]
        return out
    h_diag = free_hamiltonian_diagonal(spec)
    return _dense_rhs(rho.dense, h_diag, _dense_ops(lindblads))


def mean_values(rho: DensityState, spec: NetworkSpec) -> MeanState:
    """Occupation means per agent from the state's diagonal."""
    if rho.n_agents != spec.n:
        raise DimensionError("state and spec must agree on the agent count")
    diag = rho.diagonal()
    idx = np.arange(diag.size, dtype=np.int64)
    m = 2 * spec.n
    means = np.array([diag[(idx >> b) & 1 == 1].sum() for b in range(m)])
    return MeanState.from_vector(means)


class _PopulationStepper:
    """Stepping machinery on the reachable subspace; reused by integrate and
    the asymptote search."""

    def __init__(self, rho0: DensityState, lindblads: LindbladSet, dt: float):
        if dt <= 0:
            raise ParameterError("dt must be positive")
        p_full = rho0.populations
        support = np.nonzero(p_full)[0]
        self.states = reachable_states(support, lindblads)
        self.n_modes = 2 * rho0.n_agents
        self.occ = _occupation_table(self.states, self.n_modes)
        q = population_generator(self.states, lindblads)
        self.dt = dt
        pos = {int(s): i for i, s in enumerate(self.states)}
        self.p = np.zeros(self.states.size)
        for s in support:
            self.p[pos[int(s)]] = p_full[s]
        if self.states.size <= SUBSPACE_DENSE_MAX:
            self._r_step = rk4_step_matrix(q.toarray(), dt)
            self._power_cache = {}
            self._q = None
        else:
            self._r_step = None
            self._q = q.tocsr()

    def advance(self, n_steps: int):
        if self._r_step is not None:
            # one matrix power instead of n sequential multiplies; identical
            # classic-RK4 stepping in exact arithmetic
            block = self._power_cache.get(n_steps)
            if block is None:
                block = np.linalg.matrix_power(self._r_step, n_steps)
                self._power_cache[n_steps] = block
            self.p = block @ self.p
        else:
            p, q, dt = self.p, self._q, self.dt
            for _ in range(n_steps):
                k1 = q @ p
                k2 = q @ (p + 0.5 * dt * k1)
                k3 = q @ (p + 0.5 * dt * k2)
                k4 = q @ (p + dt * k3)
                p = p + dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
            self.p = p

    def renormalize_if_drifted(self, t: float):
        drift = abs(self.p.sum() - 1.0)
        if drift > TRACE_TOL:
            log.warning("trace drift %.2e at t=%g, renormalizing", drift, t)
            self.p = self.p / self.p.sum()

    def means(self) -> np.ndarray:
        return self.occ @ self.p

    def full_populations(self) -> np.ndarray:
        p = np.zeros(1 << self.n_modes)
        p[self.states] = self.p
        return p


def auto_dt(rho0: DensityState, lindblads: LindbladSet, base: float = 1.0) -> float:
    """Deterministic integration step for a unit sampling interval: small
    enough that the stiffest configuration relaxes accurately."""
    states = reachable_states(np.nonzero(rho0.populations)[0], lindblads)
    rate = max_exit_rate(states, lindblads)
    n = max(1, int(np.ceil(base * rate / RK4_RATE_STEP)))
    return base / n


def integrate(rho0: DensityState, spec: NetworkSpec, lindblads: LindbladSet,
              t_max: float, dt: float, dt_out: float) -> Trajectory:
    """Fixed-step RK4 integration, sampled on {0, dt_out, ..., t_max}.

    Diagonal states use the reachable-subspace population equation; dense
    states (small systems only) integrate the full generator.
    """
    validate_spec(spec)
    if rho0.n_agents != spec.n or lindblads.n_agents != spec.n:
        raise DimensionError("state, spec and channels must agree on the agent count")
    times = output_grid(t_max, dt_out)
    steps_per_out = int(round(dt_out / dt))
    if steps_per_out < 1 or abs(steps_per_out * dt - dt_out) > 1e-9 * max(1.0, dt_out):
        raise ParameterError(f"dt {dt} must divide dt_out {dt_out}")

    if rho0.is_diagonal:
        stepper = _PopulationStepper(rho0, lindblads, dt)
        means = np.empty((times.size, 2 * spec.n))
        means[0] = stepper.means()
        for i in range(1, times.size):
            stepper.advance(steps_per_out)
            stepper.renormalize_if_drifted(times[i])
            means[i] = stepper.means()
        return trajectory_from_means(times, means)

    dim = 1 << (2 * spec.n)
    if 2 * spec.n > DENSE_MAX_MODES:
        raise DimensionError(
            f"dense integration capped at {DENSE_MAX_MODES} modes, got {2 * spec.n}")
    h_diag = free_hamiltonian_diagonal(spec)
    ops = _dense_ops(lindblads)
    rho = rho0.dense.copy()
    idx = np.arange(dim, dtype=np.int64)
    occ = _occupation_table(idx, 2 * spec.n)
    means = np.empty((times.size, 2 * spec.n))
    means[0] = occ @ np.real(np.diag(rho))
    for i in range(1, times.size):
        for _ in range(steps_per_out):
            k1 = _dense_rhs(rho, h_diag, ops)
            k2 = _dense_rhs(rho + 0.5 * dt * k1, h_diag, ops)
            k3 = _dense_rhs(rho + 0.5 * dt * k2, h_diag, ops)
            k4 = _dense_rhs(rho + dt * k3, h_diag, ops)
            rho = rho + dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        drift = abs(np.trace(rho).real - 1.0)
        if drift > TRACE_TOL:
            log.warning("trace drift %.2e at t=%g, renormalizing", drift, times[i])
            rho = rho / np.trace(rho).real
        means[i] = occ @ np.real(np.diag(rho))
    return trajectory_from_means(times, means)


def jump_drift_probabilities(psi: np.ndarray, lindblads: LindbladSet, dt: float):
    """First-order split of a pure state's evolution into the continuous
    drift (probability p_A) and one jump per channel (probabilities p_B).
    They form a distribution up to O(dt^2)."""
    psi = np.asarray(psi, dtype=complex)
    norm = np.linalg.norm(psi)
    if abs(norm - 1.0) > 1e-9:
        raise ParameterError(f"state vector must be normalized, |psi| = {norm!r}")
    if dt <= 0:
        raise ParameterError("dt must be positive")
    ops = [channel_matrix(c, lindblads.n_agents) for c in lindblads.channels]
    jumps = []
    drift = psi.copy()
    for op in ops:
        l_psi = op @ psi
        jumps.append(dt * float(np.vdot(l_psi, l_psi).real))
        drift -= 0.5 * dt * (op.conj().T @ l_psi)
    p_a = float(np.vdot(drift, drift).real)
    return p_a, jumps


@dataclass(frozen=True, eq=False)
class AsymptoteResult:
    value: float
    t_stop: float
    converged: bool
    means: MeanState


def _observable_index(name: str, n_agents: int) -> int:
    raw = name.replace("_", "").strip()
    if len(raw) >= 2 and raw[0] in "FG" and raw[1:].isdigit():
        agent = int(raw[1:])
        if 1 <= agent <= n_agents:
            return (agent - 1) if raw[0] == "F" else (n_agents + agent - 1)
    raise ParameterError(f"unknown observable {name!r}; use F<agent> or G<agent>")


def find_asymptote(rho0: DensityState, spec: NetworkSpec, lindblads: LindbladSet,
                   observable: str = "G6", eps: float = 1e-8,
                   t_cap: float = 2000.0, dt: float = None) -> AsymptoteResult:
    """Integrate until every occupation mean changes by less than ``eps`` per
    unit time, then report the requested observable.  Non-convergence within
    ``t_cap`` is flagged and logged, not fatal."""
    validate_spec(spec)
    if eps <= 0:
        raise ParameterError("eps must be positive")
    if not rho0.is_diagonal:
        raise ParameterError("asymptote search runs on the populations representation")
    which = _observable_index(observable, spec.n)
    if dt is None:
        dt = auto_dt(rho0, lindblads, base=1.0)
    steps_per_unit = max(1, int(round(1.0 / dt)))
    stepper = _PopulationStepper(rho0, lindblads, 1.0 / steps_per_unit)
    prev = stepper.means()
    t = 0.0
    converged = False
    while t < t_cap - 1e-9:
        stepper.advance(steps_per_unit)
        t += 1.0
        stepper.renormalize_if_drifted(t)
        cur = stepper.means()
        if np.abs(cur - prev).max() < eps:
            converged = True
            break
        prev = cur
    else:
        cur = prev
    if not converged:
        log.warning("asymptote not reached by t_cap=%g (observable %s)", t_cap, observable)
    state = MeanState.from_vector(cur)
    return AsymptoteResult(value=float(cur[which]), t_stop=t, converged=converged, means=state)


@dataclass(frozen=True)
class SweepPoint:
    value: float
    asymptote: float
    converged: bool


def sweep(problem_factory, values, observable: str = "G6", eps: float = 1e-8,
          t_cap: float = 2000.0, jobs: int = 1):
    """Asymptote per parameter value.  ``problem_factory(value)`` returns
    (rho0, spec, lindblads); points are independent, so they may run on a
    thread pool, with the output order always following ``values``."""
    values = [float(v) for v in values]

    def solve(v):
        rho0, spec, lindblads = problem_factory(v)
        res = find_asymptote(rho0, spec, lindblads, observable=observable,
                             eps=eps, t_cap=t_cap)
        return SweepPoint(value=v, asymptote=res.value, converged=res.converged)

    if jobs > 1 and len(values) > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            return list(pool.map(solve, values))
    return [solve(v) for v in values]
