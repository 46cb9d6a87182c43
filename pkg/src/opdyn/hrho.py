"""Piecewise dynamics with rule-updated inertia parameters.

The horizon [0, T] is split into windows of length tau.  Within a window the
mode operators evolve under the current coupling matrix; at each boundary
k*tau the per-agent variations of the means over the window feed one of six
update rules that rescale the inertia parameters, after which the coupling
matrix is rebuilt for the next window.

Operators evolve continuously across windows (the window propagators
compose), so mean values at any time come from the squared moduli of the
accumulated product propagator applied to the t=0 means.  With the identity
rule the product collapses and the run is exactly a closed-form evolution.
"""

import logging
from dataclasses import dataclass

import numpy as np

from .errors import DimensionError, ParameterError, ValidationError
from .heisenberg import (Eigenbasis, MeanState, Trajectory, run_heisenberg,
                         trajectory_from_means)
from .model import NetworkSpec, build_v_matrix, validate_spec

log = logging.getLogger(__name__)

OMEGA_MIN = 1e-6  # multiplicative updates may turn negative; inertia must stay positive


@dataclass(frozen=True, eq=False)
class DeltaReport:
    """Per-agent change of the fake/good means over one window."""

    delta_f: np.ndarray
    delta_g: np.ndarray


@dataclass(frozen=True, eq=False)
class RuleSpec:
    """Which update rule runs, its per-agent weights, and the window length."""

    rule_id: int
    kappa: np.ndarray
    tau: float

    def __post_init__(self):
        object.__setattr__(self, "kappa", np.asarray(self.kappa, dtype=float))
        if self.rule_id not in range(7):
            raise ValidationError("unknown_rule", f"rule_id must be 0..6, got {self.rule_id}")
        if (self.kappa < 0).any():
            raise ValidationError("kappa_negative", "rule weights must be nonnegative")
        if self.tau <= 0:
            raise ValidationError("tau_not_positive", "window length must be positive")

    def is_identity(self) -> bool:
        return self.rule_id == 0 or not self.kappa.any()


@dataclass(frozen=True)
class HrhoSchedule:
    t_max: float
    dt_out: float

    def __post_init__(self):
        if self.t_max <= 0 or self.dt_out <= 0:
            raise ValidationError("bad_schedule", "t_max and dt_out must be positive")


def compute_deltas(prev: MeanState, cur: MeanState) -> DeltaReport:
    if prev.n != cur.n:
        raise DimensionError("states have different agent counts")
    return DeltaReport(delta_f=cur.F - prev.F, delta_g=cur.G - prev.G)


def apply_rule(rule: RuleSpec, omega_f, omega_g, d: DeltaReport):
    """One multiplicative inertia update; results are clamped below at
    OMEGA_MIN (the linear rules can drive a factor negative)."""
    omega_f = np.asarray(omega_f, dtype=float)
    omega_g = np.asarray(omega_g, dtype=float)
    k = rule.kappa
    df, dg = d.delta_f, d.delta_g
    if rule.rule_id == 0:
        return omega_f, omega_g
    if rule.rule_id == 1:
        wf, wg = omega_f * (1 + k * df), omega_g * (1 + k / 2 * dg)
    elif rule.rule_id == 2:
        wf, wg = omega_f * (1 + k / 2 * df), omega_g * (1 + k * dg)
    elif rule.rule_id == 3:
        wf, wg = omega_f * (1 + k * df), omega_g * (1 + k / 2 * dg ** 2)
    elif rule.rule_id == 4:
        wf, wg = omega_f * (1 + k * df ** 2), omega_g * (1 + k / 2 * dg)
    elif rule.rule_id == 5:
        wf, wg = omega_f * (1 + k / 2 * df), omega_g * (1 + k * dg ** 2)
    elif rule.rule_id == 6:
        wf, wg = omega_f * (1 + k / 2 * df ** 2), omega_g * (1 + k * dg)
    else:
        raise ValidationError("unknown_rule", f"rule_id must be 0..6, got {rule.rule_id}")
    if (wf < OMEGA_MIN).any() or (wg < OMEGA_MIN).any():
        log.warning("inertia update clamped at %.1e (rule %d)", OMEGA_MIN, rule.rule_id)
    return np.maximum(wf, OMEGA_MIN), np.maximum(wg, OMEGA_MIN)


def run_hrho(spec: NetworkSpec, rule: RuleSpec, sched: HrhoSchedule,
             init: MeanState, on_update=None) -> Trajectory:
    """Glue the windowed evolutions into one trajectory.

    ``on_update(k, omega_f, omega_g)`` is called after each boundary update
    (used by tests to watch the clamp property).  With the identity rule the
    run delegates to :func:`run_heisenberg` and is bit-identical to it.
    """
    validate_spec(spec)
    if init.n != spec.n:
        raise DimensionError(f"initial state has {init.n} agents, spec has {spec.n}")
    if rule.is_identity():
        return run_heisenberg(spec, init, sched.t_max, sched.dt_out)

    tau, t_max, dt_out = rule.tau, sched.t_max, sched.dt_out
    if tau >= t_max:
        # one window covering the whole horizon: no update ever takes effect
        return run_heisenberg(spec, init, t_max, dt_out)
    n_sub = int(round(tau / dt_out))
    if n_sub < 1 or abs(n_sub * dt_out - tau) > 1e-9 * max(1.0, tau):
        raise ParameterError(f"dt_out {dt_out} must divide the window length {tau}")
    n_win = int(round(t_max / tau))
    if n_win < 1 or abs(n_win * tau - t_max) > 1e-9 * max(1.0, t_max):
        raise ParameterError(f"t_max {t_max} must be a multiple of the window length {tau}")

    omega_f = spec.omega_f.copy()
    omega_g = spec.omega_g.copy()
    m0 = init.vector()
    u_acc = np.eye(2 * spec.n, dtype=complex)

    means = np.empty((n_win * n_sub + 1, 2 * spec.n))
    means[0] = m0
    m_window_start = m0
    row = 1
    for k in range(1, n_win + 1):
        window_spec = NetworkSpec(spec.n, omega_f, omega_g, spec.lam, spec.p_f, spec.p_g)
        basis = Eigenbasis(build_v_matrix(window_spec))
        u = u_acc
        for j in range(1, n_sub + 1):
            u = basis.unitary(j * dt_out) @ u_acc
            means[row] = np.abs(u) ** 2 @ m0
            row += 1
        # the boundary sample and the next window's starting propagator share
        # one matrix, which makes the gluing exact
        u_acc = u
        m_end = means[row - 1]
        deltas = compute_deltas(MeanState.from_vector(m_window_start),
                                MeanState.from_vector(m_end))
        omega_f, omega_g = apply_rule(rule, omega_f, omega_g, deltas)
        if on_update is not None:
            on_update(k, omega_f.copy(), omega_g.copy())
        m_window_start = m_end

    times = np.arange(n_win * n_sub + 1) * dt_out
    return trajectory_from_means(times, means)
