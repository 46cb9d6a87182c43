"""Network specification, the one-body coupling matrix, and the full
Fock-space Hamiltonian.

A :class:`NetworkSpec` holds everything both engines need: per-agent inertia
parameters ``omega_f``/``omega_g`` for the fake and good modes, per-agent
switch strengths ``lam`` coupling an agent's two modes, and symmetric
zero-diagonal diffusion matrices ``p_f``/``p_g`` linking agents.
"""

from dataclasses import dataclass

import numpy as np
from scipy import sparse

from . import fock
from .errors import DimensionError, ValidationError


@dataclass(frozen=True, eq=False)
class NetworkSpec:
    n: int
    omega_f: np.ndarray
    omega_g: np.ndarray
    lam: np.ndarray
    p_f: np.ndarray
    p_g: np.ndarray

    def __post_init__(self):
        for name in ("omega_f", "omega_g", "lam"):
            object.__setattr__(self, name, np.asarray(getattr(self, name), dtype=float))
        for name in ("p_f", "p_g"):
            object.__setattr__(self, name, np.asarray(getattr(self, name), dtype=float))

    @property
    def n_modes(self) -> int:
        return 2 * self.n


def validate_spec(spec: NetworkSpec) -> NetworkSpec:
    """Return ``spec`` unchanged iff every structural invariant holds.

    Each failure mode raises :class:`ValidationError` with a distinct code.
    """
    n = spec.n
    if not isinstance(n, int) or n < 1:
        raise ValidationError("n_too_small", f"agent count must be a positive integer, got {n}")
    for name, v in (("omega_f", spec.omega_f), ("omega_g", spec.omega_g), ("lam", spec.lam)):
        if v.shape != (n,):
            raise ValidationError("bad_shape", f"{name} must have length {n}, got shape {v.shape}", path=name)
    for name, p in (("p_f", spec.p_f), ("p_g", spec.p_g)):
        if p.shape != (n, n):
            raise ValidationError("bad_shape", f"{name} must be {n}x{n}, got shape {p.shape}", path=name)
    if (spec.omega_f <= 0).any() or (spec.omega_g <= 0).any():
        raise ValidationError("omega_not_positive", "inertia parameters must be strictly positive")
    if (spec.lam < 0).any():
        raise ValidationError("lambda_negative", "switch strengths must be nonnegative")
    for name, p in (("p_f", spec.p_f), ("p_g", spec.p_g)):
        if (p < 0).any():
            raise ValidationError("p_negative", "diffusion coefficients must be nonnegative", path=name)
        if not np.array_equal(p, p.T):
            raise ValidationError("p_not_symmetric", "diffusion matrix must be symmetric", path=name)
        if np.diag(p).any():
            raise ValidationError("p_diagonal_nonzero", "diffusion matrix must have zero diagonal", path=name)
    return spec


def build_v_matrix(spec: NetworkSpec) -> np.ndarray:
    """Hermitian 2N x 2N one-body matrix driving the mode evolution.

    Fake block: ``-omega_f`` on the diagonal, ``2 p_f`` couplings; good block
    analogous; the two blocks are joined by ``diag(lam)``.  Real symmetric by
    construction.
    """
    validate_spec(spec)
    n = spec.n
    v = np.zeros((2 * n, 2 * n))
    v[:n, :n] = 2.0 * spec.p_f
    v[n:, n:] = 2.0 * spec.p_g
    v[np.arange(n), np.arange(n)] = -spec.omega_f
    v[n + np.arange(n), n + np.arange(n)] = -spec.omega_g
    v[np.arange(n), n + np.arange(n)] = spec.lam
    v[n + np.arange(n), np.arange(n)] = spec.lam
    return v


def free_hamiltonian_diagonal(spec: NetworkSpec) -> np.ndarray:
    """Diagonal of the free Hamiltonian over the full Fock basis:
    sum of omega weights of occupied modes per basis configuration."""
    validate_spec(spec)
    m = spec.n_modes
    if m > fock.MAX_MODES:
        raise DimensionError(f"{m} modes exceed the {fock.MAX_MODES}-mode cap")
    weights = np.concatenate([spec.omega_f, spec.omega_g])
    idx = np.arange(1 << m, dtype=np.int64)
    diag = np.zeros(idx.size)
    for b in range(m):
        diag += weights[b] * ((idx >> b) & 1)
    return diag


def build_hamiltonian_matrix(spec: NetworkSpec) -> sparse.csr_matrix:
    """Full Fock-space Hamiltonian: free part plus fake/good diffusion and
    per-agent switch terms, assembled literally as written (each unordered
    agent pair contributes twice, hence the factor 2 in the one-body matrix).

    Hermitian, and commutes with the total number operator since every
    interaction term is an exchange.
    """
    validate_spec(spec)
    n = spec.n
    m = spec.n_modes
    if m > fock.MAX_MODES:
        raise DimensionError(f"{m} modes exceed the {fock.MAX_MODES}-mode cap")
    dim = 1 << m
    ann = [fock.annihilator(k, m) for k in range(1, m + 1)]

    h = sparse.csr_matrix((dim, dim))
    h += sparse.diags(free_hamiltonian_diagonal(spec))

    def fmode(a):
        return a - 1

    def gmode(a):
        return n + a - 1

    for a in range(1, n + 1):
        for b in range(a + 1, n + 1):
            if spec.p_f[a - 1, b - 1]:
                fa, fb = ann[fmode(a)], ann[fmode(b)]
                h += 2.0 * spec.p_f[a - 1, b - 1] * (fa @ fb.T + fb @ fa.T)
            if spec.p_g[a - 1, b - 1]:
                ga, gb = ann[gmode(a)], ann[gmode(b)]
                h += 2.0 * spec.p_g[a - 1, b - 1] * (ga @ gb.T + gb @ ga.T)
    for a in range(1, n + 1):
        if spec.lam[a - 1]:
            fa, ga = ann[fmode(a)], ann[gmode(a)]
            h += spec.lam[a - 1] * (fa @ ga.T + ga @ fa.T)
    return h.tocsr()
