"""Brute-force reference dynamics for tests, deliberately on a different
algorithmic path than the production engines: full Fock-space matrix
exponentials instead of the closed form, and dense superoperator
exponentiation instead of RK4 stepping.  Small systems only."""

from dataclasses import dataclass

import numpy as np
from scipy.linalg import expm

from . import fock, model
from .errors import DimensionError
from .gksl import DensityState, LindbladSet, channel_matrix
from .heisenberg import MeanState
from .model import NetworkSpec

HEISENBERG_MAX_MODES = 8   # dense exp(-iHt) cap
GKSL_MAX_AGENTS = 2        # superoperator dimension 4^(2N) <= 256


@dataclass(frozen=True)
class OracleReport:
    max_abs_error: float
    compared_observables: int


def brute_force_heisenberg(spec: NetworkSpec, n, m, t: float) -> MeanState:
    """Evolve the product number state (n, m) by the full many-body unitary
    and read the occupation means directly."""
    model.validate_spec(spec)
    n_modes = spec.n_modes
    if n_modes > HEISENBERG_MAX_MODES:
        raise DimensionError(
            f"brute-force evolution capped at {HEISENBERG_MAX_MODES} modes, got {n_modes}")
    h = model.build_hamiltonian_matrix(spec).toarray()
    psi = np.zeros(1 << n_modes, dtype=complex)
    psi[fock.basis_index(n, m).index] = 1.0
    psi_t = expm(-1j * t * h) @ psi
    weights = np.abs(psi_t) ** 2
    idx = np.arange(weights.size, dtype=np.int64)
    means = np.array([weights[(idx >> b) & 1 == 1].sum() for b in range(n_modes)])
    return MeanState.from_vector(means)


def _vec(rho: np.ndarray) -> np.ndarray:
    return rho.reshape(-1, order="F")


def _unvec(v: np.ndarray, dim: int) -> np.ndarray:
    return v.reshape((dim, dim), order="F")


def liouvillian_superoperator(spec: NetworkSpec, lindblads: LindbladSet) -> np.ndarray:
    """Dense matrix of the full generator under column-stacking vectorization:
    vec(A X B) = (B^T kron A) vec(X)."""
    model.validate_spec(spec)
    if spec.n > GKSL_MAX_AGENTS:
        raise DimensionError(f"superoperator construction capped at {GKSL_MAX_AGENTS} agents")
    dim = 1 << spec.n_modes
    eye = np.eye(dim)
    h = np.diag(model.free_hamiltonian_diagonal(spec)).astype(complex)
    lv = -1j * (np.kron(eye, h) - np.kron(h.T, eye))
    for c in lindblads.channels:
        if c.strength == 0:
            continue
        l_op = channel_matrix(c, spec.n).toarray().astype(complex)
        ldl = l_op.conj().T @ l_op
        lv += np.kron(l_op.conj(), l_op)
        lv -= 0.5 * (np.kron(eye, ldl) + np.kron(ldl.T, eye))
    return lv


def brute_force_gksl(rho0: DensityState, spec: NetworkSpec,
                     lindblads: LindbladSet, t: float) -> DensityState:
    """Exact master-equation solution by exponentiating the superoperator."""
    lv = liouvillian_superoperator(spec, lindblads)
    rho = rho0.to_dense().dense
    out = _unvec(expm(lv * t) @ _vec(rho), rho.shape[0])
    out = 0.5 * (out + out.conj().T)  # discard rounding-level asymmetry
    return DensityState(n_agents=spec.n, dense=out)


def compare_heisenberg(spec: NetworkSpec, closed_form_means, n, m, t: float) -> OracleReport:
    """Max deviation between closed-form means and the brute-force evolution."""
    ref = brute_force_heisenberg(spec, n, m, t)
    got = np.concatenate([closed_form_means.F, closed_form_means.G])
    want = np.concatenate([ref.F, ref.G])
    return OracleReport(max_abs_error=float(np.abs(got - want).max()),
                        compared_observables=got.size)
