"""Fermionic mode operators and Fock-basis indexing for M modes.

Flat mode order: fake modes of all agents first, then good modes, so for N
agents mode ``alpha`` (1-based) is the fake mode of agent alpha and mode
``N + alpha`` its good mode.  Basis indices are little-endian over that order:
bit ``b`` of a basis index holds the occupation of flat mode ``b + 1``.

Anticommutation is realized by the standard parity-string construction: the
annihilator of mode k picks up a sign ``(-1)^(number of occupied modes below
k)``, which makes all matrix entries exactly 0 or +-1.
"""

from dataclasses import dataclass
from enum import Enum

import numpy as np
from scipy import sparse

from .errors import DimensionError, ParameterError

MAX_MODES = 14


class ModeKind(Enum):
    FAKE = "fake"
    GOOD = "good"


def flat_index(kind: ModeKind, agent: int, n_agents: int) -> int:
    """1-based flat mode index of (kind, agent) in the fake-then-good order."""
    if not 1 <= agent <= n_agents:
        raise ParameterError(f"agent {agent} out of range 1..{n_agents}")
    return agent if kind is ModeKind.FAKE else n_agents + agent


def _check_mode(k: int, n_modes: int):
    if not 1 <= n_modes <= MAX_MODES:
        raise DimensionError(f"mode count {n_modes} outside 1..{MAX_MODES}")
    if not 1 <= k <= n_modes:
        raise ParameterError(f"mode index {k} out of range 1..{n_modes}")


def annihilator(k: int, n_modes: int) -> sparse.csr_matrix:
    """Sparse matrix of the annihilation operator of flat mode k (1-based)."""
    _check_mode(k, n_modes)
    dim = 1 << n_modes
    bit = k - 1
    idx = np.arange(dim, dtype=np.int64)
    occupied = idx[(idx >> bit) & 1 == 1]
    below = occupied & ((1 << bit) - 1)
    signs = np.where(_popcount(below) % 2 == 1, -1.0, 1.0)
    rows = occupied - (1 << bit)
    return sparse.csr_matrix((signs, (rows, occupied)), shape=(dim, dim))


def creation(k: int, n_modes: int) -> sparse.csr_matrix:
    """Adjoint of :func:`annihilator` (entries are real)."""
    return annihilator(k, n_modes).T.tocsr()


def number_operator(k: int, n_modes: int) -> sparse.csr_matrix:
    """Occupation-number projector of mode k: diagonal, entry = bit k-1."""
    _check_mode(k, n_modes)
    idx = np.arange(1 << n_modes, dtype=np.int64)
    return sparse.diags(((idx >> (k - 1)) & 1).astype(float)).tocsr()


def _popcount(values: np.ndarray) -> np.ndarray:
    out = np.zeros_like(values)
    v = values.copy()
    while v.any():
        out += v & 1
        v >>= 1
    return out


@dataclass(frozen=True)
class FockBasisIndex:
    """Occupation bit vector and its integer basis index (a bijection)."""

    occupation: tuple
    index: int


def basis_index(n, m) -> FockBasisIndex:
    """Index of the product number state with fake occupations ``n`` and good
    occupations ``m`` (both length-N sequences of 0/1)."""
    n = np.asarray(n, dtype=int)
    m = np.asarray(m, dtype=int)
    if n.shape != m.shape or n.ndim != 1:
        raise DimensionError("n and m must be equal-length 1-d bit vectors")
    occ = np.concatenate([n, m])
    if not np.isin(occ, (0, 1)).all():
        raise ParameterError("occupations must be 0 or 1")
    index = int(np.sum(occ << np.arange(occ.size)))
    return FockBasisIndex(occupation=tuple(int(b) for b in occ), index=index)


def occupation_of(index: int, n_modes: int) -> tuple:
    """Inverse of :func:`basis_index`: bit vector of a basis index."""
    if not 0 <= index < (1 << n_modes):
        raise ParameterError(f"index {index} outside Fock space of {n_modes} modes")
    return tuple((index >> b) & 1 for b in range(n_modes))


@dataclass(frozen=True)
class CarReport:
    """Worst-case deviations from the canonical anticommutation relations."""

    dagger_deviation: float  # max |{a_j, a_k^dag} - delta_jk I|
    pair_deviation: float    # max |{a_j, a_k}|
    n_modes: int

    @property
    def max_deviation(self) -> float:
        return max(self.dagger_deviation, self.pair_deviation)


def check_car(n_modes: int) -> CarReport:
    """Exhaustively check the anticommutation relations for all mode pairs.

    Intended for tests and the ``validate`` CLI command; the matrices are
    integer valued so both deviations should be exactly zero.
    """
    if not 1 <= n_modes <= 8:
        raise DimensionError("exhaustive CAR check supported for 1..8 modes")
    ops = [annihilator(k, n_modes).toarray() for k in range(1, n_modes + 1)]
    eye = np.eye(1 << n_modes)
    dev_dagger = 0.0
    dev_pair = 0.0
    for j, aj in enumerate(ops):
        for k, ak in enumerate(ops):
            anti = aj @ ak.T + ak.T @ aj
            target = eye if j == k else 0.0
            dev_dagger = max(dev_dagger, np.abs(anti - target).max())
            dev_pair = max(dev_pair, np.abs(aj @ ak + ak @ aj).max())
    return CarReport(dev_dagger, dev_pair, n_modes)
