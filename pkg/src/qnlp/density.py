"""
Density-matrix word meanings: ambiguity as a sum of pure meanings and
hyponymy as containment of supports.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DimensionMismatch

HERMITIAN_TOL = 1e-12
PSD_TOL = 1e-10
SUPPORT_TOL = 1e-10


@dataclass(frozen=True, eq=False)
class DensityMatrix:
    """Hermitian positive semidefinite matrix; the trace is not forced to 1."""

    matrix: np.ndarray

    def __post_init__(self):
        m = np.array(self.matrix, dtype=complex)
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise DimensionMismatch(f"density matrix must be square, got shape {m.shape}")
        if not np.allclose(m, m.conj().T, atol=HERMITIAN_TOL):
            raise ValueError("density matrix must be Hermitian")
        if m.size and np.linalg.eigvalsh(m).min() < -PSD_TOL:
            raise ValueError("density matrix must be positive semidefinite")
        m.setflags(write=False)
        object.__setattr__(self, "matrix", m)

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    def eigenvalues(self) -> np.ndarray:
        return np.linalg.eigvalsh(self.matrix)

    def rank(self, tol: float = SUPPORT_TOL) -> int:
        return int(np.sum(self.eigenvalues() > tol))

    def support_projector(self, tol: float = SUPPORT_TOL) -> np.ndarray:
        values, vectors = np.linalg.eigh(self.matrix)
        kept = vectors[:, values > tol]
        return kept @ kept.conj().T

    def __add__(self, other: "DensityMatrix") -> "DensityMatrix":
        _same_dim(self, other)
        return DensityMatrix(self.matrix + other.matrix)

    def __eq__(self, other):
        return isinstance(other, DensityMatrix) and self.matrix.shape == other.matrix.shape \
            and np.allclose(self.matrix, other.matrix, atol=HERMITIAN_TOL)

    __hash__ = None


def _same_dim(a: DensityMatrix, b: DensityMatrix):
    if a.dim != b.dim:
        raise DimensionMismatch(f"dimensions differ: {a.dim} and {b.dim}")


def pure(vector) -> DensityMatrix:
    v = np.asarray(vector, dtype=complex).reshape(-1)
    return DensityMatrix(np.outer(v, v.conj()))


def mix_meanings(states, weights=None) -> DensityMatrix:
    """
    Sum of |v><v| over ``states``, weighted when ``weights`` is given.

    >>> mix_meanings([[1, 0]]).matrix.real
    array([[1., 0.],
           [0., 0.]])
    """
    vectors = [np.asarray(v, dtype=complex).reshape(-1) for v in states]
    if not vectors:
        raise ValueError("mix_meanings needs at least one state")
    dim = vectors[0].size
    if any(v.size != dim for v in vectors):
        raise DimensionMismatch("all meanings must share one dimension")
    if weights is None:
        weights = np.ones(len(vectors))
    weights = np.asarray(weights, dtype=float)
    if weights.shape != (len(vectors),):
        raise DimensionMismatch(f"{len(vectors)} states but {weights.size} weights")
    if np.any(weights < 0):
        raise ValueError("weights must be nonnegative")
    m = sum(w * np.outer(v, v.conj()) for w, v in zip(weights, vectors))
    return DensityMatrix(m)


def is_hyponym(a: DensityMatrix, b: DensityMatrix, tol: float = SUPPORT_TOL) -> bool:
    """True when the support of ``a`` lies inside the support of ``b``."""
    _same_dim(a, b)
    rest = np.eye(b.dim) - b.support_projector(tol)
    return float(np.linalg.norm(rest @ a.matrix @ rest)) <= tol


def basis(i: int, dim: int) -> np.ndarray:
    v = np.zeros(dim, dtype=complex)
    v[i] = 1
    return v


def animal_hierarchy(dim: int = 4) -> dict:
    """
    The animal example: lion, tiger and cheetah are the pure states |0>,
    |+> and |->, big cat is |0><0| + |1><1|, and each broader word adds the
    next basis vector (mammal adds |2>, vertebrate adds |3>).
    """
    if dim < 4:
        raise DimensionMismatch("the hierarchy needs four dimensions")
    e = [basis(i, dim) for i in range(dim)]
    plus, minus = (e[0] + e[1]) / np.sqrt(2), (e[0] - e[1]) / np.sqrt(2)
    return {
        "lion": pure(e[0]),
        "tiger": pure(plus),
        "cheetah": pure(minus),
        "big cat": mix_meanings([e[0], e[1]]),
        "mammal": mix_meanings([e[0], e[1], e[2]]),
        "vertebrate": mix_meanings([e[0], e[1], e[2], e[3]]),
    }


HIERARCHY_EDGES = (
    ("lion", "big cat"), ("tiger", "big cat"), ("cheetah", "big cat"),
    ("big cat", "mammal"), ("mammal", "vertebrate"),
)


def hyponym_table(words: dict) -> dict:
    """``(a, b) -> is_hyponym(a, b)`` for every ordered pair of named words."""
    return {(x, y): is_hyponym(words[x], words[y]) for x in words for y in words}
