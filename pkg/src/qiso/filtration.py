"""Orthogonal filtration of functions on an embedded finite space by polynomial degree."""
from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .classical_iso import is_isometry, preserves_measure
from .euclidean_embed import EmbeddedSpace
from .magic_unitary import (DEFAULT_TOL, MagicUnitaryRep, check_commutation, check_magic,
                            check_measure_preserving)

__all__ = [
    "DROP_TOL",
    "OrthogonalFiltration",
    "build_filtration",
    "Preservation",
    "check_preserved_classical",
    "check_preserved_quantum",
]

DROP_TOL = 1e-8


@dataclass(frozen=True)
class OrthogonalFiltration:
    """levels[m] is an (n, dims[m]) array whose columns are a weighted-orthonormal basis of level m."""

    levels: tuple[np.ndarray, ...]
    weights: np.ndarray
    degrees: tuple[int, ...]

    @property
    def dims(self) -> list[int]:
        return [b.shape[1] for b in self.levels]

    @property
    def n(self) -> int:
        return self.weights.shape[0]

    def inner(self, f: np.ndarray, g: np.ndarray) -> np.ndarray:
        """<f, g> = sum_x w_x conj(f(x)) g(x), column-wise for 2-d inputs."""
        return f.conj().T @ (self.weights[:, None] * g if g.ndim == 2 else self.weights * g)

    def projector(self, m: int) -> np.ndarray:
        """Weighted orthogonal projection onto level m, as an n x n matrix."""
        B = self.levels[m]
        return B @ B.conj().T @ np.diag(self.weights)

    def orthonormality_defect(self) -> float:
        B = np.hstack(self.levels)
        return float(np.max(np.abs(self.inner(B, B) - np.eye(B.shape[1]))))


def _monomials(r: int, degree: int):
    """Exponent-free monomials of exact degree, as index tuples in graded-lex order."""
    return itertools.combinations_with_replacement(range(r), degree)


def build_filtration(emb: EmbeddedSpace, drop_tol: float = DROP_TOL) -> OrthogonalFiltration:
    """Gram-Schmidt the coordinate monomials degree by degree.

    Level m collects what degree-m monomials add beyond all lower degrees.
    A candidate is dropped when its residual norm falls below
    ``drop_tol`` times its original norm. Stops once the levels span all
    n-point functions.
    """
    X = np.asarray(emb.coords, dtype=float)
    n, r = X.shape
    w = np.array([float(v) for v in emb.space.measure])
    ones = np.ones(n) / np.sqrt(w.sum())
    levels = [ones[:, None]]
    degrees = [0]
    basis = ones[:, None]
    total = 1
    degree = 0
    while total < n and degree < n:
        degree += 1
        new: list[np.ndarray] = []
        seen: list[np.ndarray] = []
        for mono in _monomials(r, degree):
            v = np.prod(X[:, list(mono)], axis=1) if mono else np.ones(n)
            if any(np.array_equal(v, s) for s in seen):
                continue
            seen.append(v)
            norm0 = np.sqrt(np.sum(w * v * v))
            if norm0 == 0:
                continue
            cur = np.hstack([basis] + [c[:, None] for c in new])
            for _ in range(2):  # second pass for numerical orthogonality
                v = v - cur @ (cur.T @ (w * v))
            norm = np.sqrt(np.sum(w * v * v))
            if norm > drop_tol * norm0:
                new.append(v / norm)
                if total + len(new) == n:
                    break
        if not new:
            break
        level = np.column_stack(new)
        levels.append(level)
        degrees.append(degree)
        basis = np.hstack([basis, level])
        total += level.shape[1]
    for b in levels:
        b.setflags(write=False)
    return OrthogonalFiltration(tuple(levels), w, tuple(degrees))


@dataclass(frozen=True)
class Preservation:
    deviation: float
    per_level: tuple[float, ...]
    precondition_ok: bool
    notes: tuple[str, ...] = ()

    def ok(self, tol: float = DEFAULT_TOL) -> bool:
        return self.deviation <= tol


def _commutator_norms(U: np.ndarray, filt: OrthogonalFiltration, k: int) -> tuple[float, ...]:
    out = []
    eye = np.eye(k)
    for m in range(len(filt.levels)):
        Q = np.kron(filt.projector(m), eye)
        out.append(float(np.max(np.abs(U @ Q - Q @ U))))
    return tuple(out)


def check_preserved_classical(sigma: Sequence[int], filt: OrthogonalFiltration,
                              emb: EmbeddedSpace) -> Preservation:
    """max_m |P Q_m - Q_m P| for the pullback (P f)(x) = f(sigma^-1 x).

    Only measure-preserving isometries are guaranteed to give zero; other
    permutations are evaluated anyway and flagged.
    """
    sigma = tuple(sigma)
    notes = []
    if not is_isometry(sigma, emb.space):
        notes.append("not an isometry")
    if not preserves_measure(sigma, emb.space):
        notes.append("not measure-preserving")
    n = len(sigma)
    P = np.zeros((n, n))
    P[list(sigma), range(n)] = 1.0
    per = _commutator_norms(P, filt, 1)
    return Preservation(max(per), per, not notes, tuple(notes))


def check_preserved_quantum(rep: MagicUnitaryRep, filt: OrthogonalFiltration, emb: EmbeddedSpace,
                            tol: float = DEFAULT_TOL) -> Preservation:
    """max_m |U (Q_m (x) I) - (Q_m (x) I) U| for the big unitary of the rep."""
    notes = []
    if not check_magic(rep, tol).ok:
        notes.append("not magic")
    elif not check_commutation(rep, emb.space, tol).ok:
        notes.append("does not commute with the distance matrix")
    if not check_measure_preserving(rep, emb.space, tol).ok:
        notes.append("not measure-preserving")
    per = _commutator_norms(rep.big_unitary(), filt, rep.k)
    return Preservation(max(per), per, not notes, tuple(notes))
