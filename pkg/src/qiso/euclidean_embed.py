"""Exact Euclidean embeddability via a rational LDL^T of the basepoint Gram matrix."""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

import numpy as np

from .errors import NotEmbeddableError, StructuralError
from .metric_space import FiniteMetricSpace, require_valid

__all__ = [
    "Witness",
    "LDLResult",
    "Embeddability",
    "EmbeddedSpace",
    "gram_matrix",
    "ldlt",
    "embeddability",
    "embed",
    "exact_det",
]

Matrix = list[list[Fraction]]


def gram_matrix(space: FiniteMetricSpace, basepoint: int = 0) -> tuple[Matrix, tuple[int, ...]]:
    """Gram matrix of the vectors x_i - x_0 and the point index of each row."""
    if not 0 <= basepoint < space.n:
        raise StructuralError(f"basepoint {basepoint} out of range for {space.n} points")
    idx = tuple(i for i in range(space.n) if i != basepoint)
    sq = space.sqdist
    b = basepoint
    gram = [[(sq[b][i] + sq[b][j] - sq[i][j]) / 2 for j in idx] for i in idx]
    return gram, idx


def exact_det(mat: Sequence[Sequence[Fraction]]) -> Fraction:
    """Determinant by Gaussian elimination over the rationals."""
    a = [[Fraction(v) for v in row] for row in mat]
    n = len(a)
    det = Fraction(1)
    for c in range(n):
        p = next((r for r in range(c, n) if a[r][c] != 0), None)
        if p is None:
            return Fraction(0)
        if p != c:
            a[c], a[p] = a[p], a[c]
            det = -det
        det *= a[c][c]
        for r in range(c + 1, n):
            f = a[r][c] / a[c][c]
            if f:
                for k in range(c, n):
                    a[r][k] -= f * a[c][k]
    return det


@dataclass(frozen=True)
class Witness:
    """Principal submatrix (by point index) with negative determinant: proof that the Gram matrix is not PSD."""

    basepoint: int
    indices: tuple[int, ...]
    submatrix: tuple[tuple[Fraction, ...], ...]
    determinant: Fraction

    def to_json(self) -> dict:
        return {
            "basepoint": self.basepoint,
            "indices": list(self.indices),
            "submatrix": [[str(v) for v in row] for row in self.submatrix],
            "determinant": str(self.determinant),
        }


@dataclass(frozen=True)
class LDLResult:
    """G[perm][:, perm] = L diag(D) L^T, exact. ``rank`` leading pivots are positive, the rest zero."""

    perm: tuple[int, ...]
    L: tuple[tuple[Fraction, ...], ...]
    D: tuple[Fraction, ...]
    rank: int
    negative: tuple[int, ...] | None  # row positions of a negative principal minor, or None


def ldlt(gram: Matrix) -> LDLResult:
    """Symmetric LDL^T with diagonal pivoting over Q.

    Stops at the first step where the Schur complement shows the matrix is
    not PSD: a negative diagonal entry, or a zero diagonal entry with a
    nonzero off-diagonal partner.
    """
    m = len(gram)
    s = [[Fraction(v) for v in row] for row in gram]  # working Schur complement, in permuted order
    perm = list(range(m))
    L = [[Fraction(0)] * m for _ in range(m)]
    D: list[Fraction] = []
    for step in range(m):
        diag = [(s[i][i], i) for i in range(step, m)]
        neg = next((i for v, i in diag if v < 0), None)
        if neg is not None:
            return LDLResult(tuple(perm), tuple(map(tuple, L)), tuple(D), step, tuple(perm[:step]) + (perm[neg],))
        best, piv = max(diag, key=lambda t: (t[0], -t[1]))
        if best == 0:
            for i in range(step, m):
                for j in range(i + 1, m):
                    if s[i][j] != 0:
                        return LDLResult(tuple(perm), tuple(map(tuple, L)), tuple(D), step,
                                         tuple(perm[:step]) + (perm[i], perm[j]))
            return LDLResult(tuple(perm), tuple(map(tuple, L)), tuple(D), step, None)
        if piv != step:
            s[step], s[piv] = s[piv], s[step]
            for row in s:
                row[step], row[piv] = row[piv], row[step]
            L[step], L[piv] = L[piv], L[step]
            perm[step], perm[piv] = perm[piv], perm[step]
        d = s[step][step]
        D.append(d)
        L[step][step] = Fraction(1)
        for i in range(step + 1, m):
            L[i][step] = s[i][step] / d
        for i in range(step + 1, m):
            li = L[i][step]
            if li:
                for j in range(step + 1, m):
                    s[i][j] -= li * s[step][j]
        for i in range(step + 1, m):
            s[i][step] = s[step][i] = Fraction(0)
    return LDLResult(tuple(perm), tuple(map(tuple, L)), tuple(D), m, None)


@dataclass(frozen=True)
class Embeddability:
    embeddable: bool
    rank: int
    basepoint: int
    witness: Witness | None = None

    def __bool__(self):
        return self.embeddable


def _verdict(space: FiniteMetricSpace, basepoint: int) -> tuple[Embeddability, Matrix, tuple[int, ...], LDLResult]:
    require_valid(space)
    gram, idx = gram_matrix(space, basepoint)
    res = ldlt(gram)
    if res.negative is not None:
        rows = res.negative
        sub = tuple(tuple(gram[i][j] for j in rows) for i in rows)
        det = exact_det(sub)
        assert det < 0, "LDL witness must have a negative principal minor"
        w = Witness(basepoint, tuple(idx[r] for r in rows), sub, det)
        return Embeddability(False, res.rank, basepoint, w), gram, idx, res
    return Embeddability(True, res.rank, basepoint), gram, idx, res


def embeddability(space: FiniteMetricSpace, basepoint: int = 0) -> Embeddability:
    return _verdict(space, basepoint)[0]


@dataclass(frozen=True)
class EmbeddedSpace:
    space: FiniteMetricSpace
    basepoint: int
    gram: tuple[tuple[Fraction, ...], ...]
    rank: int
    coords: np.ndarray
    ldl: LDLResult

    @property
    def point_index(self) -> tuple[int, ...]:
        """Point index of each Gram row."""
        return tuple(i for i in range(self.space.n) if i != self.basepoint)

    def exact_factor_gram(self) -> list[list[Fraction]]:
        """Gram matrix rebuilt from the exact factors, back in the original row order."""
        m = len(self.gram)
        L, D, r = self.ldl.L, self.ldl.D, self.rank
        permuted = [[sum((L[i][t] * D[t] * L[j][t] for t in range(r)), Fraction(0)) for j in range(m)]
                    for i in range(m)]
        out = [[Fraction(0)] * m for _ in range(m)]
        for a, pa in enumerate(self.ldl.perm):
            for b, pb in enumerate(self.ldl.perm):
                out[pa][pb] = permuted[a][b]
        return out

    def float_sqdist(self) -> np.ndarray:
        diff = self.coords[:, None, :] - self.coords[None, :, :]
        return np.einsum("ijk,ijk->ij", diff, diff)


def embed(space: FiniteMetricSpace, basepoint: int = 0) -> EmbeddedSpace:
    verdict, gram, idx, res = _verdict(space, basepoint)
    if not verdict.embeddable:
        raise NotEmbeddableError(verdict.witness)
    r = res.rank
    coords = np.zeros((space.n, r))
    scale = np.sqrt([float(d) for d in res.D])
    for pos, row in enumerate(res.perm):
        coords[idx[row]] = [float(res.L[pos][t]) * scale[t] for t in range(r)]
    coords.setflags(write=False)
    return EmbeddedSpace(space, basepoint, tuple(map(tuple, gram)), r, coords, res)
