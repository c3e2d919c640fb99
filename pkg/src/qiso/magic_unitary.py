"""Magic-unitary representations and the isometry conditions they can satisfy.

Convention, fixed everywhere: the coaction is beta(e_y) = sum_x e_x (x) u[x][y],
so a classical permutation sigma has u[x][y] = 1 exactly when x = sigma(y),
and the big unitary is U = sum_{x,y} E_xy (x) u[x][y] acting on C^n (x) C^k.
The antipode on coefficients is transposition of the grid (Kac case).
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

import numpy as np

from .errors import ResourceBoundError, StructuralError
from .metric_space import FiniteMetricSpace, to_fraction

__all__ = [
    "DEFAULT_TOL",
    "DEFAULT_MAX_OPERATOR_DIM",
    "ISOMETRY_CONDITIONS",
    "MagicUnitaryRep",
    "Check",
    "MagicReport",
    "ConditionReport",
    "from_permutation",
    "check_magic",
    "check_commutation",
    "commutation_exact",
    "check_condition_ii",
    "check_condition_iii",
    "check_condition_iv",
    "check_vector_condition",
    "check_measure_preserving",
    "check_all",
    "twin_pairs",
    "Certificate",
    "quantum_certificate",
    "twin_block_rep",
    "antipode",
    "rep_from_json",
    "rep_to_json",
]

DEFAULT_TOL = 1e-10
DEFAULT_MAX_OPERATOR_DIM = 4096


class MagicUnitaryRep:
    """An n x n grid of k x k matrices, stored as an (n, n, k, k) array.

    ``exact`` optionally holds the same grid as an object array of
    Fractions (real rational entries); the float array is always present.
    """

    def __init__(self, u, exact=None):
        u = np.asarray(u, dtype=complex)
        if u.ndim != 4 or u.shape[0] != u.shape[1] or u.shape[2] != u.shape[3]:
            raise StructuralError(f"rep grid must have shape (n, n, k, k), got {u.shape}")
        if exact is not None:
            exact = np.asarray(exact, dtype=object)
            if exact.shape != u.shape:
                raise StructuralError("exact grid shape differs from float grid")
        self.u = u
        self.exact = exact
        self.u.setflags(write=False)

    @classmethod
    def from_exact(cls, grid) -> "MagicUnitaryRep":
        ex = np.asarray(grid, dtype=object)
        ex = np.vectorize(Fraction, otypes=[object])(ex)
        return cls(ex.astype(float), ex)

    @property
    def n(self) -> int:
        return self.u.shape[0]

    @property
    def k(self) -> int:
        return self.u.shape[2]

    @property
    def is_exact(self) -> bool:
        return self.exact is not None

    def big_unitary(self) -> np.ndarray:
        """U = sum E_xy (x) u[x][y] as an (nk) x (nk) matrix."""
        n, k = self.n, self.k
        return self.u.transpose(0, 2, 1, 3).reshape(n * k, n * k)

    def transpose_grid(self) -> "MagicUnitaryRep":
        ex = None if self.exact is None else self.exact.transpose(1, 0, 2, 3)
        return MagicUnitaryRep(self.u.transpose(1, 0, 2, 3), ex)

    def integer_grid(self) -> tuple[np.ndarray, int]:
        """(scale * exact, scale) with scale the lcm of the denominators; int64 unless that could overflow."""
        if self.exact is None:
            raise StructuralError("rep has no exact entries")
        if getattr(self, "_int_grid", None) is None:
            scale = 1
            for v in self.exact.flat:
                scale = math.lcm(scale, v.denominator)
            ints = [v.numerator * (scale // v.denominator) for v in self.exact.flat]
            bound = max((abs(v) for v in ints), default=0) ** 2 * max(self.n, self.k) * 2
            dtype = np.int64 if bound < 2 ** 62 else object
            self._int_grid = (np.array(ints, dtype=dtype).reshape(self.exact.shape), scale)
        return self._int_grid

    def __repr__(self):
        return f"MagicUnitaryRep(n={self.n}, k={self.k}, exact={self.is_exact})"


def antipode(rep: MagicUnitaryRep) -> MagicUnitaryRep:
    """kappa(u[x][y]) = u[y][x]."""
    return rep.transpose_grid()


def from_permutation(sigma: Sequence[int]) -> MagicUnitaryRep:
    n = len(sigma)
    if sorted(sigma) != list(range(n)):
        raise StructuralError(f"{list(sigma)} is not a permutation")
    grid = np.full((n, n, 1, 1), Fraction(0), dtype=object)
    for y in range(n):
        grid[sigma[y], y, 0, 0] = Fraction(1)
    return MagicUnitaryRep.from_exact(grid)


def _maxabs(a) -> float:
    a = np.asarray(a)
    if a.size == 0:
        return 0.0
    if a.dtype == object:
        return float(max(abs(v) for v in a.flat))
    return float(np.max(np.abs(a)))


@dataclass(frozen=True)
class Check:
    deviation: float
    ok: bool
    exact: bool = False

    def to_json(self) -> dict:
        return {"deviation": self.deviation, "ok": self.ok, "exact": self.exact}


@dataclass(frozen=True)
class MagicReport:
    projection: float
    self_adjoint: float
    row_sums: float
    column_sums: float
    tol: float
    exact: bool

    @property
    def deviation(self) -> float:
        return max(self.projection, self.self_adjoint, self.row_sums, self.column_sums)

    @property
    def ok(self) -> bool:
        return self.deviation <= self.tol

    def as_check(self) -> Check:
        return Check(self.deviation, self.ok, self.exact)


def check_magic(rep: MagicUnitaryRep, tol: float = DEFAULT_TOL, exact: bool | None = None) -> MagicReport:
    """Projection, self-adjointness and row/column-sum relations.

    With ``exact`` (default: whenever the rep carries an exact grid) the
    relations are evaluated in rational arithmetic.
    """
    use_exact = rep.is_exact if exact is None else exact
    if use_exact and not rep.is_exact:
        raise StructuralError("exact check requested for a rep without exact entries")
    k = rep.k
    if use_exact:
        # with v = scale * u: u^2 = u  <=>  v^2 = scale * v, and sums equal I  <=>  scale * I
        v, scale = rep.integer_grid()
        eye = np.eye(k, dtype=v.dtype) * scale
        sq = np.einsum("xyab,xybc->xyac", v, v)
        proj = Fraction(_maxint(sq - scale * v), scale * scale)
        adj = Fraction(_maxint(v - v.transpose(0, 1, 3, 2)), scale)
        rows = Fraction(_maxint(v.sum(axis=1) - eye), scale)
        cols = Fraction(_maxint(v.sum(axis=0) - eye), scale)
        return MagicReport(float(proj), float(adj), float(rows), float(cols), tol, True)
    u = rep.u
    eye = np.eye(k)
    sq = np.einsum("xyab,xybc->xyac", u, u)
    proj = _maxabs(sq - u)
    adj = _maxabs(u - np.conj(u.transpose(0, 1, 3, 2)))
    rows = _maxabs(u.sum(axis=1) - eye)
    cols = _maxabs(u.sum(axis=0) - eye)
    return MagicReport(proj, adj, rows, cols, tol, False)


def _maxint(a: np.ndarray) -> int:
    return int(max((abs(int(x)) for x in a.flat), default=0)) if a.dtype == object else int(np.max(np.abs(a), initial=0))


def _require_size(rep: MagicUnitaryRep, space: FiniteMetricSpace) -> None:
    if rep.n != space.n:
        raise StructuralError(f"rep has {rep.n} points, space has {space.n}")


def commutation_exact(rep: MagicUnitaryRep, space: FiniteMetricSpace) -> bool:
    """Exact sufficient test for [u, D] = 0: u commutes with every equal-distance indicator matrix."""
    _require_size(rep, space)
    if not rep.is_exact:
        raise StructuralError("exact commutation needs an exact rep")
    u, _ = rep.integer_grid()
    for _, A in space.class_indicators():
        A = A.astype(u.dtype)
        uA = np.einsum("xzab,zy->xyab", u, A)
        Au = np.einsum("xz,zyab->xyab", A, u)
        if np.any(uA != Au):
            return False
    return True


def check_commutation(rep: MagicUnitaryRep, space: FiniteMetricSpace, tol: float = DEFAULT_TOL) -> Check:
    """max_{x,y} |(uD - Du)[x][y]| entrywise."""
    _require_size(rep, space)
    if rep.is_exact and commutation_exact(rep, space):
        return Check(0.0, True, True)
    D = space.distance_matrix()
    uD = np.einsum("xzab,zy->xyab", rep.u, D)
    Du = np.einsum("xz,zyab->xyab", D, rep.u)
    dev = _maxabs(uD - Du)
    return Check(dev, dev <= tol)


def check_condition_ii(rep: MagicUnitaryRep, space: FiniteMetricSpace, tol: float = DEFAULT_TOL) -> Check:
    """beta(d_x)(y) = kappa(beta(d_y)(x)) for all x, y.

    beta(d_x)(y) = sum_z d(x,z) u[y][z] and kappa(beta(d_y)(x)) = sum_z d(y,z) u[z][x].
    """
    _require_size(rep, space)
    D = space.distance_matrix()
    u = rep.u
    kappa_u = antipode(rep).u  # kappa_u[x][z] = u[z][x]
    lhs = np.einsum("xz,yzab->xyab", D, u)           # [x, y] -> sum_z d(x,z) u[y][z]
    rhs = np.einsum("yz,xzab->xyab", D, kappa_u)     # [x, y] -> sum_z d(y,z) kappa(u[x][z])
    dev = _maxabs(lhs - rhs)
    return Check(dev, dev <= tol)


def _legs(rep: MagicUnitaryRep, max_operator_dim: int) -> tuple[np.ndarray, np.ndarray]:
    """U_13 and U_23 on C^n (x) C^n (x) C^k."""
    n, k = rep.n, rep.k
    dim = n * n * k
    if dim > max_operator_dim:
        raise ResourceBoundError(f"operator dimension n^2 k = {dim} exceeds bound {max_operator_dim}")
    eye = np.eye(n)
    u = rep.u.real if not np.any(rep.u.imag) else rep.u
    # U_13[(x1,x2,a),(y1,y2,b)] = u[x1][y1][a,b] * [x2 == y2]
    u13 = np.einsum("pqab,rs->praqsb", u, eye).reshape(dim, dim)
    # U_23[(x1,x2,a),(y1,y2,b)] = [x1 == y1] * u[x2][y2][a,b]
    u23 = np.einsum("pq,rsab->praqsb", eye, u).reshape(dim, dim)
    return u13, u23


def _distance_vector(space: FiniteMetricSpace) -> np.ndarray:
    return space.distance_matrix().reshape(-1)


def _conjugation_deviation(W: np.ndarray, space: FiniteMetricSpace, k: int) -> float:
    diag = np.repeat(_distance_vector(space), k)  # diagonal of D2 (x) I_k
    return _maxabs((W * diag[None, :]) @ W.conj().T - np.diag(diag))


def check_condition_iii(rep: MagicUnitaryRep, space: FiniteMetricSpace, tol: float = DEFAULT_TOL,
                        max_operator_dim: int = DEFAULT_MAX_OPERATOR_DIM, legs=None) -> Check:
    """W (D2 (x) I) W* = D2 (x) I with W = U_13 U_23."""
    _require_size(rep, space)
    u13, u23 = legs or _legs(rep, max_operator_dim)
    dev = _conjugation_deviation(u13 @ u23, space, rep.k)
    return Check(dev, dev <= tol)


def check_condition_iv(rep: MagicUnitaryRep, space: FiniteMetricSpace, tol: float = DEFAULT_TOL,
                       max_operator_dim: int = DEFAULT_MAX_OPERATOR_DIM, legs=None) -> Check:
    """Same conjugation test with the reversed product W = U_23 U_13."""
    _require_size(rep, space)
    u13, u23 = legs or _legs(rep, max_operator_dim)
    dev = _conjugation_deviation(u23 @ u13, space, rep.k)
    return Check(dev, dev <= tol)


def check_vector_condition(rep: MagicUnitaryRep, space: FiniteMetricSpace, tol: float = DEFAULT_TOL,
                           max_operator_dim: int = DEFAULT_MAX_OPERATOR_DIM, legs=None) -> Check:
    """U_13 U_23 (d (x) e_r) = d (x) e_r and likewise for U_23 U_13, for every basis vector e_r of C^k."""
    _require_size(rep, space)
    k = rep.k
    u13, u23 = legs or _legs(rep, max_operator_dim)
    dk = np.kron(_distance_vector(space)[:, None], np.eye(k))  # columns are d (x) e_r
    dev = max(_maxabs(u13 @ u23 @ dk - dk), _maxabs(u23 @ u13 @ dk - dk))
    return Check(dev, dev <= tol)


def check_measure_preserving(rep: MagicUnitaryRep, space: FiniteMetricSpace, tol: float = DEFAULT_TOL) -> Check:
    """max_y |sum_x w_x u[x][y] - w_y I| entrywise."""
    _require_size(rep, space)
    if rep.is_exact:
        w = np.array(space.measure, dtype=object)
        lhs = np.einsum("x,xyab->yab", w, rep.exact)
        rhs = np.einsum("y,ab->yab", w, np.eye(rep.k, dtype=int).astype(object))
        dev = _maxabs(lhs - rhs)
        return Check(dev, dev <= tol, True)
    w = np.array([float(v) for v in space.measure])
    lhs = np.einsum("x,xyab->yab", w, rep.u)
    rhs = np.einsum("y,ab->yab", w, np.eye(rep.k))
    dev = _maxabs(lhs - rhs)
    return Check(dev, dev <= tol)


ISOMETRY_CONDITIONS = ("commutation", "condition_ii", "condition_iii", "condition_iv", "vector")


@dataclass(frozen=True)
class ConditionReport:
    magic: Check
    commutation: Check
    condition_ii: Check
    condition_iii: Check
    condition_iv: Check
    vector: Check
    measure: Check
    tol: float

    def isometry_checks(self) -> dict[str, Check]:
        return {name: getattr(self, name) for name in ISOMETRY_CONDITIONS}

    @property
    def conditions_agree(self) -> bool:
        return len({c.ok for c in self.isometry_checks().values()}) == 1

    @property
    def isometric(self) -> bool:
        return self.conditions_agree and self.commutation.ok

    def to_json(self) -> dict:
        out = {name: getattr(self, name).to_json()
               for name in ("magic", "measure") + ISOMETRY_CONDITIONS}
        out["agree"] = self.conditions_agree
        out["tol"] = self.tol
        return out


def check_all(rep: MagicUnitaryRep, space: FiniteMetricSpace, tol: float = DEFAULT_TOL,
              max_operator_dim: int = DEFAULT_MAX_OPERATOR_DIM) -> ConditionReport:
    _require_size(rep, space)
    legs = _legs(rep, max_operator_dim)
    return ConditionReport(
        magic=check_magic(rep, tol).as_check(),
        commutation=check_commutation(rep, space, tol),
        condition_ii=check_condition_ii(rep, space, tol),
        condition_iii=check_condition_iii(rep, space, tol, max_operator_dim, legs),
        condition_iv=check_condition_iv(rep, space, tol, max_operator_dim, legs),
        vector=check_vector_condition(rep, space, tol, max_operator_dim, legs),
        measure=check_measure_preserving(rep, space, tol),
        tol=tol,
    )


# --- noncommutativity certificates -------------------------------------------------------------

def _are_twins(space: FiniteMetricSpace, a: int, b: int) -> bool:
    sq = space.sqdist
    return all(sq[a][x] == sq[b][x] for x in range(space.n) if x not in (a, b))


def twin_pairs(space: FiniteMetricSpace) -> list[tuple[int, int]]:
    """All pairs {a, b}, a < b, at equal distance from every other point; lexicographic."""
    return [(a, b) for a, b in itertools.combinations(range(space.n), 2) if _are_twins(space, a, b)]


_P = np.array([[Fraction(1), Fraction(0)], [Fraction(0), Fraction(0)]], dtype=object)
_Q = np.array([[Fraction(1, 2), Fraction(1, 2)], [Fraction(1, 2), Fraction(1, 2)]], dtype=object)
_I2 = np.array([[Fraction(1), Fraction(0)], [Fraction(0), Fraction(1)]], dtype=object)


def twin_block_rep(n: int, pair1: tuple[int, int], pair2: tuple[int, int]) -> MagicUnitaryRep:
    """k = 2 magic unitary: [[p, 1-p], [1-p, p]] on pair1, [[q, 1-q], [1-q, q]] on pair2, identity elsewhere.

    p = diag(1, 0) and q = [[1, 1], [1, 1]] / 2 do not commute. The grid
    is magic for any two disjoint pairs; it commutes with the distance
    matrix when both pairs are twins.
    """
    a, b = pair1
    c, d = pair2
    if len({a, b, c, d}) != 4 or not all(0 <= i < n for i in (a, b, c, d)):
        raise StructuralError("pairs must be disjoint and in range")
    zero = np.zeros((2, 2), dtype=int).astype(object) * Fraction(0)
    grid = np.empty((n, n, 2, 2), dtype=object)
    for x in range(n):
        for y in range(n):
            grid[x, y] = zero
    for x in range(n):
        if x not in (a, b, c, d):
            grid[x, x] = _I2
    for (s, t), proj in (((a, b), _P), ((c, d), _Q)):
        grid[s, s] = grid[t, t] = proj
        grid[s, t] = grid[t, s] = _I2 - proj
    return MagicUnitaryRep.from_exact(grid)


def _exact_operator_norm(m) -> Fraction | None:
    """Operator norm when m*m is a rational multiple c I with c a rational square; else None."""
    mm = np.conj(m.T) @ m
    c = mm[0, 0]
    size = mm.shape[0]
    if any(mm[i, j] != (c if i == j else 0) for i in range(size) for j in range(size)):
        return None
    c = Fraction(c)
    a, b = math.isqrt(c.numerator), math.isqrt(c.denominator)
    if a * a == c.numerator and b * b == c.denominator:
        return Fraction(a, b)
    return None


@dataclass(frozen=True)
class Certificate:
    """A non-commutative magic unitary commuting with the distance matrix.

    Its existence shows the quantum isometry group is not a classical group.
    """

    rep: MagicUnitaryRep
    pairs: tuple[tuple[int, int], tuple[int, int]]
    witness_norm: Fraction
    witness_points: tuple[int, int]

    @property
    def witness_commutator(self) -> np.ndarray:
        a, c = self.witness_points
        u = self.rep.exact
        return u[a, a] @ u[c, c] - u[c, c] @ u[a, a]


def quantum_certificate(space: FiniteMetricSpace) -> Certificate | None:
    """First (lexicographic) pair of disjoint twin pairs, turned into a k = 2 certificate.

    Sound but incomplete: ``None`` means no such pairs exist, not that the
    quantum isometry group is commutative.
    """
    pairs = twin_pairs(space)
    for p1, p2 in itertools.combinations(pairs, 2):
        if set(p1) & set(p2):
            continue
        rep = twin_block_rep(space.n, p1, p2)
        a, c = p1[0], p2[0]
        comm = rep.exact[a, a] @ rep.exact[c, c] - rep.exact[c, c] @ rep.exact[a, a]
        norm = _exact_operator_norm(comm)
        assert norm == Fraction(1, 2)
        assert check_magic(rep).deviation == 0 and commutation_exact(rep, space)
        return Certificate(rep, (p1, p2), norm, (a, c))
    return None


# --- JSON ----------------------------------------------------------------------------------------

def _parse_scalar(v):
    """(value, is_exact) from a number or 'p/q' string."""
    if isinstance(v, str):
        return to_fraction(v), True
    if isinstance(v, bool) or not isinstance(v, (int, float)):
        raise StructuralError(f"bad matrix entry {v!r}")
    return (Fraction(v), True) if isinstance(v, int) else (float(v), False)


def rep_from_json(doc) -> MagicUnitaryRep:
    """Parse {"k": k, "u": n x n grid of k x k matrices of [re, im] pairs}."""
    if not isinstance(doc, dict) or "u" not in doc or "k" not in doc:
        raise StructuralError("rep file needs keys 'k' and 'u'")
    k = doc["k"]
    grid = doc["u"]
    n = len(grid)
    vals = np.zeros((n, n, k, k), dtype=complex)
    exact = np.empty((n, n, k, k), dtype=object)
    all_exact = True
    try:
        for x in range(n):
            if len(grid[x]) != n:
                raise StructuralError(f"row {x} of 'u' has length {len(grid[x])}, expected {n}")
            for y in range(n):
                block = grid[x][y]
                if len(block) != k or any(len(r) != k for r in block):
                    raise StructuralError(f"u[{x}][{y}] is not {k}x{k}")
                for a in range(k):
                    for b in range(k):
                        re_, im_ = block[a][b]
                        re_v, re_ex = _parse_scalar(re_)
                        im_v, im_ex = _parse_scalar(im_)
                        vals[x, y, a, b] = complex(float(re_v), float(im_v))
                        if re_ex and im_ex and im_v == 0:
                            exact[x, y, a, b] = re_v
                        else:
                            all_exact = False
    except (TypeError, ValueError) as exc:
        raise StructuralError(f"malformed rep grid: {exc}") from exc
    return MagicUnitaryRep(vals, exact if all_exact else None)


def rep_to_json(rep: MagicUnitaryRep) -> dict:
    n, k = rep.n, rep.k
    if rep.is_exact:
        entry = lambda x, y, a, b: [str(rep.exact[x, y, a, b]), "0"]
    else:
        entry = lambda x, y, a, b: [float(rep.u[x, y, a, b].real), float(rep.u[x, y, a, b].imag)]
    return {"k": k, "u": [[[[entry(x, y, a, b) for b in range(k)] for a in range(k)]
                           for y in range(n)] for x in range(n)]}
