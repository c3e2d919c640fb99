"""Classical isometry groups of finite metric spaces and their affine form."""
from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .errors import PreconditionError, ResourceBoundError, StructuralError
from .euclidean_embed import EmbeddedSpace
from .metric_space import FiniteMetricSpace, require_valid

__all__ = [
    "Perm",
    "compose",
    "inverse",
    "identity",
    "is_isometry",
    "preserves_measure",
    "PermGroup",
    "isometry_group",
    "isometry_group_order",
    "isometry_group_bruteforce",
    "mu_preserving_subgroup",
    "AffineForm",
    "affine_form",
]

Perm = tuple[int, ...]


def compose(p: Perm, q: Perm) -> Perm:
    """p after q: i -> p[q[i]]."""
    return tuple(p[i] for i in q)


def inverse(p: Perm) -> Perm:
    out = [0] * len(p)
    for i, pi in enumerate(p):
        out[pi] = i
    return tuple(out)


def identity(n: int) -> Perm:
    return tuple(range(n))


def _check_perm(p: Sequence[int], n: int) -> Perm:
    p = tuple(int(v) for v in p)
    if sorted(p) != list(range(n)):
        raise StructuralError(f"{list(p)} is not a permutation of 0..{n - 1}")
    return p


def is_isometry(sigma: Perm, space: FiniteMetricSpace) -> bool:
    sq = space.sqdist
    n = space.n
    return len(sigma) == n and all(sq[sigma[i]][sigma[j]] == sq[i][j] for i in range(n) for j in range(i + 1, n))


def preserves_measure(sigma: Perm, space: FiniteMetricSpace) -> bool:
    w = space.measure
    return all(w[sigma[i]] == w[i] for i in range(space.n))


def _closure(n: int, gens: Iterable[Perm]) -> set[Perm]:
    gens = list(gens)
    seen = {identity(n)}
    frontier = [identity(n)]
    while frontier:
        nxt = []
        for g in frontier:
            for s in gens:
                h = compose(s, g)
                if h not in seen:
                    seen.add(h)
                    nxt.append(h)
        frontier = nxt
    return seen


def _greedy_generators(n: int, elements: Sequence[Perm]) -> tuple[Perm, ...]:
    gens: list[Perm] = []
    span = {identity(n)}
    for g in elements:
        if g not in span:
            gens.append(g)
            span = _closure(n, gens)
    return tuple(gens)


@dataclass(frozen=True)
class PermGroup:
    """A finite permutation group stored as its full, lexicographically sorted element list."""

    n: int
    elements: tuple[Perm, ...]
    generators: tuple[Perm, ...]

    @classmethod
    def from_elements(cls, n: int, elements: Iterable[Sequence[int]]) -> "PermGroup":
        elems = sorted({_check_perm(e, n) for e in elements})
        group = cls(n, tuple(elems), _greedy_generators(n, elems))
        bad = group.axiom_failures()
        if bad:
            raise StructuralError("element set is not a group: " + ", ".join(bad))
        return group

    @classmethod
    def generate(cls, n: int, generators: Iterable[Sequence[int]]) -> "PermGroup":
        gens = [_check_perm(g, n) for g in generators]
        elems = sorted(_closure(n, gens))
        return cls(n, tuple(elems), _greedy_generators(n, elems))

    @classmethod
    def trivial(cls, n: int) -> "PermGroup":
        return cls(n, (identity(n),), ())

    @property
    def order(self) -> int:
        return len(self.elements)

    def __contains__(self, p) -> bool:
        return tuple(p) in self._set

    def __iter__(self):
        return iter(self.elements)

    def __len__(self):
        return len(self.elements)

    @property
    def _set(self) -> frozenset:
        cached = self.__dict__.get("_set_cache")
        if cached is None:
            cached = frozenset(self.elements)
            object.__setattr__(self, "_set_cache", cached)
        return cached

    def index(self, p: Perm) -> int:
        return self.elements.index(tuple(p))

    def axiom_failures(self) -> list[str]:
        """Exhaustive closure / inverse / identity check."""
        s = self._set
        out = []
        if identity(self.n) not in s:
            out.append("missing identity")
        if any(inverse(g) not in s for g in self.elements):
            out.append("not closed under inverse")
        if any(compose(g, h) not in s for g in self.elements for h in self.elements):
            out.append("not closed under composition")
        return out

    def filter(self, keep) -> "PermGroup":
        elems = tuple(g for g in self.elements if keep(g))
        return PermGroup(self.n, elems, _greedy_generators(self.n, elems))


def _search(space: FiniteMetricSpace, prefix: Sequence[int], respect_measure: bool = False):
    """Yield, in lexicographic order, every isometry whose images of 0..len(prefix)-1 are ``prefix``.

    Candidate images of a point are restricted to points with the same
    sorted distance profile (and weight, with ``respect_measure``); each
    partial assignment is checked against the points already placed.
    """
    n, sq, w = space.n, space.sqdist, space.measure
    profile = [space.distance_profile(i) for i in range(n)]
    candidates = [[j for j in range(n) if profile[j] == profile[i] and (not respect_measure or w[j] == w[i])]
                  for i in range(n)]
    image = list(prefix) + [-1] * (n - len(prefix))
    used = [False] * n
    for j in prefix:
        used[j] = True
    start = len(prefix)
    if any(sq[image[a]][image[b]] != sq[a][b] for a in range(start) for b in range(a)):
        return

    def extend(i: int):
        if i == n:
            yield tuple(image)
            return
        for j in candidates[i]:
            if used[j]:
                continue
            if all(sq[j][image[t]] == sq[i][t] for t in range(i)):
                image[i] = j
                used[j] = True
                yield from extend(i + 1)
                used[j] = False
        image[i] = -1

    yield from extend(start)


def isometry_group(space: FiniteMetricSpace, max_order: int | None = None) -> PermGroup:
    """All permutations preserving the squared distances, by backtracking.

    With ``max_order`` set, groups larger than that raise
    :class:`ResourceBoundError` before any enumeration.
    """
    require_valid(space)
    if max_order is not None:
        order, _ = isometry_group_order(space)
        if order > max_order:
            raise ResourceBoundError(f"isometry group has order {order} > {max_order}; not enumerated")
    elems = tuple(_search(space, ()))
    return PermGroup(space.n, elems, _greedy_generators(space.n, elems))


def isometry_group_order(space: FiniteMetricSpace, respect_measure: bool = False) -> tuple[int, tuple[Perm, ...]]:
    """Order and a strong generating set, from a point-stabilizer chain.

    At level i the orbit of i under the isometries fixing 0..i-1 is built
    by orbit closure over the generators found so far; a search is run only
    for candidates not yet reached. The order is the product of orbit sizes.
    """
    require_valid(space)
    n = space.n
    gens: list[Perm] = []
    order = 1
    for i in range(n):
        fixed = tuple(range(i))
        level = [g for g in gens if g[:i] == fixed]
        orbit = {i}
        frontier = [i]
        while frontier:
            frontier = [g[x] for x in frontier for g in level if g[x] not in orbit]
            orbit.update(frontier)
        for j in range(i + 1, n):
            if j in orbit:
                continue
            found = next(_search(space, fixed + (j,), respect_measure), None)
            if found is None:
                continue
            gens.append(found)
            level.append(found)
            frontier = [j]
            orbit.add(j)
            while frontier:
                frontier = [g[x] for x in frontier for g in level if g[x] not in orbit]
                orbit.update(frontier)
        order *= len(orbit)
    return order, tuple(sorted(set(gens)))


def isometry_group_bruteforce(space: FiniteMetricSpace) -> PermGroup:
    """Reference enumeration over all n! permutations."""
    n = space.n
    elems = tuple(p for p in itertools.permutations(range(n)) if is_isometry(p, space))
    return PermGroup(n, elems, _greedy_generators(n, elems))


def mu_preserving_subgroup(group: PermGroup, space: FiniteMetricSpace) -> PermGroup:
    return group.filter(lambda g: preserves_measure(g, space))


@dataclass(frozen=True)
class AffineForm:
    A: np.ndarray
    xi: np.ndarray
    residual: float
    orthogonality_defect: float

    def apply(self, x: np.ndarray) -> np.ndarray:
        return x @ self.A.T + self.xi


def affine_form(sigma: Sequence[int], emb: EmbeddedSpace) -> AffineForm:
    """Recover x -> A x + xi from the action of an isometry on the embedded points.

    The linear part is fitted on the difference vectors from the basepoint
    (least squares when they are overdetermined); xi is then fixed by the
    basepoint's image.
    """
    space = emb.space
    sigma = _check_perm(sigma, space.n)
    if not is_isometry(sigma, space):
        raise PreconditionError(f"{list(sigma)} is not an isometry of the space")
    X = emb.coords
    b = emb.basepoint
    r = emb.rank
    if r == 0:
        A = np.zeros((0, 0))
        xi = np.zeros(0)
        return AffineForm(A, xi, 0.0, 0.0)
    Y = X - X[b]
    Z = X[list(sigma)] - X[sigma[b]]
    At, *_ = np.linalg.lstsq(Y, Z, rcond=None)
    A = At.T
    xi = X[sigma[b]] - A @ X[b]
    residual = float(np.max(np.abs(X @ A.T + xi - X[list(sigma)])))
    defect = float(np.max(np.abs(A.T @ A - np.eye(r))))
    return AffineForm(A, xi, residual, defect)
