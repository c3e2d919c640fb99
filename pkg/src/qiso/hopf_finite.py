"""The commutative Hopf *-algebra C(G) of a finite permutation group, in exact arithmetic.

Elements of C(G) are vectors of Fractions indexed by ``group.elements``
(the coefficients on the delta functions). Group multiplication is
composition with the right factor applied first: (hk)(y) = h(k(y)).
"""
from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

from .classical_iso import PermGroup, compose, identity, inverse
from .errors import StructuralError
from .magic_unitary import MagicUnitaryRep
from .metric_space import FiniteMetricSpace

__all__ = [
    "FiniteGroupHopf",
    "HopfAxioms",
    "build_hopf",
    "KacReport",
    "check_kac",
    "GroupAction",
    "ActionAxioms",
    "FormulaReport",
    "check_isometry_formula",
    "check_measure_preserving_action",
    "to_rep",
]

Vec = tuple[Fraction, ...]


@dataclass(frozen=True)
class HopfAxioms:
    coassociativity: bool
    counit: bool
    antipode: bool
    haar_left: bool
    haar_right: bool

    @property
    def ok(self) -> bool:
        return all((self.coassociativity, self.counit, self.antipode, self.haar_left, self.haar_right))

    def to_json(self) -> dict:
        return {"coassociativity": self.coassociativity, "counit": self.counit, "antipode": self.antipode,
                "haar_left": self.haar_left, "haar_right": self.haar_right}


@dataclass(frozen=True)
class FiniteGroupHopf:
    """Structure maps of C(G) on the delta basis.

    ``coproduct[g]`` lists the pairs (h, k) of element indices with hk = g,
    ``antipode_map[g]`` is the index of g^-1 and ``unit_index`` that of e.
    """

    group: PermGroup
    coproduct: tuple[tuple[tuple[int, int], ...], ...]
    antipode_map: tuple[int, ...]
    unit_index: int
    axioms: HopfAxioms | None = field(default=None, compare=False)

    @property
    def dim(self) -> int:
        return self.group.order

    def basis(self, g: int) -> Vec:
        return tuple(Fraction(int(i == g)) for i in range(self.dim))

    def one(self) -> Vec:
        return (Fraction(1),) * self.dim

    def multiply(self, a: Vec, b: Vec) -> Vec:
        return tuple(x * y for x, y in zip(a, b))

    def star(self, a: Vec) -> Vec:
        return tuple(Fraction(x).conjugate() for x in a)

    def counit(self, a: Vec) -> Fraction:
        return a[self.unit_index]

    def antipode(self, a: Vec) -> Vec:
        out = [Fraction(0)] * self.dim
        for g, coeff in enumerate(a):
            out[self.antipode_map[g]] += coeff
        return tuple(out)

    def haar(self, a: Vec) -> Fraction:
        return sum(a, Fraction(0)) / self.dim

    def comultiply(self, a: Vec) -> dict[tuple[int, int], Fraction]:
        """Delta(a) as a sparse tensor {(h, k): coefficient}."""
        out: dict[tuple[int, int], Fraction] = {}
        for g, coeff in enumerate(a):
            if coeff:
                for hk in self.coproduct[g]:
                    out[hk] = out.get(hk, Fraction(0)) + coeff
        return out

    # (id (x) phi) and (phi (x) id) applied to a sparse 2-tensor
    def _slice_right(self, tensor, functional) -> Vec:
        vals = [functional(self.basis(k)) for k in range(self.dim)]
        out = [Fraction(0)] * self.dim
        for (h, k), c in tensor.items():
            out[h] += c * vals[k]
        return tuple(out)

    def _slice_left(self, tensor, functional) -> Vec:
        vals = [functional(self.basis(h)) for h in range(self.dim)]
        out = [Fraction(0)] * self.dim
        for (h, k), c in tensor.items():
            out[k] += c * vals[h]
        return tuple(out)

    def verify(self) -> HopfAxioms:
        """Exhaustive exact check of the Hopf and Haar axioms on the delta basis."""
        N = self.dim
        cop = self.coproduct
        left: Counter = Counter()
        right: Counter = Counter()
        for g in range(N):
            for h, k in cop[g]:
                for a, b in cop[h]:          # (Delta (x) id) Delta
                    left[(g, a, b, k)] += 1
                for b, c in cop[k]:          # (id (x) Delta) Delta
                    right[(g, h, b, c)] += 1
        coassoc = left == right
        eps = [self.counit(self.basis(g)) for g in range(N)]
        haar = [self.haar(self.basis(g)) for g in range(N)]
        counit_ok = antipode_ok = haar_l = haar_r = True
        for g in range(N):
            delta_g = self.basis(g)
            unit = tuple(eps[g] * x for x in self.one())
            average = tuple(haar[g] * x for x in self.one())
            eps_id = [Fraction(0)] * N      # (eps (x) id) Delta
            id_eps = [Fraction(0)] * N      # (id (x) eps) Delta
            s_id = [Fraction(0)] * N        # m (kappa (x) id) Delta
            id_s = [Fraction(0)] * N        # m (id (x) kappa) Delta
            id_h = [Fraction(0)] * N        # (id (x) h) Delta
            h_id = [Fraction(0)] * N        # (h (x) id) Delta
            for h, k in cop[g]:
                eps_id[k] += eps[h]
                id_eps[h] += eps[k]
                if self.antipode_map[h] == k:   # delta_{h^-1} delta_k
                    s_id[k] += 1
                if self.antipode_map[k] == h:
                    id_s[h] += 1
                id_h[h] += haar[k]
                h_id[k] += haar[h]
            counit_ok &= tuple(eps_id) == delta_g and tuple(id_eps) == delta_g
            antipode_ok &= tuple(s_id) == unit and tuple(id_s) == unit
            haar_l &= tuple(id_h) == average
            haar_r &= tuple(h_id) == average
        return HopfAxioms(coassoc, counit_ok, antipode_ok, haar_l, haar_r)


def build_hopf(group: PermGroup, verify: bool = True) -> FiniteGroupHopf:
    bad = group.axiom_failures()
    if bad:
        raise StructuralError("element set is not a group: " + ", ".join(bad))
    pos = {g: i for i, g in enumerate(group.elements)}
    N = group.order
    cop: list[list[tuple[int, int]]] = [[] for _ in range(N)]
    for hi, h in enumerate(group.elements):
        for ki, k in enumerate(group.elements):
            cop[pos[compose(h, k)]].append((hi, ki))
    anti = tuple(pos[inverse(g)] for g in group.elements)
    hopf = FiniteGroupHopf(group, tuple(tuple(c) for c in cop), anti, pos[identity(group.n)])
    if verify:
        axioms = hopf.verify()
        if not axioms.ok:
            raise StructuralError(f"Hopf axioms fail: {axioms}")
        object.__setattr__(hopf, "axioms", axioms)
    return hopf


@dataclass(frozen=True)
class KacReport:
    tracial: bool
    antipode_involutive: bool
    pairs_checked: int

    @property
    def biconditional(self) -> bool:
        """Haar state tracial iff kappa^2 = id."""
        return self.tracial == self.antipode_involutive

    @property
    def kac(self) -> bool:
        return self.tracial and self.antipode_involutive


def check_kac(hopf: FiniteGroupHopf) -> KacReport:
    N = hopf.dim
    basis = [hopf.basis(g) for g in range(N)]
    tracial = all(hopf.haar(hopf.multiply(a, b)) == hopf.haar(hopf.multiply(b, a)) for a in basis for b in basis)
    involutive = all(hopf.antipode(hopf.antipode(a)) == a for a in basis)
    report = KacReport(tracial, involutive, N * N)
    assert report.biconditional
    return report


@dataclass(frozen=True)
class ActionAxioms:
    homomorphism: bool
    unital: bool
    star: bool
    coassociativity: bool
    counit: bool
    density: bool

    @property
    def ok(self) -> bool:
        return all(vars(self).values())

    def to_json(self) -> dict:
        return dict(vars(self))


class GroupAction:
    """beta(e_y) = sum_x e_x (x) t[x][y], with t[x][y] the indicator of {g : g y = x}."""

    def __init__(self, hopf: FiniteGroupHopf, n: int):
        if hopf.group.n != n:
            raise StructuralError(f"group acts on {hopf.group.n} points, space has {n}")
        self.hopf = hopf
        self.n = n
        elems = hopf.group.elements
        self.t: tuple[tuple[Vec, ...], ...] = tuple(
            tuple(tuple(Fraction(int(g[y] == x)) for g in elems) for y in range(n)) for x in range(n))

    def coaction(self, f: Sequence) -> dict[int, Vec]:
        """beta(f) for f in C(X), as {x: coefficient vector in C(G)}."""
        N = self.hopf.dim
        out = {}
        for x in range(self.n):
            acc = [Fraction(0)] * N
            for y in range(self.n):
                if f[y]:
                    acc = [a + Fraction(f[y]) * b for a, b in zip(acc, self.t[x][y])]
            out[x] = tuple(acc)
        return out

    def verify(self) -> ActionAxioms:
        h, n, t = self.hopf, self.n, self.t
        N = h.dim
        zero = (Fraction(0),) * N
        hom = all(h.multiply(t[x][y], t[x][z]) == (t[x][y] if y == z else zero)
                  for x in range(n) for y in range(n) for z in range(n))
        unital = all(tuple(sum(col, Fraction(0)) for col in zip(*t[x])) == h.one() for x in range(n))
        star = all(h.star(t[x][y]) == t[x][y] for x in range(n) for y in range(n))
        coassoc = True
        for y in range(n):
            for z in range(n):
                # (beta (x) id) beta(e_y) at e_z: sum_x t[z][x] (x) t[x][y]
                lhs: dict[tuple[int, int], Fraction] = {}
                for x in range(n):
                    for a, ca in enumerate(t[z][x]):
                        if ca:
                            for b, cb in enumerate(t[x][y]):
                                if cb:
                                    lhs[(a, b)] = lhs.get((a, b), Fraction(0)) + ca * cb
                rhs = {key: c for key, c in h.comultiply(t[z][y]).items() if c}
                coassoc &= lhs == rhs
        counit = all(h.counit(t[x][y]) == int(x == y) for x in range(n) for y in range(n))
        # span of beta(e_y)(1 (x) delta_g) = e_{g y} (x) delta_g must be all of C(X) (x) C(G)
        covered = {(g[y], gi) for gi, g in enumerate(h.group.elements) for y in range(n)}
        density = len(covered) == n * N
        return ActionAxioms(hom, unital, star, coassoc, counit, density)


def to_rep(action: GroupAction, g: Sequence[int]) -> MagicUnitaryRep:
    """Evaluate the matrix coefficients t[x][y] at the group element g."""
    gi = action.hopf.group.index(tuple(g))
    n = action.n
    rep = [[[[action.t[x][y][gi]]] for y in range(n)] for x in range(n)]
    return MagicUnitaryRep.from_exact(rep)


@dataclass(frozen=True)
class FormulaReport:
    deviation: float
    exact_zero: bool
    classical_identity_deviation: float
    triples: int


def _sqrt_combination(counter: Counter) -> float:
    return sum(float(c) * math.sqrt(d2) for d2, c in counter.items())


def check_isometry_formula(action: GroupAction, space: FiniteMetricSpace) -> FormulaReport:
    """Both sides of (id (x) beta)(d) = sigma_23 ((id (x) kappa) beta (x) id)(d) on X x X x G.

    As functions of (a, b, g) the sides are
        lhs = sum_y d(a, y) t[b][y](g),   rhs = sum_x d(x, b) kappa(t[a][x])(g).
    For a permutation group each side is a single distance, d(a, g^-1 b)
    and d(g a, b), so comparing the squared-distance classes decides
    equality exactly; the float deviation is reported otherwise.
    The classical identity d(x, g y) = d(y, g^-1 x) is cross-checked as well.
    """
    if action.n != space.n:
        raise StructuralError("action and space sizes differ")
    h = action.hopf
    n, t, sq = space.n, action.t, space.sqdist
    kt = [[h.antipode(t[x][y]) for y in range(n)] for x in range(n)]
    dev = 0.0
    all_zero = True
    for a in range(n):
        for b in range(n):
            for gi in range(h.dim):
                lhs: Counter = Counter()
                rhs: Counter = Counter()
                for y in range(n):
                    if t[b][y][gi]:
                        lhs[sq[a][y]] += t[b][y][gi]
                for x in range(n):
                    if kt[a][x][gi]:
                        rhs[sq[x][b]] += kt[a][x][gi]
                lhs = {k: v for k, v in lhs.items() if v}
                rhs = {k: v for k, v in rhs.items() if v}
                if lhs != rhs:
                    all_zero = False
                    dev = max(dev, abs(_sqrt_combination(lhs) - _sqrt_combination(rhs)))
    classical = 0.0
    D = space.distance_matrix()
    for g in h.group.elements:
        gi = inverse(g)
        for x in range(n):
            for y in range(n):
                if sq[x][g[y]] != sq[y][gi[x]]:
                    classical = max(classical, float(abs(D[x, g[y]] - D[y, gi[x]])))
    return FormulaReport(dev, all_zero, classical, n * n * h.dim)


def check_measure_preserving_action(action: GroupAction, measure: Sequence[Fraction]) -> Fraction:
    """max over y and g of |(phi (x) id) beta(e_y) - phi(e_y) 1|, exact."""
    h, n, t = action.hopf, action.n, action.t
    worst = Fraction(0)
    for y in range(n):
        lhs = [sum((Fraction(measure[x]) * t[x][y][g] for x in range(n)), Fraction(0)) for g in range(h.dim)]
        worst = max(worst, max(abs(v - Fraction(measure[y])) for v in lhs))
    return worst
