"""Finite metric measure spaces with exact rational squared distances."""
from __future__ import annotations

import itertools
import json
import math
import re
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Sequence

import numpy as np

from .errors import InvalidSpaceError, StructuralError

__all__ = [
    "FiniteMetricSpace",
    "Violation",
    "ValidationReport",
    "to_fraction",
    "validate",
    "require_valid",
    "from_coordinates",
    "standard_space",
    "parse_standard_name",
    "STANDARD_CORPUS",
    "load_space",
    "loads_space",
    "space_to_json",
]

_RATIONAL = re.compile(r"^\s*[+-]?\d+(\s*/\s*\d+)?\s*$")


def to_fraction(value) -> Fraction:
    """Exact rational from an int, Fraction or ``"p/q"`` string. Floats are refused."""
    if isinstance(value, bool):
        raise StructuralError(f"boolean is not a rational: {value!r}")
    if isinstance(value, (int, Fraction)):
        return Fraction(value)
    if isinstance(value, str) and _RATIONAL.match(value):
        try:
            return Fraction(value.replace(" ", ""))
        except ZeroDivisionError as exc:
            raise StructuralError(f"zero denominator in {value!r}") from exc
    raise StructuralError(f"expected an exact rational ('p/q' string or integer), got {value!r}")


def _exact_sqrt(q: Fraction) -> Fraction | None:
    if q < 0:
        return None
    a, b = math.isqrt(q.numerator), math.isqrt(q.denominator)
    if a * a == q.numerator and b * b == q.denominator:
        return Fraction(a, b)
    return None


@dataclass(frozen=True)
class FiniteMetricSpace:
    """n labelled points, exact squared distances and a probability measure.

    Construction only checks shapes; use :func:`validate` for the metric
    and measure axioms.
    """

    sqdist: tuple[tuple[Fraction, ...], ...]
    labels: tuple[str, ...] = ()
    measure: tuple[Fraction, ...] = ()
    _dist: np.ndarray | None = field(default=None, init=False, repr=False, compare=False)
    _classes: tuple | None = field(default=None, init=False, repr=False, compare=False)

    def __post_init__(self):
        rows = tuple(tuple(to_fraction(v) for v in row) for row in self.sqdist)
        n = len(rows)
        if n < 1:
            raise StructuralError("a metric space needs at least one point")
        for i, row in enumerate(rows):
            if len(row) != n:
                raise StructuralError(f"row {i} of squared_distances has length {len(row)}, expected {n}")
        labels = tuple(self.labels) if self.labels else tuple(f"x{i}" for i in range(n))
        if len(labels) != n:
            raise StructuralError(f"{len(labels)} labels for {n} points")
        if len(set(labels)) != n:
            raise StructuralError("labels must be distinct")
        measure = tuple(to_fraction(w) for w in self.measure) if self.measure else (Fraction(1, n),) * n
        if len(measure) != n:
            raise StructuralError(f"measure has {len(measure)} entries for {n} points")
        object.__setattr__(self, "sqdist", rows)
        object.__setattr__(self, "labels", tuple(str(s) for s in labels))
        object.__setattr__(self, "measure", measure)

    @property
    def n(self) -> int:
        return len(self.sqdist)

    def d2(self, i: int, j: int) -> Fraction:
        return self.sqdist[i][j]

    def distance(self, i: int, j: int) -> float:
        root = _exact_sqrt(self.sqdist[i][j])
        return float(root) if root is not None else math.sqrt(self.sqdist[i][j])

    def distance_matrix(self) -> np.ndarray:
        """Floating distances; exact whenever the squared distance is a rational square."""
        if self._dist is None:
            n = self.n
            dist = np.array([[self.distance(i, j) for j in range(n)] for i in range(n)], dtype=float)
            dist.setflags(write=False)
            object.__setattr__(self, "_dist", dist)
        return self._dist

    def distance_classes(self) -> list[Fraction]:
        """Distinct positive squared distances, sorted."""
        return sorted({v for row in self.sqdist for v in row if v != 0})

    def class_indicators(self) -> tuple[tuple[Fraction, np.ndarray], ...]:
        """(squared distance, 0/1 indicator matrix) for each distinct positive squared distance."""
        if self._classes is None:
            out = tuple((delta, np.array([[int(v == delta) for v in row] for row in self.sqdist], dtype=np.int64))
                        for delta in self.distance_classes())
            for _, a in out:
                a.setflags(write=False)
            object.__setattr__(self, "_classes", out)
        return self._classes

    def distance_profile(self, i: int) -> tuple[Fraction, ...]:
        return tuple(sorted(self.sqdist[i]))

    def with_measure(self, measure: Sequence) -> "FiniteMetricSpace":
        return FiniteMetricSpace(self.sqdist, self.labels, tuple(measure))

    def is_uniform(self) -> bool:
        return len(set(self.measure)) == 1


@dataclass(frozen=True)
class Violation:
    axiom: str
    indices: tuple[int, ...]
    detail: str = ""

    def __str__(self):
        return f"{self.axiom} at {list(self.indices)}" + (f" ({self.detail})" if self.detail else "")

    def to_json(self) -> dict:
        return {"axiom": self.axiom, "indices": list(self.indices), "detail": self.detail}


@dataclass(frozen=True)
class ValidationReport:
    violations: tuple[Violation, ...]

    @property
    def ok(self) -> bool:
        return not self.violations

    def axioms(self) -> set[str]:
        return {v.axiom for v in self.violations}

    def to_json(self) -> dict:
        return {"valid": self.ok, "violations": [v.to_json() for v in self.violations]}


def _triangle_holds(a: Fraction, b: Fraction, c: Fraction) -> bool:
    """Decide sqrt(c) <= sqrt(a) + sqrt(b) exactly for nonnegative rationals."""
    if c <= a + b:
        return True
    excess = c - a - b
    return excess * excess <= 4 * a * b


def validate(space: FiniteMetricSpace) -> ValidationReport:
    n, sq = space.n, space.sqdist
    out: list[Violation] = []
    for i in range(n):
        if sq[i][i] != 0:
            out.append(Violation("zero_diagonal", (i,), f"sqdist={sq[i][i]}"))
    for i, j in itertools.combinations(range(n), 2):
        if sq[i][j] != sq[j][i]:
            out.append(Violation("symmetry", (i, j), f"{sq[i][j]} != {sq[j][i]}"))
        if sq[i][j] <= 0 or sq[j][i] <= 0:
            out.append(Violation("faithfulness", (i, j), f"sqdist={sq[i][j]}"))
    for i in range(n):
        for j in range(n):
            if sq[i][j] < 0:
                out.append(Violation("nonnegativity", (i, j), f"sqdist={sq[i][j]}"))
    if not any(v.axiom == "nonnegativity" for v in out):
        for i, j, k in itertools.permutations(range(n), 3):
            if i < k and not _triangle_holds(sq[i][j], sq[j][k], sq[i][k]):
                out.append(Violation("triangle", (i, j, k), f"d({i},{k}) > d({i},{j}) + d({j},{k})"))
    for i, w in enumerate(space.measure):
        if w <= 0:
            out.append(Violation("measure_positivity", (i,), f"weight={w}"))
    total = sum(space.measure, Fraction(0))
    if total != 1:
        out.append(Violation("measure_normalization", (), f"sum={total}"))
    return ValidationReport(tuple(out))


def require_valid(space: FiniteMetricSpace) -> None:
    report = validate(space)
    if not report.ok:
        raise InvalidSpaceError(report)


def from_coordinates(coords: Iterable[Sequence], measure: Sequence | None = None,
                     labels: Sequence[str] | None = None) -> FiniteMetricSpace:
    pts = [tuple(to_fraction(c) for c in p) for p in coords]
    if not pts:
        raise StructuralError("no coordinates given")
    if len({len(p) for p in pts}) != 1:
        raise StructuralError("coordinate vectors have different lengths")
    seen: dict[tuple, int] = {}
    for i, p in enumerate(pts):
        if p in seen:
            raise InvalidSpaceError(ValidationReport((Violation("faithfulness", (seen[p], i), "duplicate point"),)))
        seen[p] = i
    sq = tuple(tuple(sum(((a - b) ** 2 for a, b in zip(p, q)), Fraction(0)) for q in pts) for p in pts)
    return FiniteMetricSpace(sq, tuple(labels or ()), tuple(measure or ()))


def _simplex(m: int) -> FiniteMetricSpace:
    n = m + 1
    return FiniteMetricSpace(tuple(tuple(Fraction(int(i != j)) for j in range(n)) for i in range(n)))


def _rectangle(a2, b2) -> FiniteMetricSpace:
    a2, b2 = to_fraction(a2), to_fraction(b2)
    if a2 <= 0 or b2 <= 0:
        raise StructuralError("rectangle side lengths must be positive")
    # vertices in cyclic order: sides 0-1 and 2-3 have a2, sides 1-2 and 3-0 have b2
    z = Fraction(0)
    diag = a2 + b2
    return FiniteMetricSpace((
        (z, a2, diag, b2),
        (a2, z, b2, diag),
        (diag, b2, z, a2),
        (b2, diag, a2, z),
    ))


def _hypercube(m: int) -> FiniteMetricSpace:
    return from_coordinates(itertools.product((0, 1), repeat=m),
                            labels=["".join(map(str, v)) for v in itertools.product((0, 1), repeat=m)])


def _cycle_graph(m: int) -> FiniteMetricSpace:
    return FiniteMetricSpace(tuple(
        tuple(Fraction(min(abs(i - j), m - abs(i - j)) ** 2) for j in range(m)) for i in range(m)))


def standard_space(name: str, *params) -> FiniteMetricSpace:
    """Built-in test spaces with uniform measure.

    ``simplex(m)``, ``rectangle(a2, b2)``, ``square``, ``hypercube(m)``,
    ``cycle_graph(m)``.
    """
    if name == "square":
        if params:
            raise StructuralError("square takes no parameters")
        return from_coordinates([(0, 0), (1, 0), (1, 1), (0, 1)])
    if name == "rectangle":
        if len(params) != 2:
            raise StructuralError("rectangle takes two squared side lengths")
        return _rectangle(*params)
    builders = {"simplex": _simplex, "hypercube": _hypercube, "cycle_graph": _cycle_graph}
    if name not in builders:
        raise StructuralError(f"unknown standard space {name!r}")
    if len(params) != 1:
        raise StructuralError(f"{name} takes exactly one integer parameter")
    m = params[0]
    if not isinstance(m, int) or isinstance(m, bool) or m < 1:
        raise StructuralError(f"{name} needs an integer parameter >= 1, got {m!r}")
    return builders[name](m)


def parse_standard_name(spec: str) -> FiniteMetricSpace:
    """Parse strings such as ``"square"``, ``"simplex(3)"`` or ``"rectangle(1,4)"``."""
    m = re.fullmatch(r"\s*(\w+)\s*(?:\((.*)\))?\s*", spec)
    if not m:
        raise StructuralError(f"cannot parse standard space {spec!r}")
    name, args = m.group(1), m.group(2)
    params: list = []
    if args:
        for tok in args.split(","):
            tok = tok.strip()
            params.append(int(tok) if re.fullmatch(r"[+-]?\d+", tok) else to_fraction(tok))
    if name == "rectangle":
        params = [to_fraction(p) for p in params]
    return standard_space(name, *params)


STANDARD_CORPUS = (
    "simplex(2)",
    "simplex(3)",
    "simplex(4)",
    "square",
    "rectangle(1,4)",
    "hypercube(3)",
    "cycle_graph(4)",
    "cycle_graph(5)",
)


def _parse_document(doc) -> FiniteMetricSpace:
    if not isinstance(doc, dict):
        raise StructuralError("top-level JSON value must be an object")
    has_sq, has_coords = "squared_distances" in doc, "coords" in doc
    if has_sq == has_coords:
        raise StructuralError("exactly one of 'squared_distances' and 'coords' must be present")
    unknown = set(doc) - {"labels", "squared_distances", "coords", "measure"}
    if unknown:
        raise StructuralError(f"unknown keys: {sorted(unknown)}")
    measure = doc.get("measure")
    labels = doc.get("labels")
    if labels is not None and not all(isinstance(s, str) for s in labels):
        raise StructuralError("labels must be strings")
    if has_coords:
        return from_coordinates(doc["coords"], measure, labels)
    rows = doc["squared_distances"]
    if not isinstance(rows, list) or not all(isinstance(r, list) for r in rows):
        raise StructuralError("'squared_distances' must be a list of lists")
    return FiniteMetricSpace(tuple(tuple(r) for r in rows), tuple(labels or ()), tuple(measure or ()))


def loads_space(text: str) -> FiniteMetricSpace:
    """Parse the JSON input format. Raises ``json.JSONDecodeError`` on malformed text."""
    return _parse_document(json.loads(text))


def load_space(path) -> FiniteMetricSpace:
    with open(path, encoding="utf-8") as fh:
        return loads_space(fh.read())


def space_to_json(space: FiniteMetricSpace) -> dict:
    return {
        "labels": list(space.labels),
        "squared_distances": [[str(v) for v in row] for row in space.sqdist],
        "measure": [str(w) for w in space.measure],
    }
