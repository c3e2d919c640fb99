"""Canonical JSON output and the one-shot report pipeline."""
from __future__ import annotations

import hashlib
import itertools
import json
import math
from fractions import Fraction

import numpy as np

from . import __version__
from .classical_iso import identity, is_isometry, isometry_group, isometry_group_order, mu_preserving_subgroup
from .euclidean_embed import embed, embeddability
from .filtration import DROP_TOL, build_filtration, check_preserved_classical, check_preserved_quantum
from .magic_unitary import (DEFAULT_MAX_OPERATOR_DIM, DEFAULT_TOL, ISOMETRY_CONDITIONS, check_all,
                            from_permutation, quantum_certificate)
from .metric_space import FiniteMetricSpace, parse_standard_name, space_to_json, validate

__all__ = ["dumps_canonical", "EMBED_REL_TOL", "report_bundle", "corpus_table", "rep_corpus"]

EMBED_REL_TOL = 1e-9
# larger groups are represented by a strong generating set in the report
EXPLICIT_GROUP_LIMIT = 5040


def _encode(obj) -> str:
    if obj is None or isinstance(obj, bool):
        return json.dumps(obj)
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    if isinstance(obj, (float, np.floating)):
        x = float(obj)
        if not math.isfinite(x):
            return "null"
        if x == 0:
            return "0.0"
        return format(x, ".17g")
    if isinstance(obj, Fraction):
        return json.dumps(str(obj))
    if isinstance(obj, str):
        return json.dumps(obj, ensure_ascii=False)
    if isinstance(obj, dict):
        items = sorted((str(k), v) for k, v in obj.items())
        return "{" + ",".join(json.dumps(k, ensure_ascii=False) + ":" + _encode(v) for k, v in items) + "}"
    if isinstance(obj, (list, tuple)):
        return "[" + ",".join(_encode(v) for v in obj) + "]"
    if isinstance(obj, np.ndarray):
        return _encode(obj.tolist())
    raise TypeError(f"cannot encode {type(obj).__name__}")


def dumps_canonical(obj) -> str:
    """Sorted keys, no whitespace, floats with 17 significant digits, Fractions as 'p/q' strings."""
    return _encode(obj)


def _first_non_isometry(space: FiniteMetricSpace, order: int):
    if order == math.factorial(space.n):
        return None
    return next(p for p in itertools.permutations(range(space.n)) if not is_isometry(p, space))


def rep_corpus(space: FiniteMetricSpace, elements=None, certificate=None):
    """(name, rep, expected_isometric) for the given isometries (default: all), the certificate and one negative."""
    if elements is None:
        elements = isometry_group(space).elements
        order = len(elements)
    else:
        order = isometry_group_order(space)[0]
    out = [(f"perm:{list(g)}", from_permutation(g), True) for g in elements]
    if certificate is not None:
        out.append((f"certificate:{[list(p) for p in certificate.pairs]}", certificate.rep, True))
    neg = _first_non_isometry(space, order)
    if neg is not None:
        out.append((f"negative:perm:{list(neg)}", from_permutation(neg), False))
    return out


def _equivalence(space, elements, cert, tol, max_operator_dim):
    rows = []
    for name, rep, expected in rep_corpus(space, elements, cert):
        rep_report = check_all(rep, space, tol, max_operator_dim)
        rows.append({
            "rep": name,
            "k": rep.k,
            "expected_isometric": expected,
            "verdicts": {c: rep_report.isometry_checks()[c].ok for c in ISOMETRY_CONDITIONS},
            "deviations": {c: rep_report.isometry_checks()[c].deviation for c in ISOMETRY_CONDITIONS},
            "agree": rep_report.conditions_agree,
            "magic": rep_report.magic.ok,
        })
    return {"tol": tol, "reps": rows, "all_agree": all(r["agree"] for r in rows),
            "count": len(rows)}


def report_bundle(space: FiniteMetricSpace, tol: float = DEFAULT_TOL,
                  max_operator_dim: int = DEFAULT_MAX_OPERATOR_DIM, basepoint: int = 0) -> dict:
    canonical_space = space_to_json(space)
    digest = hashlib.sha256(dumps_canonical(canonical_space).encode()).hexdigest()
    bundle: dict = {
        "tool": {"name": "qiso", "version": __version__},
        "input": {"sha256": digest, "space": canonical_space},
        "tolerances": {"tol": tol, "embed_rel": EMBED_REL_TOL, "filtration_drop": DROP_TOL,
                       "max_operator_dim": max_operator_dim},
    }
    val = validate(space)
    bundle["validation"] = val.to_json()
    if not val.ok:
        return bundle

    verdict = embeddability(space, basepoint)
    bundle["embeddability"] = {"embeddable": verdict.embeddable, "rank": verdict.rank, "basepoint": basepoint,
                               "witness": verdict.witness.to_json() if verdict.witness else None}

    order, strong_gens = isometry_group_order(space)
    mu_order, mu_strong_gens = isometry_group_order(space, respect_measure=True)
    explicit = order <= EXPLICIT_GROUP_LIMIT
    if explicit:
        group = isometry_group(space)
        assert group.order == order
        elements, generators = group.elements, group.generators
        mu_elements = mu_preserving_subgroup(group, space).elements
    else:
        elements = generators = strong_gens
        elements = (identity(space.n),) + elements
        mu_elements = (identity(space.n),) + mu_strong_gens
    bundle["classical"] = {"order": order, "mu_preserving_order": mu_order,
                           "generators": [list(g) for g in generators],
                           "checked": "all_elements" if explicit else "strong_generators"}

    cert = quantum_certificate(space)
    bundle["quantum_certificate"] = {
        "certificate": cert is not None,
        "twin_pairs": [list(p) for p in cert.pairs] if cert else None,
        "witness_norm": cert.witness_norm if cert else None,
        "witness_norm_float": float(cert.witness_norm) if cert else None,
    }

    if verdict.embeddable:
        emb = embed(space, basepoint)
        sq = np.array([[float(v) for v in row] for row in space.sqdist])
        err = np.abs(emb.float_sqdist() - sq) / np.where(sq > 0, sq, 1.0)
        filt = build_filtration(emb)
        classical_dev = max(check_preserved_classical(g, filt, emb).deviation for g in mu_elements)
        quantum_dev = check_preserved_quantum(cert.rep, filt, emb, tol).deviation if cert else None
        bundle["embeddability"]["max_rel_sqdist_error"] = float(err.max())
        bundle["filtration"] = {
            "dims": filt.dims,
            "degrees": list(filt.degrees),
            "orthonormality_defect": filt.orthonormality_defect(),
            "preserved": {"classical_max_deviation": classical_dev, "quantum_max_deviation": quantum_dev,
                          "tol": tol},
        }
    else:
        bundle["filtration"] = None

    bundle["equivalence"] = _equivalence(space, elements, cert, tol, max_operator_dim)
    return bundle


def corpus_table(tol: float = DEFAULT_TOL, max_operator_dim: int = DEFAULT_MAX_OPERATOR_DIM,
                 names=None) -> dict:
    from .metric_space import STANDARD_CORPUS
    rows = []
    for name in names or STANDARD_CORPUS:
        b = report_bundle(parse_standard_name(name), tol, max_operator_dim)
        rows.append({
            "space": name,
            "n": len(b["input"]["space"]["labels"]),
            "valid": b["validation"]["valid"],
            "embeddable": b["embeddability"]["embeddable"],
            "rank": b["embeddability"]["rank"],
            "order": b["classical"]["order"],
            "mu_preserving_order": b["classical"]["mu_preserving_order"],
            "certificate": b["quantum_certificate"]["certificate"],
            "dims": b["filtration"]["dims"] if b["filtration"] else None,
            "conditions_agree": b["equivalence"]["all_agree"],
        })
    return {"tool": {"name": "qiso", "version": __version__}, "tol": tol, "corpus": rows}
