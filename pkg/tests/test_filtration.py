import itertools

import numpy as np
import pytest

from qiso.classical_iso import isometry_group, mu_preserving_subgroup
from qiso.errors import NotEmbeddableError
from qiso.euclidean_embed import embed
from qiso.filtration import build_filtration, check_preserved_classical, check_preserved_quantum
from qiso.magic_unitary import from_permutation, quantum_certificate
from qiso.metric_space import STANDARD_CORPUS, from_coordinates, parse_standard_name

NATURAL = {
    "square": [(0, 0), (1, 0), (1, 1), (0, 1)],
    "hypercube(3)": list(itertools.product((0, 1), repeat=3)),
    "rectangle(1,4)": [(0, 0), (1, 0), (1, 2), (0, 2)],
}


def rank_oracle_dims(coords):
    """dims from ranks of monomial tables in independently chosen coordinates."""
    X = np.asarray(coords, dtype=float)
    X = X - X.mean(axis=0)
    n, r = X.shape
    dims, prev, cols = [], 0, []
    for deg in range(n):
        for mono in itertools.combinations_with_replacement(range(r), deg):
            cols.append(np.prod(X[:, list(mono)], axis=1) if mono else np.ones(n))
        rank = np.linalg.matrix_rank(np.column_stack(cols))
        if rank > prev:
            dims.append(rank - prev)
        prev = rank
        if rank == n:
            break
    return dims


@pytest.mark.parametrize("name, dims", [
    ("square", [1, 2, 1]), ("simplex(2)", [1, 2]), ("simplex(3)", [1, 3]), ("hypercube(3)", [1, 3, 3, 1]),
    ("rectangle(1,4)", [1, 2, 1]), ("hypercube(4)", [1, 4, 6, 4, 1]),
])
def test_known_dims(name, dims):
    assert build_filtration(embed(parse_standard_name(name))).dims == dims


@pytest.mark.parametrize("name", sorted(NATURAL))
def test_dims_match_rank_oracle(name):
    assert build_filtration(embed(parse_standard_name(name))).dims == rank_oracle_dims(NATURAL[name])


def test_dims_on_random_point_sets():
    rng = np.random.default_rng(7)
    for _ in range(10):
        pts = {tuple(int(v) for v in rng.integers(-3, 4, size=2)) for _ in range(6)}
        pts = sorted(pts)
        space = from_coordinates(pts)
        assert build_filtration(embed(space)).dims == rank_oracle_dims(pts)


def test_levels_complete_and_orthonormal(spaces):
    for name in STANDARD_CORPUS:
        space = spaces[name]
        try:
            emb = embed(space)
        except NotEmbeddableError:
            continue
        filt = build_filtration(emb)
        assert sum(filt.dims) == space.n
        assert filt.orthonormality_defect() <= 1e-10
        total = sum(filt.projector(m) for m in range(len(filt.levels)))
        assert np.allclose(total, np.eye(space.n), atol=1e-10)


def test_weighted_inner_product_is_used():
    space = parse_standard_name("square").with_measure(["1/3", "1/6", "1/3", "1/6"])
    filt = build_filtration(embed(space))
    assert filt.orthonormality_defect() <= 1e-10
    B = np.hstack(filt.levels)
    # plain (unweighted) orthonormality fails for a non-uniform measure
    assert np.max(np.abs(B.T @ B - np.eye(4))) > 1e-3


@pytest.mark.parametrize("name", ["simplex(2)", "simplex(3)", "square", "rectangle(1,4)", "hypercube(3)"])
def test_classical_isometries_preserve_every_level(name):
    space = parse_standard_name(name)
    emb = embed(space)
    filt = build_filtration(emb)
    for g in isometry_group(space):
        pres = check_preserved_classical(g, filt, emb)
        assert pres.precondition_ok and pres.ok(1e-10), (g, pres.per_level)


def test_weighted_square_mu_preserving_subgroup():
    space = parse_standard_name("square").with_measure(["1/3", "1/6", "1/3", "1/6"])
    emb = embed(space)
    filt = build_filtration(emb)
    group = isometry_group(space)
    sub = mu_preserving_subgroup(group, space)
    assert sub.order == 4
    for g in sub:
        assert check_preserved_classical(g, filt, emb).ok(1e-10)
    outside = [g for g in group if g not in sub]
    devs = [check_preserved_classical(g, filt, emb) for g in outside]
    assert all(not d.precondition_ok for d in devs)
    assert max(d.deviation for d in devs) > 1e-3


def test_certificates_preserve_every_level(spaces):
    for name in ("square", "simplex(3)"):
        emb = embed(spaces[name])
        filt = build_filtration(emb)
        pres = check_preserved_quantum(quantum_certificate(spaces[name]).rep, filt, emb)
        assert pres.precondition_ok and pres.ok(1e-10)


def test_non_isometry_moves_levels(square):
    emb = embed(square)
    filt = build_filtration(emb)
    pres = check_preserved_classical((1, 0, 2, 3), filt, emb)
    assert "not an isometry" in pres.notes
    assert pres.deviation == pytest.approx(0.5, abs=1e-9)


def test_quantum_k1_matches_classical(square):
    emb = embed(square)
    filt = build_filtration(emb)
    for g in [(1, 2, 3, 0), (1, 0, 2, 3), (2, 1, 0, 3)]:
        q = check_preserved_quantum(from_permutation(g), filt, emb)
        c = check_preserved_classical(g, filt, emb)
        assert np.allclose(q.per_level, c.per_level, atol=1e-14)


def test_one_point_space():
    space = from_coordinates([(0, 0)])
    filt = build_filtration(embed(space))
    assert filt.dims == [1] and filt.degrees == (0,)
