import itertools
from fractions import Fraction

import numpy as np
import pytest
import sympy
from hypothesis import given, settings
from hypothesis import strategies as st

from qiso.errors import InvalidSpaceError, NotEmbeddableError
from qiso.euclidean_embed import embed, embeddability, exact_det, gram_matrix, ldlt
from qiso.metric_space import FiniteMetricSpace, from_coordinates, parse_standard_name


def sympy_det(rows):
    return Fraction(str(sympy.Matrix([[sympy.Rational(v.numerator, v.denominator) for v in r] for r in rows]).det()))


def pairwise_sqdist(coords):
    c = np.asarray(coords, dtype=float)
    return ((c[:, None, :] - c[None, :, :]) ** 2).sum(-1)


def test_square_embeds_in_the_plane(square):
    verdict = embeddability(square)
    assert verdict.embeddable and verdict.rank == 2
    # oracle: the unit square itself is a planar realisation
    assert from_coordinates([(0, 0), (1, 0), (1, 1), (0, 1)]).sqdist == square.sqdist


def test_one_point_space_rank_zero():
    verdict = embeddability(FiniteMetricSpace([[0]]))
    assert verdict.embeddable and verdict.rank == 0
    assert embed(FiniteMetricSpace([[0]])).coords.shape == (1, 0)


def test_cycle_graph_4_is_not_embeddable():
    # d(a,c) = d(a,b) + d(b,c) = d(a,d) + d(d,c) forces b = d in any Euclidean realisation
    c4 = parse_standard_name("cycle_graph(4)")
    verdict = embeddability(c4)
    assert not verdict.embeddable
    w = verdict.witness
    gram, idx = gram_matrix(c4, 0)
    rows = [idx.index(i) for i in w.indices]
    sub = [[gram[a][b] for b in rows] for a in rows]
    assert [list(r) for r in w.submatrix] == sub
    assert sympy_det(sub) == w.determinant < 0


def test_cycle_graph_4_has_negative_minor_by_exhaustion():
    c4 = parse_standard_name("cycle_graph(4)")
    gram, _ = gram_matrix(c4, 0)
    minors = [sympy_det([[gram[a][b] for b in s] for a in s])
              for r in range(1, 4) for s in itertools.combinations(range(3), r)]
    assert min(minors) < 0


def test_two_point_embedding():
    space = FiniteMetricSpace([[0, 4], [4, 0]])
    emb = embed(space)
    assert emb.rank == 1
    assert np.allclose(np.abs(emb.coords[:, 0]), [0, 2])
    assert emb.coords[0, 0] == 0


@pytest.mark.parametrize("name, dist", [("simplex(2)", {1.0}), ("square", {1.0, np.sqrt(2)})])
def test_embedding_reproduces_distances(name, dist):
    space = parse_standard_name(name)
    emb = embed(space)
    assert emb.coords.shape[1] == 2
    d = np.sqrt(pairwise_sqdist(emb.coords))
    off = d[~np.eye(space.n, dtype=bool)]
    for v in off:
        assert min(abs(v - t) for t in dist) <= 1e-9


def test_embed_non_embeddable_raises_with_witness():
    with pytest.raises(NotEmbeddableError) as info:
        embed(parse_standard_name("cycle_graph(5)"))
    assert info.value.witness.determinant < 0


def test_invalid_space_rejected():
    with pytest.raises(InvalidSpaceError):
        embeddability(FiniteMetricSpace([[0, 1, 9], [1, 0, 1], [9, 1, 0]]))


def test_ldlt_reconstructs_exactly():
    gram = [[Fraction(v) for v in row] for row in [[4, 2, 2], [2, 1, 1], [2, 1, 5]]]
    res = ldlt(gram)
    assert res.negative is None and res.rank == 2
    m = len(gram)
    P = res.perm
    rebuilt = [[sum(res.L[i][t] * res.D[t] * res.L[j][t] for t in range(res.rank)) for j in range(m)]
               for i in range(m)]
    assert rebuilt == [[gram[P[i]][P[j]] for j in range(m)] for i in range(m)]


def test_ldlt_zero_diagonal_witness():
    res = ldlt([[Fraction(0), Fraction(1)], [Fraction(1), Fraction(0)]])
    assert res.negative == (0, 1)


def test_exact_det_matches_sympy():
    rows = [[Fraction(1, 2), 3, -1], [2, Fraction(5, 7), 0], [1, 1, 1]]
    assert exact_det(rows) == sympy_det([[Fraction(v) for v in r] for r in rows])


coords_strategy = st.lists(
    st.tuples(*[st.integers(-3, 3)] * 3), min_size=2, max_size=8, unique=True)


@settings(max_examples=50, deadline=None)
@given(coords_strategy)
def test_random_point_sets_embed_exactly(coords):
    space = from_coordinates(coords)
    emb = embed(space)
    # exact Gram identity through the LDL factors
    assert emb.exact_factor_gram() == [list(r) for r in emb.gram]
    # rank equals the affine dimension of the point set
    c = np.array(coords, dtype=float)
    assert emb.rank == np.linalg.matrix_rank(c - c[0]) <= space.n - 1
    # floating reconstruction within 1e-9 relative
    sq = np.array([[float(v) for v in r] for r in space.sqdist])
    err = np.abs(pairwise_sqdist(emb.coords) - sq)
    assert np.all(err <= 1e-9 * np.maximum(sq, 1.0))
    assert np.all(np.abs(emb.coords[emb.basepoint]) == 0)


@settings(max_examples=30, deadline=None)
@given(coords_strategy)
def test_embeddability_is_basepoint_independent(coords):
    space = from_coordinates(coords)
    verdicts = {(v.embeddable, v.rank) for v in (embeddability(space, b) for b in range(space.n))}
    assert len(verdicts) == 1


@pytest.mark.parametrize("name", ["cycle_graph(4)", "cycle_graph(5)", "cycle_graph(6)", "square", "hypercube(3)"])
def test_basepoint_independence_on_named_spaces(name):
    space = parse_standard_name(name)
    verdicts = {(v.embeddable, v.rank) for v in (embeddability(space, b) for b in range(space.n))}
    assert len(verdicts) == 1


@settings(max_examples=40, deadline=None)
@given(st.integers(2, 6), st.data())
def test_verdict_agrees_with_eigenvalues(n, data):
    # random symmetric integer squared distances that satisfy the triangle inequality
    vals = data.draw(st.lists(st.integers(4, 9), min_size=n * (n - 1) // 2, max_size=n * (n - 1) // 2))
    rows = [[0] * n for _ in range(n)]
    for (i, j), v in zip(itertools.combinations(range(n), 2), vals):
        rows[i][j] = rows[j][i] = v
    space = FiniteMetricSpace(rows)
    verdict = embeddability(space)
    gram, _ = gram_matrix(space)
    eig = np.linalg.eigvalsh(np.array([[float(v) for v in r] for r in gram]))
    if verdict.embeddable:
        assert eig.min() >= -1e-9
        assert verdict.rank == int(np.sum(eig > 1e-9))
    else:
        assert eig.min() < 0
        assert sympy_det([list(r) for r in verdict.witness.submatrix]) < 0
