import json
from fractions import Fraction

import numpy as np
import pytest

from qiso.classical_iso import compose, isometry_group
from qiso.errors import ResourceBoundError, StructuralError
from qiso.magic_unitary import (ISOMETRY_CONDITIONS, MagicUnitaryRep, antipode, check_all, check_commutation,
                                check_condition_ii, check_condition_iii, check_condition_iv, check_magic,
                                check_measure_preserving, commutation_exact, from_permutation,
                                quantum_certificate, rep_from_json, rep_to_json, twin_block_rep, twin_pairs)
from qiso.metric_space import parse_standard_name

CYCLE4 = (1, 2, 3, 0)


def perm_matrix(sigma):
    n = len(sigma)
    P = np.zeros((n, n))
    for y in range(n):
        P[sigma[y], y] = 1
    return P


def test_from_permutation_convention():
    rep = from_permutation((2, 0, 1))
    assert rep.k == 1 and rep.is_exact
    assert np.array_equal(rep.u[:, :, 0, 0].real, perm_matrix((2, 0, 1)))
    assert rep.u[2, 0, 0, 0] == 1 and rep.u[0, 2, 0, 0] == 0
    assert np.array_equal(rep.big_unitary().real, perm_matrix((2, 0, 1)))


def test_from_permutation_is_a_homomorphism():
    p, q = (1, 2, 0, 3), (0, 3, 2, 1)
    lhs = from_permutation(compose(p, q)).big_unitary()
    rhs = from_permutation(p).big_unitary() @ from_permutation(q).big_unitary()
    assert np.array_equal(lhs, rhs)


def test_permutation_reps_are_magic():
    for sigma in [(0, 1, 2), (1, 2, 0), (3, 1, 0, 2)]:
        rep = from_permutation(sigma)
        report = check_magic(rep)
        assert report.exact and report.deviation == 0
        assert check_magic(rep, exact=False).deviation == 0


def test_magic_violation_detected():
    u = np.zeros((2, 2, 1, 1))
    u[0, 0] = u[1, 1] = 0.5
    u[0, 1] = u[1, 0] = 0.5
    report = check_magic(MagicUnitaryRep(u))
    # (1/2)^2 - 1/2 = -1/4 on every entry; rows and columns still sum to 1
    assert report.projection == pytest.approx(0.25) and report.row_sums == 0 and not report.ok


def test_shape_errors():
    with pytest.raises(StructuralError):
        MagicUnitaryRep(np.zeros((2, 3, 1, 1)))
    with pytest.raises(StructuralError):
        from_permutation((0, 0, 1))
    with pytest.raises(StructuralError):
        check_commutation(from_permutation((0, 1, 2)), parse_standard_name("square"))


def test_commutation_rejects_rectangle_rotation(rectangle):
    rep = from_permutation(CYCLE4)
    check = check_commutation(rep, rectangle)
    assert not commutation_exact(rep, rectangle)
    dists = sorted({rectangle.distance(i, j) for i in range(4) for j in range(4)})
    gap = min(b - a for a, b in zip(dists, dists[1:]))
    assert not check.ok and check.deviation >= gap


def test_condition_ii_equals_commutation_for_kac_reps(spaces):
    for space in (spaces["square"], spaces["rectangle(1,4)"], spaces["simplex(3)"]):
        for sigma in [(1, 2, 3, 0), (1, 0, 2, 3), (0, 1, 2, 3), (2, 3, 0, 1)]:
            rep = from_permutation(sigma)
            a = check_commutation(rep, space).deviation
            b = check_condition_ii(rep, space).deviation
            assert abs(a - b) <= 1e-12


def _legs_oracle(rep):
    """Build U13, U23 entry by entry from their defining formulas."""
    n, k = rep.n, rep.k
    dim = n * n * k
    idx = lambda x1, x2, a: (x1 * n + x2) * k + a
    u13 = np.zeros((dim, dim), dtype=complex)
    u23 = np.zeros((dim, dim), dtype=complex)
    for x1 in range(n):
        for x2 in range(n):
            for y1 in range(n):
                for y2 in range(n):
                    for a in range(k):
                        for b in range(k):
                            if x2 == y2:
                                u13[idx(x1, x2, a), idx(y1, y2, b)] = rep.u[x1, y1, a, b]
                            if x1 == y1:
                                u23[idx(x1, x2, a), idx(y1, y2, b)] = rep.u[x2, y2, a, b]
    return u13, u23


@pytest.mark.parametrize("make", [
    lambda: (from_permutation(CYCLE4), "rectangle(1,4)"),
    lambda: (from_permutation(CYCLE4), "square"),
    lambda: (twin_block_rep(4, (0, 2), (1, 3)), "square"),
    lambda: (twin_block_rep(4, (0, 1), (2, 3)), "square"),
])
def test_conditions_iii_iv_against_direct_conjugation(make):
    rep, name = make()
    space = parse_standard_name(name)
    u13, u23 = _legs_oracle(rep)
    D2 = np.diag(np.kron(space.distance_matrix().reshape(-1), np.ones(rep.k)))
    for W, check in ((u13 @ u23, check_condition_iii), (u23 @ u13, check_condition_iv)):
        oracle = np.max(np.abs(W @ D2 @ W.conj().T - D2))
        assert check(rep, space).deviation == pytest.approx(oracle, abs=1e-12)


def test_k1_legs_are_kronecker_products(square):
    sigma = (1, 2, 3, 0)
    P = perm_matrix(sigma)
    u13, u23 = _legs_oracle(from_permutation(sigma))
    assert np.array_equal(u13.real, np.kron(P, np.eye(4)))
    assert np.array_equal(u23.real, np.kron(np.eye(4), P))


def test_all_classical_isometries_pass_everything(spaces):
    for name in ("simplex(2)", "square", "rectangle(1,4)", "cycle_graph(5)"):
        space = spaces[name]
        for g in isometry_group(space):
            report = check_all(from_permutation(g), space)
            assert report.conditions_agree and report.isometric and report.magic.ok
            assert all(c.deviation <= 1e-10 for c in report.isometry_checks().values())


def test_certificates_square_and_simplex3(spaces):
    for name, pairs in (("square", ((0, 2), (1, 3))), ("simplex(3)", ((0, 1), (2, 3)))):
        space = spaces[name]
        cert = quantum_certificate(space)
        assert cert is not None and cert.pairs == pairs
        assert cert.witness_norm == Fraction(1, 2)
        assert check_magic(cert.rep).deviation == 0 and commutation_exact(cert.rep, space)
        # the witness commutator, by hand: p q - q p = [[0, 1/2], [-1/2, 0]]
        expected = np.array([[0, Fraction(1, 2)], [Fraction(-1, 2), 0]], dtype=object)
        assert (cert.witness_commutator == expected).all()
        assert np.linalg.norm(cert.witness_commutator.astype(float), 2) == pytest.approx(0.5, abs=1e-15)
        report = check_all(cert.rep, space)
        assert report.conditions_agree and report.isometric and report.measure.ok


def test_no_certificate_without_two_disjoint_twin_pairs(spaces):
    assert quantum_certificate(spaces["rectangle(1,4)"]) is None
    assert quantum_certificate(spaces["simplex(2)"]) is None
    assert twin_pairs(spaces["rectangle(1,4)"]) == []
    assert twin_pairs(spaces["simplex(2)"]) == [(0, 1), (0, 2), (1, 2)]


def test_block_rep_on_non_twins_is_magic_but_not_isometric(square):
    rep = twin_block_rep(4, (0, 1), (2, 3))
    assert check_magic(rep).deviation == 0
    report = check_all(rep, square)
    assert report.conditions_agree and not report.isometric
    assert all(c.deviation > 0.1 for c in report.isometry_checks().values())


def test_antipode_is_grid_transpose(square):
    cert = quantum_certificate(square)
    kappa = antipode(cert.rep)
    assert np.array_equal(kappa.u[0, 2], cert.rep.u[2, 0])
    assert np.array_equal(antipode(kappa).u, cert.rep.u)
    # Kac type: the transposed grid is again magic
    assert check_magic(kappa).deviation == 0


def test_measure_preservation():
    tri = parse_standard_name("simplex(2)").with_measure(["1/2", "1/4", "1/4"])
    good = check_measure_preserving(from_permutation((0, 2, 1)), tri)
    bad = check_measure_preserving(from_permutation((1, 0, 2)), tri)
    assert good.ok and good.deviation == 0 and good.exact
    assert not bad.ok and bad.deviation == pytest.approx(0.25)


def test_operator_dimension_bound(square):
    rep = quantum_certificate(square).rep
    with pytest.raises(ResourceBoundError):
        check_condition_iii(rep, square, max_operator_dim=31)
    assert check_condition_iii(rep, square, max_operator_dim=32).ok


def test_rep_json_round_trip(square):
    rep = quantum_certificate(square).rep
    back = rep_from_json(json.loads(json.dumps(rep_to_json(rep))))
    assert back.is_exact and (back.exact == rep.exact).all()
    floaty = MagicUnitaryRep(rep.u * 1.0)
    back2 = rep_from_json(rep_to_json(floaty))
    assert not back2.is_exact and np.array_equal(back2.u, rep.u)
    with pytest.raises(StructuralError):
        rep_from_json({"k": 1, "u": [[[[[1, 0]]], [[[0, 0]]]]]})


def test_condition_names_are_stable():
    assert ISOMETRY_CONDITIONS == ("commutation", "condition_ii", "condition_iii", "condition_iv", "vector")


def test_identity_rep_is_identity_grid():
    rep = from_permutation((0, 1, 2))
    assert np.array_equal(rep.u[:, :, 0, 0], np.eye(3))


def test_uniform_measure_preserved_by_every_magic_rep(spaces):
    square = spaces["square"]
    reps = [from_permutation(g) for g in isometry_group(square)]
    reps += [twin_block_rep(4, (0, 1), (2, 3)), quantum_certificate(square).rep, from_permutation((1, 0, 2, 3))]
    for rep in reps:
        check = check_measure_preserving(rep, square)
        assert check.ok and check.deviation == 0
