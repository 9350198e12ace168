import itertools

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from homfinsler.errors import InputError, StructureError
from homfinsler.lie import LieAlgebra, ReductiveSplit, bracket, check_structure, project_m

from .conftest import SO3

finite = st.floats(-10, 10, allow_nan=False)
vec3 = arrays(np.float64, 3, elements=finite)


def brute_jacobi(c):
    """Largest Jacobiator coordinate, by looping over every basis triple."""
    n = c.shape[0]
    e = np.eye(n)

    def br(a, b):
        return sum(a[i] * b[j] * c[i, j] for i in range(n) for j in range(n))

    worst = 0.0
    for i, j, k in itertools.product(range(n), repeat=3):
        a, b, d = e[i], e[j], e[k]
        jac = br(br(a, b), d) + br(br(b, d), a) + br(br(d, a), b)
        worst = max(worst, float(np.max(np.abs(jac))))
    return worst


def test_bracket_abelian_is_zero(abelian, rng):
    a, b = rng.standard_normal(3), rng.standard_normal(3)
    assert np.all(bracket(abelian, a, b) == 0.0)


def test_bracket_self_is_zero(heisenberg, rng):
    a = rng.standard_normal(3)
    assert np.all(bracket(heisenberg, a, a) == 0.0)


def test_heisenberg_e1_e2(heisenberg):
    assert np.array_equal(bracket(heisenberg, [1, 0, 0], [0, 1, 0]), [0, 0, 1])
    assert np.array_equal(bracket(heisenberg, [0, 1, 0], [1, 0, 0]), [0, 0, -1])


def test_bracket_dimension_mismatch(heisenberg):
    with pytest.raises(InputError):
        bracket(heisenberg, [1, 0], [0, 1, 0])


@given(vec3, vec3)
def test_bracket_exactly_antisymmetric(a, b):
    alg = LieAlgebra.from_sparse(3, SO3)
    assert np.array_equal(bracket(alg, a, b), -bracket(alg, b, a))


@given(vec3, vec3, vec3, finite, finite)
def test_bracket_bilinear(a, b, c, lam, mu):
    alg = LieAlgebra.from_sparse(3, SO3)
    lhs = bracket(alg, lam * a + mu * b, c)
    rhs = lam * bracket(alg, a, c) + mu * bracket(alg, b, c)
    scale = 1.0 + np.max(np.abs(lam * a)) * np.max(np.abs(c)) + np.max(np.abs(mu * b)) * np.max(np.abs(c))
    assert np.max(np.abs(lhs - rhs)) <= 1e-12 * scale


def test_project_m():
    split = ReductiveSplit((2,), (0, 1))
    assert np.array_equal(project_m([1.0, 2.0, 0.0], split), [1.0, 2.0, 0.0])
    assert np.array_equal(project_m([0.0, 0.0, 5.0], split), [0.0, 0.0, 0.0])


def test_project_m_trivial_h_is_identity(trivial3, rng):
    v = rng.standard_normal(3)
    assert np.array_equal(project_m(v, trivial3), v)


@given(arrays(np.float64, 4, elements=finite))
def test_project_m_idempotent(v):
    split = ReductiveSplit((1, 3), (0, 2))
    once = project_m(v, split)
    assert np.array_equal(project_m(once, split), once)


def test_split_validation():
    with pytest.raises(InputError):
        ReductiveSplit((0,), (0, 1))
    with pytest.raises(InputError):
        ReductiveSplit((), (0, 2))
    with pytest.raises(InputError):
        ReductiveSplit((0, 1), ())


def test_check_structure_abelian(abelian, trivial3):
    rep = check_structure(abelian, trivial3, 1e-9)
    assert rep.passed
    assert rep.jacobi_residual == rep.antisymmetry_residual == 0.0


@pytest.mark.parametrize("entries", [[(1, 2, 3, 1.0)], SO3])
def test_check_structure_jacobi_matches_brute_force(entries, trivial3):
    alg = LieAlgebra.from_sparse(3, entries)
    assert brute_jacobi(alg.structure_constants) == 0.0
    rep = check_structure(alg, trivial3, 1e-9)
    assert rep.jacobi_residual == 0.0 and rep.passed


def test_check_structure_detects_jacobi_failure(trivial3):
    # [e1,e2]=e3, [e2,e3]=e3: Jacobiator of (e1,e2,e3) is -e3... brute force decides
    alg = LieAlgebra.from_sparse(3, [(1, 2, 3, 1.0), (2, 3, 3, 1.0), (1, 3, 1, 1.0)])
    expected = brute_jacobi(alg.structure_constants)
    assert expected > 0
    rep = check_structure(alg, trivial3, 1e-9)
    assert rep.jacobi_residual == pytest.approx(expected)
    assert not rep.jacobi_ok


def test_non_antisymmetric_rejected_on_load():
    c = np.zeros((3, 3, 3))
    c[0, 1, 2] = 1.0
    c[1, 0, 2] = 1.0
    with pytest.raises(StructureError, match=r"c\[1\]\[2\]\[3\]"):
        LieAlgebra(c)


def test_non_antisymmetric_reported(trivial3):
    c = np.zeros((3, 3, 3))
    c[0, 1, 2] = 1.0
    c[1, 0, 2] = 1.0
    rep = check_structure(LieAlgebra(c, strict=False), trivial3, 1e-9)
    assert rep.antisymmetry_residual == 2.0
    assert not rep.antisymmetry_ok and not rep.passed


def test_sparse_conflict_names_indices():
    with pytest.raises(StructureError, match="conflicts"):
        LieAlgebra.from_sparse(3, [(1, 2, 3, 1.0), (2, 1, 3, 1.0)])


def test_sparse_consistent_duplicates_accepted():
    alg = LieAlgebra.from_sparse(3, [(1, 2, 3, 1.0), (2, 1, 3, -1.0)])
    assert alg.structure_constants[0, 1, 2] == 1.0


def test_reductive_checks():
    so3 = LieAlgebra.from_sparse(3, SO3)
    sphere = ReductiveSplit((2,), (0, 1))
    assert check_structure(so3, sphere).passed
    # h = span(e1 + ...) choices that break [h, m] in m
    bad = ReductiveSplit((0, 1), (2,))
    rep = check_structure(so3, bad)
    assert rep.subalgebra_residual == 1.0 and not rep.subalgebra_ok
    rep = check_structure(LieAlgebra.from_sparse(3, [(1, 2, 3, 1.0)]), ReductiveSplit((0,), (1, 2)))
    assert rep.reductive_residual == 0.0
    rep = check_structure(LieAlgebra.from_sparse(3, [(1, 2, 1, 1.0)]), ReductiveSplit((0,), (1, 2)))
    assert rep.reductive_residual == 1.0 and not rep.reductive_ok


def test_valid_split_bracket_h_m_stays_in_m(rng):
    from homfinsler.fixtures import load_fixture

    doc = load_fixture("heisenberg_rot_riemannian")
    alg, split = doc.algebra, doc.split
    for _ in range(20):
        h = split.embed(np.zeros(3), rng.standard_normal(1))
        m = split.embed(rng.standard_normal(3))
        br = bracket(alg, h, m)
        assert np.max(np.abs(project_m(br, split) - br)) <= 1e-9


def test_jacobi_tol_env_override(monkeypatch, trivial3, heisenberg):
    monkeypatch.setenv("FG_TOL_JACOBI", "1e-3")
    assert check_structure(heisenberg, trivial3).tol == 1e-3
    monkeypatch.setenv("FG_TOL_JACOBI", "nope")
    with pytest.raises(InputError):
        check_structure(heisenberg, trivial3)


def test_ad_matrix(heisenberg):
    ad = heisenberg.ad([1, 0, 0])
    assert np.array_equal(ad @ [0, 1, 0], [0, 0, 1])


@settings(max_examples=50)
@given(st.lists(st.tuples(st.integers(1, 3), st.integers(1, 3), st.integers(1, 3), finite), max_size=6))
def test_sparse_roundtrip(entries):
    entries = [e for e in entries if e[0] != e[1]]
    try:
        alg = LieAlgebra.from_sparse(3, entries)
    except StructureError:
        return
    again = LieAlgebra.from_sparse(3, alg.to_sparse())
    assert np.array_equal(again.structure_constants, alg.structure_constants)
