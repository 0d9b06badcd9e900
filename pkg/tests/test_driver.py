import numpy as np
import pytest

import fixtures
from tensorspectra.driver import (EigenSystem, SweepOptions, Termination,
                                  check_isolated, full_sweep, h_count_bound,
                                  h_system, next_eigenvalue, polish_eigenpair,
                                  smallest_eigenvalue, z_system)
from tensorspectra.poly import Polynomial, tensor_to_poly
from tensorspectra.tensor import Tensor, identity_tensor


def test_z_system_shapes():
    A = fixtures.ex51()
    f, hs = z_system(A)
    assert f.degree == 4
    assert len(hs) == 3
    assert all(h.degree == 5 for h in hs[:2])
    assert hs[2].degree == 2


def test_z_system_ex14_explicit():
    A = fixtures.ex14()
    f, hs = z_system(A)
    x1, x2 = Polynomial.variable(2, 0), Polynomial.variable(2, 1)
    fx = x1 ** 4 + x1 ** 2 * x2 ** 2
    assert f == fx
    assert hs[0] == x1 ** 3 - fx * x1
    assert hs[1] == x1 ** 2 * x2 - fx * x2
    assert hs[2] == x1 ** 2 + x2 ** 2 - 1.0


def test_z_system_identity_objective():
    I = identity_tensor(3, 2)
    f, _ = z_system(I)
    assert f == tensor_to_poly(I)


def test_h_system_normalization_power():
    for m, m0 in [(2, 2), (3, 2), (4, 4), (5, 4)]:
        A = fixtures.random_tensor(m, 2, seed=m)
        f, hs, got = h_system(A)
        assert got == m0
        assert f.degree <= m0
        assert len(hs) == 3


def test_h_system_order4_objective_is_full_contraction():
    A = fixtures.ex51()
    f, _, m0 = h_system(A)
    assert m0 == 4
    assert f == tensor_to_poly(A)


def test_system_residual_identity_on_variety():
    # any solution of the defining equations is an eigenpair at value f(u)
    from tensorspectra.oracle import brute_h_n2, brute_z_n2

    for seed in (901, 902):
        A = fixtures.random_tensor(3, 2, seed=seed)
        for kind, oracle in (("Z", brute_z_n2), ("H", brute_h_n2)):
            system = EigenSystem(kind, A)
            res = oracle(A)
            for lam, vecs in res.eigenpairs:
                for u in vecs:
                    assert system.eigenvalue_at(u) == pytest.approx(lam, abs=1e-9)
                    assert system.residual(lam, u) <= 1e-9


def test_jacobian_matches_finite_differences():
    for kind in ("Z", "H"):
        A = fixtures.random_tensor(4, 3, seed=42)
        system = EigenSystem(kind, A)
        rng = np.random.default_rng(5)
        lam = 0.7
        x = rng.normal(size=3)
        J = system.jacobian(lam, x)
        h = 1e-6
        for col in range(4):
            dp = np.zeros(4)
            dp[col] = h
            Fp = system.F(lam + dp[0], x + dp[1:])
            Fm = system.F(lam - dp[0], x - dp[1:])
            fd = (Fp - Fm) / (2 * h)
            assert np.max(np.abs(J[:, col] - fd)) < 1e-5


def test_h_count_bound_values():
    assert h_count_bound(4, 2) == 6
    assert h_count_bound(2, 7) == 7
    assert h_count_bound(3, 3) == 12


def test_polish_converges_from_perturbation():
    A = fixtures.ex51()
    lam, u, ok = polish_eigenpair("Z", A, 23.0 + 1e-3, np.array([1e-3, 0.9999]))
    assert ok
    assert lam == pytest.approx(23.0, abs=1e-10)
    assert abs(abs(u[1]) - 1.0) < 1e-10


def test_polish_fixed_point():
    A = fixtures.ex51()
    lam, u, ok = polish_eigenpair("Z", A, 23.0, np.array([0.0, 1.0]))
    assert ok
    assert lam == pytest.approx(23.0, abs=1e-13)
    assert np.max(np.abs(u - [0.0, 1.0])) < 1e-13


def test_check_isolated_ex51():
    assert check_isolated("Z", fixtures.ex51(), 23.0, [0.0, 1.0]) == "isolated"


def test_check_isolated_continuum_inconclusive():
    a = np.sqrt(0.5)
    assert check_isolated("Z", fixtures.ex14(), 0.5, [a, a]) == "inconclusive"


def test_check_isolated_diagonal_tensor():
    rng = np.random.default_rng(6)
    d = rng.uniform(1.0, 2.0, size=3)
    E = np.zeros((3, 3, 3, 3))
    for i in range(3):
        E[i, i, i, i] = d[i]
    A = Tensor(E)
    for i in range(3):
        u = np.zeros(3)
        u[i] = 1.0
        system = EigenSystem("Z", A)
        assert system.residual(d[i], u) < 1e-12
        assert check_isolated("Z", A, d[i], u) == "isolated"


def test_smallest_eigenvalue_found_ex51():
    out = smallest_eigenvalue("Z", fixtures.ex51())
    assert out.outcome == "found"
    assert out.pair.value == pytest.approx(23.0, abs=5e-4)
    vecs = sorted(tuple(np.round(np.abs(v), 4)) for v in out.pair.vectors)
    assert vecs == [(0.0, 1.0), (0.0, 1.0)]


def test_smallest_eigenvalue_none_ex13():
    for kind in ("Z", "H"):
        out = smallest_eigenvalue(kind, fixtures.ex13())
        assert out.outcome == "no-eigenvalue"
        assert out.certificate is not None
        assert out.certificate["report"]["ok"]


def test_next_eigenvalue_ex51():
    out = next_eigenvalue("Z", fixtures.ex51(), 23.0, delta=0.05)
    assert out.outcome == "found"
    assert out.pair.value == pytest.approx(25.1, abs=5e-4)
    out = next_eigenvalue("Z", fixtures.ex51(), 25.1, delta=0.05)
    assert out.outcome == "no-more"
    assert out.certificate["report"]["ok"]


def test_next_eigenvalue_continuum_ex14():
    out = next_eigenvalue("Z", fixtures.ex14(), 0.5, delta=0.05)
    assert out.outcome == "non-isolated"


def test_full_sweep_ex51_z():
    spec = full_sweep("Z", fixtures.ex51())
    assert spec.termination == Termination.CERTIFIED_COMPLETE
    assert [round(v, 4) for v in spec.values] == [23.0, 25.1]
    assert all(p.isolated for p in spec.eigenpairs)
    assert all(p.residual <= 1e-7 for p in spec.eigenpairs)


def test_full_sweep_values_strictly_increasing():
    spec = full_sweep("H", fixtures.ex51())
    vals = spec.values
    assert all(b - a > 1e-6 for a, b in zip(vals, vals[1:]))


def test_full_sweep_h_count_bound():
    A = fixtures.ex51()
    spec = full_sweep("H", A)
    assert len(spec.values) <= h_count_bound(A.order, A.dim)


def test_full_sweep_odd_order_sign_symmetry():
    A = fixtures.random_tensor(3, 2, seed=905)
    spec = full_sweep("Z", A)
    system = EigenSystem("Z", A)
    vals = spec.values
    assert np.allclose(vals, sorted(-v for v in vals), atol=1e-6)
    for p in spec.eigenpairs:
        for v in p.vectors:
            assert system.residual(-p.value, -np.asarray(v)) <= 1e-7


def test_full_sweep_h_sign_symmetry_of_vectors():
    A = fixtures.ex51()
    spec = full_sweep("H", A)
    system = EigenSystem("H", A)
    for p in spec.eigenpairs:
        for v in p.vectors:
            assert system.residual(p.value, -np.asarray(v)) <= 1e-7


def test_full_sweep_nonneg_mode():
    A = fixtures.random_tensor(3, 2, seed=906)
    full = full_sweep("Z", A)
    nonneg = full_sweep("Z", A, SweepOptions(nonneg=True))
    want = sorted(v for v in full.values if v >= -1e-9)
    assert np.allclose(nonneg.values, want, atol=1e-6)


def test_full_sweep_monotone_hierarchy_bounds():
    spec = full_sweep("Z", fixtures.ex52(), SweepOptions(nonneg=True))
    by_phase = {}
    for e in spec.log:
        if e.get("phase") in ("smallest-min",) and "value" in e and \
                e.get("status") in ("optimal",):
            by_phase.setdefault(e["phase"], []).append((e["k"], e["value"]))
    for phase, pairs in by_phase.items():
        pairs.sort()
        for (k1, v1), (k2, v2) in zip(pairs, pairs[1:]):
            if k2 == k1 + 1:
                assert v2 >= v1 - 1e-6


def test_full_sweep_certified_requires_verified_farkas():
    spec = full_sweep("Z", fixtures.ex13())
    assert spec.termination == Termination.CERTIFIED_COMPLETE
    assert spec.eigenpairs == []


def test_certified_complete_logs_final_certificate():
    spec = full_sweep("Z", fixtures.ex51())
    assert spec.termination == Termination.CERTIFIED_COMPLETE
    assert any(e.get("note") == "termination certificate" for e in spec.log)
    assert any(e.get("status") == "primal-infeasible" for e in spec.log)


def test_eigenpair_invariants_on_sweep():
    A = fixtures.ex51()
    for kind in ("Z", "H"):
        spec = full_sweep(kind, A)
        system = EigenSystem(kind, A)
        for p in spec.eigenpairs:
            for v in p.vectors:
                assert system.residual(p.value, v) <= 1e-7


def test_matrix_case_matches_linear_algebra():
    rng = np.random.default_rng(907)
    M = rng.normal(size=(2, 2))
    M = M + M.T
    spec = full_sweep("Z", Tensor(M))
    want = sorted(np.linalg.eigvalsh(M))
    assert np.allclose(spec.values, want, atol=1e-6)


def _newton_enumerate(system, trials, seed):
    """Eigenvalues reachable by plain Newton from many random starts."""
    rng = np.random.default_rng(seed)
    vals = set()
    for _ in range(trials):
        x = rng.normal(size=system.n)
        try:
            x = system.normalize(x)
        except ValueError:
            continue
        lam = system.eigenvalue_at(x)
        for _ in range(80):
            F = system.F(lam, x)
            if np.max(np.abs(F)) < 1e-11:
                vals.add(round(lam, 7))
                break
            try:
                d = np.linalg.solve(system.jacobian(lam, x), -F)
            except np.linalg.LinAlgError:
                break
            lam += d[0]
            x += d[1:]
            if not np.isfinite(lam) or np.linalg.norm(x) > 50:
                break
    return sorted(vals)


@pytest.mark.parametrize("kind,seed", [("Z", 40000), ("H", 41002)])
def test_sweep_matches_newton_enumeration_n3(kind, seed):
    # no elimination oracle exists for n=3; multistart Newton plays its role
    A = fixtures.random_tensor(3, 3, seed=seed)
    spec = full_sweep(kind, A)
    assert spec.termination == Termination.CERTIFIED_COMPLETE
    newton = _newton_enumerate(EigenSystem(kind, A), trials=1500, seed=1)
    for v in newton:
        assert min(abs(v - w) for w in spec.values) <= 1e-4
    for w in spec.values:
        assert min(abs(w - v) for v in newton) <= 1e-4
