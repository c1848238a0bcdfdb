import itertools

import numpy as np
import pytest

from ipgm.linalg import frobenius_inner, frobenius_norm, symmetrize
from ipgm.schedules import ForcingParams, ToleranceFn
from ipgm.sets import (
    Ball,
    Box,
    ExactProjectionAdapter,
    LorentzCone,
    SimplexSet,
    Spectrahedron,
    SpectrahedronState,
    UnsupportedOracleCapability,
    certify_inexact_projection,
    exact_project_ball,
    exact_project_box,
    exact_project_lorentz,
    exact_project_spectrahedron,
    inexact_project_spectrahedron,
    project_simplex,
    support_point_spectrahedron,
)

PHI1 = ToleranceFn.canonical("phi1")
PHI4 = ToleranceFn.canonical("phi4")


def simplex_oracle_kkt(d):
    """Brute-force support enumeration for the simplex projection.

    For every candidate support size over the sorted entries, solve the
    equality-constrained least squares in closed form and keep the KKT-
    feasible candidate with the smallest distance.
    """
    d = np.asarray(d, dtype=float)
    p = d.size
    order = np.argsort(d)[::-1]
    best, best_dist = None, np.inf
    for k in range(1, p + 1):
        sel = order[:k]
        theta = (np.sum(d[sel]) - 1.0) / k
        x = np.zeros(p)
        x[sel] = d[sel] - theta
        if np.min(x[sel]) < -1e-13:
            continue
        # KKT: multipliers of the dropped coordinates must be nonnegative
        if k < p and np.max(d[order[k:]]) > theta + 1e-13:
            continue
        dist = np.linalg.norm(x - d)
        if dist < best_dist:
            best, best_dist = x, dist
    return best


def simplex_oracle_exhaustive(d):
    """Projection by full enumeration of supports (tiny p only)."""
    d = np.asarray(d, dtype=float)
    p = d.size
    best, best_dist = None, np.inf
    for r in range(1, p + 1):
        for sel in itertools.combinations(range(p), r):
            sel = list(sel)
            theta = (np.sum(d[sel]) - 1.0) / r
            x = np.zeros(p)
            x[sel] = d[sel] - theta
            if np.min(x[sel]) < -1e-12:
                continue
            dist = np.linalg.norm(x - d)
            if dist < best_dist - 1e-15:
                best, best_dist = x, dist
    return best


def random_feasible_spectra(rng, n):
    """Random member of the spectrahedron via random eigenbasis + simplex point."""
    g = rng.standard_normal((n, n))
    q, _ = np.linalg.qr(g)
    lam = rng.dirichlet(np.ones(n))
    return (q * lam) @ q.T


class TestProjectSimplex:
    def test_fixed_point(self):
        assert np.allclose(project_simplex([0.3, 0.7]), [0.3, 0.7])

    def test_vertex(self):
        assert np.allclose(project_simplex([2.0, 0.0]), [1.0, 0.0])

    def test_symmetry(self):
        assert np.allclose(project_simplex([0.0, 0.0]), [0.5, 0.5])
        assert np.allclose(project_simplex([1.0, 1.0, 1.0]), np.ones(3) / 3)

    def test_empty_rejected(self):
        with pytest.raises(ValueError):
            project_simplex([])

    def test_matches_kkt_oracle(self):
        rng = np.random.default_rng(33)
        for _ in range(500):
            p = int(rng.integers(1, 13))
            d = rng.uniform(-3, 3, size=p) * float(rng.uniform(0.1, 10))
            x = project_simplex(d)
            ref = simplex_oracle_kkt(d)
            assert np.allclose(x, ref, atol=1e-10)
            assert np.sum(x) == pytest.approx(1.0, abs=1e-12)
            assert np.min(x) >= 0.0

    def test_matches_exhaustive_oracle(self):
        rng = np.random.default_rng(34)
        for _ in range(150):
            p = int(rng.integers(1, 8))
            d = rng.uniform(-2, 2, size=p)
            assert np.allclose(project_simplex(d), simplex_oracle_exhaustive(d),
                               atol=1e-10)


class TestSimpleSets:
    def test_box_clamp(self):
        assert np.allclose(exact_project_box([2.0, -1.0], 0.0, 1.0), [1.0, 0.0])

    def test_ball_radial(self):
        assert np.allclose(exact_project_ball([3.0, 4.0], [0.0, 0.0], 1.0),
                           [0.6, 0.8])

    def test_lorentz_polar_point(self):
        assert np.allclose(exact_project_lorentz([0.0, -1.0]), [0.0, 0.0])

    def test_lorentz_interior(self):
        v = np.array([0.3, 1.0])
        assert np.allclose(exact_project_lorentz(v), v)

    @pytest.mark.parametrize("seed", range(5))
    def test_lorentz_matches_qp_oracle(self, seed):
        # penalized least squares over a fine feasibility check, via scipy
        from scipy.optimize import minimize

        rng = np.random.default_rng(200 + seed)
        d = int(rng.integers(2, 5))
        v = rng.uniform(-2, 2, size=d)
        proj = exact_project_lorentz(v)

        def obj(z):
            return 0.5 * np.sum((z - v) ** 2)

        cons = {"type": "ineq",
                "fun": lambda z: z[-1] - np.linalg.norm(z[:-1])}
        ref = minimize(obj, np.zeros(d), constraints=[cons], method="SLSQP",
                       options={"maxiter": 200, "ftol": 1e-14}).x
        assert np.allclose(proj, ref, atol=1e-6)

    def test_oracle_objects_roundtrip(self):
        box = Box.make(np.zeros(2), np.ones(2))
        assert box.contains([0.5, 0.5])
        assert not box.contains([1.5, 0.5])
        assert np.allclose(box.support_point([1.0, -2.0]), [1.0, 0.0])
        ball = Ball.make(np.zeros(2), 1.0)
        assert ball.contains([0.6, 0.8])
        assert np.allclose(ball.support_point([2.0, 0.0]), [1.0, 0.0])
        cone = LorentzCone(dim=3)
        assert cone.contains([0.1, 0.1, 1.0])
        with pytest.raises(UnsupportedOracleCapability):
            cone.support_point([0.0, 0.0, 1.0])

    def test_support_point_variational_inequality(self):
        # exact projection satisfies <v - Pv, y - Pv> <= 0 at support points
        rng = np.random.default_rng(9)
        box = Box.make(-np.ones(4), np.ones(4))
        for _ in range(50):
            v = rng.uniform(-3, 3, size=4)
            w = box.exact_project(v)
            y = box.support_point(v - w)
            assert frobenius_inner(v - w, y - w) <= 1e-12

    def test_default_inexact_is_exact(self):
        box = Box.make(np.zeros(2), np.ones(2))
        res = box.inexact_project([2.0, 0.5], np.zeros(2), ForcingParams.zero(), PHI1)
        assert np.allclose(res.point, [1.0, 0.5])
        assert res.certificate_gap is not None and res.certificate_gap <= 1e-12


class TestSpectrahedronExact:
    def test_feasible_fixed_point(self):
        n = 5
        v = np.eye(n) / n
        assert np.allclose(exact_project_spectrahedron(v), v, atol=1e-12)

    def test_diagonal(self):
        w = exact_project_spectrahedron(np.diag([2.0, 0.0]))
        assert np.allclose(w, np.diag([1.0, 0.0]), atol=1e-12)

    def test_symmetrizes_first(self):
        w = exact_project_spectrahedron([[1.0, 5.0], [-5.0, 1.0]])
        assert np.allclose(w, np.diag([0.5, 0.5]), atol=1e-12)

    @pytest.mark.parametrize("seed", range(4))
    def test_projection_properties(self, seed):
        rng = np.random.default_rng(300 + seed)
        n = int(rng.integers(3, 20))
        v = symmetrize(rng.standard_normal((n, n)))
        w = exact_project_spectrahedron(v)
        assert np.trace(w) == pytest.approx(1.0, abs=1e-10)
        assert np.min(np.linalg.eigvalsh(w)) >= -1e-10
        # variational inequality against the support point
        y = support_point_spectrahedron(v - w)
        assert frobenius_inner(v - w, y - w) <= 1e-8

    def test_spectrahedron_contains(self):
        s = Spectrahedron(4)
        assert s.contains(np.eye(4) / 4)
        assert not s.contains(np.eye(4))
        assert not s.contains(np.diag([1.5, -0.5, 0.0, 0.0]))


class TestSupportPointSpectrahedron:
    def test_diagonal_direction(self):
        y = support_point_spectrahedron(np.diag([0.4, -0.4]))
        assert np.allclose(y, np.diag([1.0, 0.0]), atol=1e-9)

    def test_zero_direction(self):
        y = support_point_spectrahedron(np.zeros((3, 3)))
        assert np.trace(y) == pytest.approx(1.0, abs=1e-10)
        assert np.min(np.linalg.eigvalsh(y)) >= -1e-12

    def test_maximizes_over_samples(self):
        rng = np.random.default_rng(40)
        c = symmetrize(rng.standard_normal((8, 8)))
        y = support_point_spectrahedron(c)
        val = frobenius_inner(c, y)
        for _ in range(1000):
            cand = random_feasible_spectra(rng, 8)
            assert val >= frobenius_inner(c, cand) - 1e-8
        # agrees with the dense-eigendecomposition oracle
        assert val == pytest.approx(np.max(np.linalg.eigvalsh(c)), abs=1e-9)


class TestInexactProjectSpectrahedron:
    def test_rank1_immediate_accept(self):
        res = inexact_project_spectrahedron(
            np.diag([2.0, 0.0]), np.diag([1.0, 0.0]), ForcingParams.zero(),
            PHI1, p_start=1)
        assert res.rank_used == 1
        assert np.allclose(res.point, np.diag([1.0, 0.0]), atol=1e-10)
        assert res.certificate_gap <= 1e-10

    def test_feasible_input_needs_rank2(self):
        v = np.diag([0.6, 0.4, 0.0])
        res = inexact_project_spectrahedron(
            v, np.eye(3) / 3, ForcingParams.zero(), PHI1, p_start=1)
        assert res.rank_used == 2
        assert np.allclose(res.point, v, atol=1e-9)

    def test_relative_tolerance_accepts_rank1(self):
        v = np.diag([0.6, 0.4, 0.0])
        u = np.zeros((3, 3))
        u[2, 2] = 1.0
        res = inexact_project_spectrahedron(
            v, u, ForcingParams(0.0, 0.0, 0.45), PHI4, p_start=1)
        assert res.rank_used == 1
        assert np.allclose(res.point, np.diag([1.0, 0.0, 0.0]), atol=1e-9)

    def test_gamma_zero_collapse(self):
        rng = np.random.default_rng(77)
        for _ in range(25):
            n = int(rng.integers(3, 31))
            v = symmetrize(rng.standard_normal((n, n)))
            u = random_feasible_spectra(rng, n)
            res = inexact_project_spectrahedron(v, u, ForcingParams.zero(),
                                                PHI1, p_start=1)
            ref = exact_project_spectrahedron(v)
            assert frobenius_norm(res.point - ref) < 1e-7

    def test_certificates_always_pass(self):
        rng = np.random.default_rng(78)
        s = Spectrahedron(8)
        for _ in range(40):
            v = symmetrize(rng.standard_normal((8, 8)))
            u = random_feasible_spectra(rng, 8)
            g = ForcingParams(float(rng.uniform(0, 1)),
                              float(rng.uniform(0, 0.49)),
                              float(rng.uniform(0, 0.49)))
            res = inexact_project_spectrahedron(v, u, g, PHI1, p_start=1)
            ok, gap = certify_inexact_projection(s, u, v, res.point, g, PHI1)
            assert ok, f"certificate gap {gap}"
            assert s.contains(res.point, feas_tol=1e-8)

    def test_monotone_effort_in_gamma(self):
        rng = np.random.default_rng(79)
        v = symmetrize(rng.standard_normal((12, 12)))
        u = random_feasible_spectra(rng, 12)
        for idx in range(3):
            ranks = []
            for t in np.linspace(0.0, 0.49, 6):
                g = [0.0, 0.0, 0.0]
                g[idx] = float(t) if idx else 4.0 * float(t)
                res = inexact_project_spectrahedron(v, u, ForcingParams(*g),
                                                    PHI1, p_start=1)
                ranks.append(res.rank_used)
            assert all(ranks[i] >= ranks[i + 1] for i in range(len(ranks) - 1)), \
                f"gamma{idx + 1} sweep gave ranks {ranks}"

    def test_warm_state_roundtrip(self):
        rng = np.random.default_rng(80)
        s = Spectrahedron(10)
        v = symmetrize(rng.standard_normal((10, 10)))
        u = random_feasible_spectra(rng, 10)
        state = s.initial_projection_state()
        res = s.inexact_project(v, u, ForcingParams.zero(), PHI1, state=state)
        assert isinstance(res.state, SpectrahedronState)
        assert res.state.p_start == max(1, res.rank_used - 1)
        v2 = v + 1e-3 * symmetrize(rng.standard_normal((10, 10)))
        res2 = s.inexact_project(v2, res.point, ForcingParams.zero(), PHI1,
                                 state=res.state)
        ref2 = exact_project_spectrahedron(v2)
        assert frobenius_norm(res2.point - ref2) < 1e-7

    def test_p_start_bounds(self):
        with pytest.raises(ValueError):
            inexact_project_spectrahedron(np.eye(3), np.eye(3) / 3,
                                          ForcingParams.zero(), PHI1, p_start=0)

    def test_eigensolver_failure_carries_rank_context(self):
        from ipgm.linalg import EigenSolverError

        rng = np.random.default_rng(44)
        v = symmetrize(rng.standard_normal((20, 20)))
        u = random_feasible_spectra(rng, 20)
        with pytest.raises(EigenSolverError, match="rank p="):
            inexact_project_spectrahedron(v, u, ForcingParams.zero(), PHI1,
                                          p_start=1, max_matvecs=2)


class TestCertify:
    def test_exact_projection_qualifies(self):
        rng = np.random.default_rng(90)
        s = Spectrahedron(6)
        for _ in range(20):
            v = symmetrize(rng.standard_normal((6, 6)))
            u = random_feasible_spectra(rng, 6)
            w = exact_project_spectrahedron(v)
            g = ForcingParams(float(rng.uniform(0, 2)), float(rng.uniform(0, 0.4)),
                              float(rng.uniform(0, 0.4)))
            ok, gap = certify_inexact_projection(s, u, v, w, g, PHI1)
            assert ok
            assert gap <= 1e-9

    def test_bad_candidate_rejected(self):
        s = Spectrahedron(3)
        v = np.diag([0.6, 0.4, 0.0])
        w = np.diag([1.0, 0.0, 0.0])
        ok, gap = certify_inexact_projection(s, v, v, w, ForcingParams.zero(),
                                             PHI1)
        assert not ok
        assert gap == pytest.approx(0.8, abs=1e-9)

    def test_self_projection(self):
        s = Spectrahedron(3)
        v = np.eye(3) / 3
        ok, gap = certify_inexact_projection(s, v, v, v, ForcingParams.zero(),
                                             PHI1)
        assert ok
        assert gap == pytest.approx(0.0, abs=1e-10)

    def test_missing_support_oracle(self):
        cone = LorentzCone(dim=3)
        with pytest.raises(UnsupportedOracleCapability):
            certify_inexact_projection(cone, np.zeros(3), np.ones(3),
                                       np.zeros(3), ForcingParams.zero(), PHI1)


class TestProjectionContractBounds:
    """Distance and inner-product bounds implied by the projection contract."""

    def run_case(self, rng, n):
        v = symmetrize(rng.standard_normal((n, n))) * float(rng.uniform(0.2, 3))
        u = random_feasible_spectra(rng, n)
        g = ForcingParams(float(rng.uniform(0, 1.5)),
                          float(rng.uniform(0, 0.49)),
                          float(rng.uniform(0, 0.49)))
        res = inexact_project_spectrahedron(v, u, g, PHI1, p_start=1)
        return v, u, g, res.point

    def test_distance_bound(self):
        rng = np.random.default_rng(91)
        for _ in range(30):
            n = int(rng.integers(4, 16))
            v, u, g, w = self.run_case(rng, n)
            dvu = frobenius_norm(v - u) ** 2
            dwv = frobenius_norm(w - v) ** 2
            for _ in range(20):
                x = random_feasible_spectra(rng, n)
                lhs = frobenius_norm(w - x) ** 2
                rhs = (frobenius_norm(v - x) ** 2
                       + (2 * g.gamma1 + 2 * g.gamma3) / (1 - 2 * g.gamma3) * dvu
                       - (1 - 2 * g.gamma2) / (1 - 2 * g.gamma3) * dwv)
                scale = max(1.0, lhs, abs(rhs))
                assert lhs <= rhs + 1e-10 * scale

    def test_inner_product_bound(self):
        rng = np.random.default_rng(92)
        for _ in range(30):
            n = int(rng.integers(4, 16))
            v, u, g, w = self.run_case(rng, n)
            dvu = frobenius_norm(v - u) ** 2
            dwu = frobenius_norm(w - u) ** 2
            rhs = ((g.gamma1 + g.gamma2) / (1 - 2 * g.gamma2) * dvu
                   + (g.gamma3 - g.gamma2) / (1 - 2 * g.gamma2) * dwu)
            for _ in range(20):
                y = random_feasible_spectra(rng, n)
                lhs = frobenius_inner(v - w, y - w)
                scale = max(1.0, abs(lhs), abs(rhs))
                assert lhs <= rhs + 1e-10 * scale


class TestExactAdapter:
    def test_adapter_projects_exactly(self):
        s = ExactProjectionAdapter(Spectrahedron(5))
        rng = np.random.default_rng(93)
        v = symmetrize(rng.standard_normal((5, 5)))
        res = s.inexact_project(v, np.eye(5) / 5, ForcingParams(9.0, 0.4, 0.4),
                                PHI1)
        assert np.allclose(res.point, exact_project_spectrahedron(v), atol=1e-12)
        assert res.certificate_gap is None
        assert s.descriptor["projection"] == "exact"
