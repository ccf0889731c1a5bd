import numpy as np
import pytest

from emduality import grids as gr
from emduality import spinors as sn


LAM = 1.0


def ads_grid(n):
    return gr.GridPatch(((-0.4, 0.4), (-0.4, 0.4), (-0.4, 0.4), (0.8, 1.6)), (n,) * 4)


def region_mask(grid):
    # fixed physical comparison region, common to all refinements
    co = grid.coords()
    return ((np.abs(co[..., 0]) <= 0.201) & (np.abs(co[..., 1]) <= 0.201)
            & (np.abs(co[..., 2]) <= 0.201)
            & (co[..., 3] >= 0.999) & (co[..., 3] <= 1.401))


EPS0 = np.array([0.9, -0.4, 0.3, 1.1])


@pytest.fixture(scope="module")
def rep():
    return sn.clifford_rep()


@pytest.fixture(scope="module")
def ads9():
    grid = ads_grid(9)
    fr = sn.builtin_frame("ads4-poincare", grid, lam=LAM)
    eps = sn.integrate_killing(fr, LAM, EPS0)
    return grid, fr, eps


@pytest.fixture(scope="module")
def ads17():
    grid = ads_grid(17)
    fr = sn.builtin_frame("ads4-poincare", grid, lam=LAM)
    eps = sn.integrate_killing(fr, LAM, EPS0)
    return grid, fr, eps


class TestCliffordRep:
    def test_anticommutation_exact(self, rep):
        for a in range(4):
            for b in range(4):
                anti = rep.gamma[a] @ rep.gamma[b] + rep.gamma[b] @ rep.gamma[a]
                assert np.array_equal(anti, 2 * sn.ETA[a, b] * np.eye(4))

    def test_real_entries(self, rep):
        assert rep.gamma.dtype == np.float64
        assert np.all(np.isreal(rep.gamma))

    def test_traceless(self, rep):
        for a in range(4):
            assert np.trace(rep.gamma[a]) == 0.0

    def test_gamma5_squares_to_minus_one(self, rep):
        g5 = rep.gamma5
        assert np.array_equal(g5 @ g5, -np.eye(4))

    def test_lorentz_bracket_closure(self, rep):
        # M_ab = (1/4)[gamma_a, gamma_b] closes the so(3,1) bracket
        eta = sn.ETA
        m = np.zeros((4, 4, 4, 4))
        for a in range(4):
            for b in range(4):
                m[a, b] = 0.25 * (rep.gamma[a] @ rep.gamma[b]
                                  - rep.gamma[b] @ rep.gamma[a])
        for a in range(4):
            for b in range(4):
                for c in range(4):
                    for d in range(4):
                        lhs = m[a, b] @ m[c, d] - m[c, d] @ m[a, b]
                        rhs = (eta[b, c] * m[a, d] - eta[a, c] * m[b, d]
                               - eta[b, d] * m[a, c] + eta[a, d] * m[b, c])
                        assert np.max(np.abs(lhs - rhs)) <= 1e-14

    def test_invariant_bilinear_spaces(self, rep):
        bil = sn.invariant_bilinears(rep)
        assert len(bil[1]) == 1 and len(bil[-1]) == 1
        for sigma in (1, -1):
            c = bil[sigma][0]
            for a in range(4):
                assert np.max(np.abs(rep.gamma[a].T @ c - sigma * c @ rep.gamma[a])) < 1e-12


class TestFrames:
    def test_minkowski_frame(self):
        grid = gr.GridPatch(((-0.4, 0.4),) * 4, (7,) * 4)
        fr = sn.builtin_frame("minkowski", grid)
        assert np.array_equal(fr.metric()[0, 0, 0, 0], sn.ETA)

    def test_ads_frame_metric(self, ads9):
        grid, fr, _ = ads9
        z = grid.coords()[..., 3]
        g = fr.metric()
        expect = sn.ETA * (1.0 / (LAM * z) ** 2)[..., None, None]
        assert np.max(np.abs(g - expect)) < 1e-13

    def test_ads_needs_positive_z(self):
        grid = gr.GridPatch(((-0.4, 0.4),) * 4, (7,) * 4)
        with pytest.raises(sn.FrameError):
            sn.builtin_frame("ads4-poincare", grid)

    def test_unknown_frame(self):
        grid = gr.GridPatch(((-0.4, 0.4),) * 4, (7,) * 4)
        with pytest.raises(sn.FrameError):
            sn.builtin_frame("rindler", grid)

    def test_frame_consistency_validated(self):
        grid = gr.GridPatch(((-0.4, 0.4),) * 4, (7,) * 4)
        bad = np.zeros(grid.shape + (4, 4))
        with pytest.raises(sn.FrameError):
            sn.FramePatch(grid, bad)


class TestSpinConnection:
    def test_minkowski_zero_exact(self):
        grid = gr.GridPatch(((-0.4, 0.4),) * 4, (7,) * 4)
        fr = sn.builtin_frame("minkowski", grid)
        assert np.max(np.abs(sn.spin_connection(fr))) == 0.0

    def test_antisymmetry_exact(self, ads9):
        _, fr, _ = ads9
        w = sn.spin_connection(fr)
        assert np.max(np.abs(w + np.swapaxes(w, -1, -2))) == 0.0

    def test_matches_conformal_oracle(self, ads9, ads17):
        # the analytic conformal-frame connection is the oracle; agreement
        # must be second order in the spacing
        errs = []
        for grid, fr, _ in (ads9, ads17):
            w_fd = sn.spin_connection(fr)
            w_an = fr.conn_fn(grid.coords())
            m = region_mask(grid)
            errs.append(float(np.max(np.abs(w_fd[m] - w_an[m]))))
        assert errs[0] < 2e-2
        assert 1.5 <= np.log2(errs[0] / errs[1]) <= 2.5

    def test_metric_compatibility(self, ads9, ads17):
        errs = []
        for _, fr, _ in (ads9, ads17):
            errs.append(sn.metric_compatibility_residual(fr, sn.spin_connection(fr)))
        assert errs[1] < errs[0]
        assert errs[1] < 5e-3


class TestKillingTransport:
    def test_minkowski_parallel_spinor(self):
        grid = gr.GridPatch(((-0.4, 0.4),) * 4, (7,) * 4)
        fr = sn.builtin_frame("minkowski", grid)
        eps = np.broadcast_to(EPS0, grid.shape + (4,)).copy()
        assert sn.killing_residual_max(fr, eps, 0.0) <= 1e-14

    def test_minkowski_integration_constant(self):
        grid = gr.GridPatch(((-0.4, 0.4),) * 4, (7,) * 4)
        fr = sn.builtin_frame("minkowski", grid)
        eps = sn.integrate_killing(fr, 0.0, EPS0)
        assert np.max(np.abs(eps - EPS0)) == 0.0
        assert sn.path_defect(fr, 0.0, EPS0) == 0.0

    def test_ads_residual_second_order(self, ads9, ads17):
        errs = []
        for grid, fr, eps in (ads9, ads17):
            res = sn.killing_residual(fr, eps, LAM)
            errs.append(float(np.max(np.abs(res[region_mask(grid)]))))
        order = np.log2(errs[0] / errs[1])
        assert 1.8 <= order <= 2.2

    def test_ads_path_defect_shrinks(self, ads9, ads17):
        defects = []
        for grid, fr, _ in (ads9, ads17):
            defects.append(sn.path_defect(fr, LAM, EPS0))
        assert defects[0] < 1e-5
        assert defects[1] < 0.3 * defects[0]

    def test_wrong_killing_constant_negative_control(self, ads9):
        _, fr, _ = ads9
        assert sn.path_defect(fr, 1.3, EPS0) > 1e-2

    def test_random_field_negative_control(self, ads9):
        grid, fr, _ = ads9
        rng = np.random.default_rng(5)
        assert sn.killing_residual_max(fr, rng.standard_normal(grid.shape + (4,)),
                                       LAM) > 1.0

    def test_requires_analytic_frame(self, ads9):
        grid, fr, _ = ads9
        bare = sn.FramePatch(grid, fr.e.copy())
        with pytest.raises(sn.FrameError):
            sn.integrate_killing(bare, LAM, EPS0)


class TestEinsteinProperty:
    def test_ads_is_einstein(self, ads9, ads17):
        # Ric = -3 lam^2 g to second order
        errs = []
        for grid, fr, _ in (ads9, ads17):
            g = fr.metric()
            ric = gr.ricci(g, grid)
            m = region_mask(grid)
            errs.append(float(np.max(np.abs((ric + 3 * LAM ** 2 * g)[m]))))
        order = np.log2(errs[0] / errs[1])
        assert 1.8 <= order <= 2.2


class TestBilinears:
    def test_algebraic_properties_machine_exact(self, ads9):
        grid, fr, eps = ads9
        u, l = sn.killing_bilinears(fr, eps)
        g = fr.metric()
        ginv = np.linalg.inv(g)
        uu = np.einsum("...mn,...m,...n->...", ginv, u, u)
        ll = np.einsum("...mn,...m,...n->...", ginv, l, l)
        ul = np.einsum("...mn,...m,...n->...", ginv, u, l)
        scale = float(np.max(np.abs(u))) ** 2
        assert np.max(np.abs(uu)) < 1e-12 * scale     # lightlike
        assert np.max(np.abs(ll - 1.0)) < 1e-10       # unit spacelike
        assert np.max(np.abs(ul)) < 1e-12 * np.sqrt(scale)
        assert np.max(np.abs(u)) > 1.0                # nontrivial

    def test_first_order_system_second_order(self, ads9, ads17):
        maxima = []
        for grid, fr, eps in (ads9, ads17):
            u, l = sn.killing_bilinears(fr, eps)
            g = fr.metric()
            kappa = sn.extract_kappa(u, l, LAM, g, grid)
            rep = sn.verify_thm53(u, l, kappa, LAM, g, grid)
            assert rep.nontrivial
            assert rep.u_norm_violation < 1e-10
            assert rep.l_norm_violation < 1e-10
            assert rep.orthogonality_violation < 1e-10
            maxima.append((rep.du_residual, rep.dl_residual, rep.u_killing_residual))
        # C = err / h^2 stable: each residual shrinks by ~4 (interior growth
        # makes the plain max slightly sub-quadratic; require a factor >= 2)
        for k in range(3):
            assert maxima[1][k] < 0.55 * maxima[0][k]

    def test_first_order_system_fixed_region_order(self, ads9, ads17):
        errs = []
        for grid, fr, eps in (ads9, ads17):
            u, l = sn.killing_bilinears(fr, eps)
            g = fr.metric()
            gam = gr.christoffel(g, grid)
            du = np.moveaxis(gr.partials(u, grid), -1, -2)
            grad_u = du - np.einsum("...lmn,...l->...mn", gam, u)
            wedge = (np.einsum("...m,...n->...mn", u, l)
                     - np.einsum("...m,...n->...mn", l, u))
            res = grad_u - LAM * wedge
            errs.append(float(np.max(np.abs(res[region_mask(grid)]))))
        assert 1.8 <= np.log2(errs[0] / errs[1]) <= 2.2

    def test_dkappa_reported(self, ads9):
        grid, fr, eps = ads9
        u, l = sn.killing_bilinears(fr, eps)
        g = fr.metric()
        kappa = sn.extract_kappa(u, l, LAM, g, grid)
        rep = sn.verify_thm53(u, l, kappa, LAM, g, grid)
        assert np.isfinite(rep.dkappa_max)


class TestThm53Checks:
    def test_zero_u_rejected(self):
        grid = gr.GridPatch(((-0.4, 0.4),) * 4, (7,) * 4)
        fr = sn.builtin_frame("minkowski", grid)
        g = fr.metric()
        l = np.zeros(grid.shape + (4,))
        l[..., 1] = 1.0
        rep = sn.verify_thm53(np.zeros(grid.shape + (4,)), l,
                              np.zeros(grid.shape + (4,)), 0.0, g, grid)
        assert not rep.nontrivial
        assert rep.du_residual == 0.0
        assert rep.dl_residual == 0.0

    def test_perturbed_norm_flagged(self, ads9):
        grid, fr, eps = ads9
        u, l = sn.killing_bilinears(fr, eps)
        g = fr.metric()
        kappa = sn.extract_kappa(u, 1.1 * l, LAM, g, grid)
        rep = sn.verify_thm53(u, 1.1 * l, kappa, LAM, g, grid)
        assert rep.l_norm_violation == pytest.approx(0.21, abs=0.01)


class TestChiralAlgebra:
    def test_projectors(self, rep):
        p_plus, p_minus = sn.chiral_projectors(rep)
        assert np.max(np.abs(p_plus @ p_plus - p_plus)) < 1e-14
        assert np.max(np.abs(p_plus + p_minus - np.eye(4))) < 1e-14
        assert np.max(np.abs(p_plus @ p_minus)) < 1e-14

    def test_zero_w(self, rep):
        rng = np.random.default_rng(0)
        eps = rng.standard_normal(4) + 1j * rng.standard_normal(4)
        for _ in range(5):
            v = rng.standard_normal(4)
            assert np.max(np.abs(sn.t_w(rep, 0.0, eps, v))) == 0.0

    def test_real_w_reduction(self, rep):
        # real w on a conjugation-real spinor reduces to the real Killing
        # endomorphism with lam = 2w
        rng = np.random.default_rng(1)
        eps_real = rng.standard_normal(4).astype(complex)
        w = 0.45
        for _ in range(10):
            v = rng.standard_normal(4)
            lhs = sn.t_w(rep, w, eps_real, v)
            rhs = w * np.einsum("a,aij,j->i", v, rep.gamma, eps_real)
            assert np.max(np.abs(lhs - rhs)) < 1e-13

    def test_check_report(self, rep):
        rng = np.random.default_rng(2)
        p_plus, p_minus = sn.chiral_projectors(rep)
        eps = rng.standard_normal(4) + 1j * rng.standard_normal(4)
        out = sn.chiral_operator_check(0.3 + 0.7j, p_plus @ eps, p_minus @ eps, rep)
        assert out["linearity"] < 1e-13
        assert out["real_structure"] < 1e-13
        out2 = sn.chiral_operator_check(0.5, p_plus @ eps, p_minus @ eps, rep)
        assert out2["real_w_reduction"] < 1e-13

    def test_non_chiral_input_warns(self, rep):
        rng = np.random.default_rng(3)
        eps = rng.standard_normal(4) + 1j * rng.standard_normal(4)
        with pytest.warns(UserWarning):
            sn.chiral_operator_check(0.2, eps, eps, rep)
