import numpy as np
import pytest

from dcggm import (
    GlassoOptions,
    NonConvergence,
    NotPositiveDefinite,
    edge_support,
    glasso_fit,
    inv_pd,
    is_positive_definite,
    kkt_residual,
    lasso_cd,
    objective_penalized,
)
from conftest import random_spd


class TestLassoCd:
    def test_separable_soft_threshold(self):
        beta = lasso_cd(np.eye(2), np.array([3.0, 0.5]), np.array([1.0, 1.0]))
        assert np.allclose(beta, [2.0, 0.0], atol=1e-12)

    def test_zero_penalty_is_least_squares(self):
        q = random_spd(5, 3)
        b = np.arange(1.0, 6.0)
        beta = lasso_cd(q, b, 0.0, inner_tol=1e-10)
        assert np.abs(beta - np.linalg.solve(q, b)).max() < 1e-6

    def test_zero_rhs(self):
        q = random_spd(4, 5)
        assert np.array_equal(lasso_cd(q, np.zeros(4), 0.5), np.zeros(4))

    def test_warm_start_used(self):
        q = random_spd(3, 9)
        b = np.array([1.0, -2.0, 0.5])
        cold = lasso_cd(q, b, 0.1, inner_tol=1e-10)
        warm = lasso_cd(q, b, 0.1, beta0=cold, inner_tol=1e-10)
        assert np.abs(warm - cold).max() < 1e-8

    def test_stationarity(self):
        q = random_spd(6, 17)
        b = np.linspace(-1, 1, 6)
        rho = np.full(6, 0.05)
        tol = 1e-9
        beta = lasso_cd(q, b, rho, inner_tol=tol)
        for j in range(6):
            resid = b[j] - (q[j] @ beta - q[j, j] * beta[j])
            target = np.sign(resid) * max(abs(resid) - rho[j], 0.0) / q[j, j]
            assert beta[j] == pytest.approx(target, abs=1e-7)

    def test_not_positive_definite(self):
        with pytest.raises(NotPositiveDefinite):
            lasso_cd(np.array([[1.0, 2.0], [2.0, 1.0]]), np.ones(2), 0.1)

    def test_non_convergence_raises(self):
        q = random_spd(5, 2)
        b = np.ones(5)
        with pytest.raises(NonConvergence):
            lasso_cd(q, b, 0.0, inner_tol=1e-14, max_sweeps=1)


class TestGlassoFit:
    def test_diagonal_closed_form(self):
        sol = glasso_fit(np.diag([2.0, 4.0]), 0.5)
        assert np.allclose(sol.omega, np.diag([1 / 2.5, 1 / 4.5]), atol=1e-12)
        assert sol.kkt_residual <= 1e-8
        assert sol.converged

    def test_zero_penalty_recovers_inverse(self):
        s = random_spd(4, 19)
        sol = glasso_fit(s, 0.0)
        assert np.abs(sol.omega - inv_pd(s)).max() < 1e-5

    def test_lambda_max_gives_diagonal(self):
        s = random_spd(5, 23)
        lam = np.abs(s - np.diag(np.diag(s))).max()
        sol = glasso_fit(s, lam)
        off = sol.omega - np.diag(np.diag(sol.omega))
        assert np.abs(off).max() == 0.0
        assert sol.kkt_residual <= 1e-4 * (1 + np.abs(s).max())

    def test_omega_positive_definite(self):
        for seed in range(4):
            s = random_spd(8, 40 + seed)
            sol = glasso_fit(s, 0.1)
            assert is_positive_definite(sol.omega)

    def test_omega_sigma_near_inverse_pair(self):
        s = random_spd(10, 51)
        sol = glasso_fit(s, 0.05)
        assert np.abs(sol.omega @ sol.sigma - np.eye(10)).max() < 1e-4

    @pytest.mark.parametrize("p,seed", [(5, 1), (20, 2), (50, 3)])
    def test_kkt_residual_at_convergence(self, p, seed):
        s = random_spd(p, seed)
        lam = 0.2 * np.abs(s - np.diag(np.diag(s))).max()
        sol = glasso_fit(s, lam)
        assert sol.converged
        assert sol.kkt_residual <= 1e-4 * (1 + np.abs(s).max())

    def test_edge_count_monotone_in_lambda(self):
        s = random_spd(12, 77)
        lam_max = np.abs(s - np.diag(np.diag(s))).max()
        counts = [len(edge_support(glasso_fit(s, lam).omega))
                  for lam in np.linspace(0.0, lam_max, 10)]
        assert all(a >= b for a, b in zip(counts, counts[1:]))

    def test_scalar_equals_constant_matrix_penalty(self):
        s = random_spd(6, 91)
        a = glasso_fit(s, 0.07).omega
        b = glasso_fit(s, np.full((6, 6), 0.07)).omega
        assert np.abs(a - b).max() <= 1e-10

    def test_warm_start_close_to_cold(self):
        s = random_spd(8, 13)
        opts = GlassoOptions(tol=1e-9)
        lam = 0.1 * np.abs(s - np.diag(np.diag(s))).max()
        prev = glasso_fit(s, 2 * lam, opts)
        cold = glasso_fit(s, lam, opts)
        warm = glasso_fit(s, lam, opts, warm=prev)
        assert np.abs(warm.omega - cold.omega).max() <= 1e-6

    def test_penalize_diagonal_off(self):
        s = np.diag([2.0, 4.0])
        sol = glasso_fit(s, 0.5, GlassoOptions(penalize_diagonal=False))
        assert np.allclose(sol.omega, np.diag([0.5, 0.25]), atol=1e-12)

    def test_sigma0_not_pd_raises(self):
        # indefinite input with zero penalty cannot be initialized
        x = np.array([[1.0, 2.0], [2.0, 1.0]])
        with pytest.raises(NotPositiveDefinite):
            glasso_fit(x, 0.0)

    def test_non_convergence_flagged_not_raised(self):
        s = random_spd(10, 67)
        sol = glasso_fit(s, 0.01, GlassoOptions(tol=1e-14, max_sweeps=1))
        assert not sol.converged
        assert is_positive_definite(sol.omega)

    def test_p1(self):
        sol = glasso_fit(np.array([[2.0]]), 0.5)
        assert sol.omega[0, 0] == pytest.approx(0.4)


class TestKktResidual:
    def test_exact_identity(self):
        assert kkt_residual(np.eye(3), np.eye(3), 0.0) == 0.0

    def test_diagonal_solution(self):
        sol = glasso_fit(np.diag([2.0, 4.0]), 0.5)
        assert kkt_residual(sol.omega, np.diag([2.0, 4.0]), 0.5) <= 1e-8

    def test_zero_entry_slack(self):
        s = np.eye(2)
        s[0, 1] = s[1, 0] = 0.3
        assert kkt_residual(np.eye(2), s, 0.1) == pytest.approx(0.2)


class TestObjectivePenalized:
    def test_identity_unpenalized(self):
        assert objective_penalized(np.eye(4), np.eye(4), 0.0) == pytest.approx(4.0)

    def test_identity_penalized(self):
        assert objective_penalized(np.eye(4), np.eye(4), 1.0) == pytest.approx(8.0)

    def test_scaled_diagonal(self):
        got = objective_penalized(np.diag([2.0, 2.0]), np.eye(2), 0.0)
        assert got == pytest.approx(-2 * np.log(2.0) + 4.0)
