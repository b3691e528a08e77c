import numpy as np
import pytest

from wavelab.core import (
    Grid, arctan_damping, make_localization, sine_profile,
    smooth_indicator_profile, zero_function,
)
from wavelab.multipliers import (
    elliptic_multiplier, elliptic_solve, multiplier_terms,
)
from wavelab.solver import InitialData, Scenario, run_simulation


class TestEllipticSolve:
    def test_constant_forcing_exact(self):
        g = Grid(128)
        v = elliptic_solve(np.ones(g.n_nodes), g)
        xs = g.nodes
        np.testing.assert_allclose(v, 0.5 * xs * (xs - 1.0), atol=1e-14)
        assert v[g.n_cells // 2] == pytest.approx(-0.125, rel=1e-13)

    def test_dirichlet_walls(self):
        g = Grid(64)
        v = elliptic_solve(np.exp(g.nodes), g)
        assert v[0] == 0.0
        assert abs(v[-1]) <= 1e-14

    def test_discrete_second_difference_reproduces_forcing(self):
        # the cumulative-trapezoid Green form telescopes exactly
        g = Grid(64)
        h = np.exp(g.nodes) * np.cos(3 * g.nodes)
        v = elliptic_solve(h, g)
        resid = (v[:-2] - 2 * v[1:-1] + v[2:]) / g.dx ** 2 - h[1:-1]
        assert np.max(np.abs(resid)) <= 1e-11

    def test_linearity(self):
        g = Grid(32)
        h1 = np.sin(np.pi * g.nodes)
        h2 = g.nodes * (1 - g.nodes)
        lhs = elliptic_solve(2.0 * h1 - 3.0 * h2, g)
        rhs = 2.0 * elliptic_solve(h1, g) - 3.0 * elliptic_solve(h2, g)
        np.testing.assert_allclose(lhs, rhs, atol=1e-14)

    def test_second_order_against_exact_solution(self):
        errs = []
        for n in (64, 128):
            g = Grid(n)
            v = elliptic_solve(np.pi ** 2 * np.sin(np.pi * g.nodes), g)
            errs.append(np.max(np.abs(v + np.sin(np.pi * g.nodes))))
        assert np.log2(errs[0] / errs[1]) == pytest.approx(2.0, abs=0.1)

    def test_multiplier_wrapper_signs(self):
        # nonnegative forcing f(y) >= 0 with beta >= 0 gives v <= 0
        g = Grid(64)
        y = np.sin(np.pi * g.nodes)
        v = elliptic_multiplier(y, np.ones(g.n_nodes), 2.0, g)
        assert np.all(v <= 1e-15)

    def test_regime_validation(self):
        g = Grid(16)
        with pytest.raises(ValueError):
            elliptic_multiplier(np.zeros(17), np.zeros(17), 1.0, g)


@pytest.fixture(scope="module")
def localized_run():
    sc = Scenario(name="mult", grid=Grid(128), t_final=6.0, p_list=(1.5, 2.0),
                  g=arctan_damping(),
                  a=smooth_indicator_profile(0.7, 1.0, 2.0, 0.05),
                  initial=InitialData.from_profiles(
                      sine_profile(1, amplitude=0.5), zero_function()))
    traj = run_simulation(sc)
    triple = make_localization((sc.a.omega[0], 1.0), None, sc.grid)
    return traj, triple


class TestMultiplierTerms:
    def test_all_terms_finite_and_nonnegative(self, localized_run):
        traj, triple = localized_run
        rep = multiplier_terms(traj, triple, 2.0, (0.0, 6.0))
        assert set(rep.terms) == {"S1", "S2", "S3", "S4",
                                  "T1", "T2", "T3", "T4", "T5",
                                  "V1", "V2", "V3"}
        for name, value in rep.terms.items():
            assert np.isfinite(value) and value >= 0.0, name

    def test_regime_labels(self, localized_run):
        traj, triple = localized_run
        assert multiplier_terms(traj, triple, 2.0, (0.0, 6.0)).regime == "p_geq_2"
        assert multiplier_terms(traj, triple, 1.5, (0.0, 6.0)).regime == "p_in_1_2"

    def test_observability_chain_constant_bounded(self, localized_run):
        # int_S^T E_p dt <= C (E_p(S) + S4): the empirical C must stay modest
        traj, triple = localized_run
        rep = multiplier_terms(traj, triple, 2.0, (0.0, 6.0))
        assert 0.0 < rep.chain_constants["first_set"] <= 6.0  # window length

    def test_s4_bounded_by_full_energy_integral(self, localized_run):
        # S4 integrates the same density as E_p but only over Q1
        traj, triple = localized_run
        rep = multiplier_terms(traj, triple, 2.0, (0.0, 6.0))
        assert rep.terms["S4"] <= 2.0 * rep.int_energy + 1e-12

    def test_eta_table_tracks_young_inequality(self, localized_run):
        traj, triple = localized_run
        rep = multiplier_terms(traj, triple, 2.0, (0.0, 6.0))
        for eta, row in rep.eta_table.items():
            assert row["second_set"] >= 0.0

    def test_window_outside_run_rejected(self, localized_run):
        traj, triple = localized_run
        with pytest.raises(ValueError):
            multiplier_terms(traj, triple, 2.0, (0.0, 60.0))

    def test_needs_kept_states(self, localized_run):
        _, triple = localized_run
        sc = Scenario(name="thin", grid=Grid(64), t_final=2.0, p_list=(2.0,),
                      g=arctan_damping(),
                      a=smooth_indicator_profile(0.7, 1.0, 2.0, 0.05),
                      initial=InitialData.from_profiles(
                          sine_profile(1, amplitude=0.5), zero_function()))
        traj = run_simulation(sc, keep_states=False)
        with pytest.raises(ValueError):
            multiplier_terms(traj, triple, 2.0, (0.0, 2.0))
