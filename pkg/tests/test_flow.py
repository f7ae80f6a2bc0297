"""Time integration: scalar conformal flow and the (2,2)-form torus flow."""

import numpy as np
import pytest

from anomaly_flow import flow as fl
from anomaly_flow import grid as gr
from anomaly_flow import pointwise as pw

G16 = gr.PeriodicGrid(2, 16)
G32T = gr.PeriodicGrid(1, 32)


def zeros(g):
    return np.zeros(g.shape)


def test_fu_yau_rhs_stationary_zero():
    prob = fl.FuYauProblem(G16, 0.1, zeros(G16), zeros(G16))
    assert np.abs(fl.fu_yau_rhs(np.zeros(G16.shape), prob)).max() == 0.0


def test_fu_yau_rhs_constant_mu():
    c = 0.7
    prob = fl.FuYauProblem(G16, 0.05, zeros(G16), c * np.ones(G16.shape))
    u = 0.3 * np.ones(G16.shape)
    rhs = fl.fu_yau_rhs(u, prob)
    np.testing.assert_allclose(rhs, c * np.exp(-0.3), rtol=1e-12)


def test_fu_yau_rhs_linearization_about_zero():
    # u = eps cos(k x): rhs -> Lap u + O(eps^2); Lap eigenvalue is -1/2 here
    xs = G16.coords()
    eps = 1e-6
    u = eps * np.cos(xs[0]) * np.ones(G16.shape)
    prob = fl.FuYauProblem(G16, 1e-3, zeros(G16), zeros(G16))
    rhs = fl.fu_yau_rhs(u, prob)
    np.testing.assert_allclose(rhs, -0.5 * u, atol=1e-11)


def test_fu_yau_problem_validation():
    with pytest.raises(ValueError):
        fl.FuYauProblem(gr.PeriodicGrid(1, 16), 0.1, np.zeros((16, 16)), np.zeros((16, 16)))
    with pytest.raises(ValueError):
        fl.FuYauProblem(G16, 0.1, -np.ones(G16.shape), zeros(G16))
    with pytest.raises(ValueError):
        fl.FuYauProblem(G16, -0.1, zeros(G16), zeros(G16))


def test_parabolicity_margin_values():
    prob0 = fl.FuYauProblem(G16, 0.3, zeros(G16), zeros(G16))
    assert fl.parabolicity_margin(np.zeros(G16.shape), prob0) == pytest.approx(1.0)
    probf = fl.FuYauProblem(G16, 0.3, 2.0 * np.ones(G16.shape), zeros(G16))
    assert fl.parabolicity_margin(np.zeros(G16.shape), probf) == pytest.approx(1.0 + 0.3 * 2.0)


def test_parabolicity_margin_violated_by_spike():
    xs = G16.coords()
    u = 1.0 * np.cos(xs[0]) * np.ones(G16.shape)
    prob = fl.FuYauProblem(G16, 3.0, zeros(G16), zeros(G16))
    assert fl.parabolicity_margin(u, prob) <= 0.0


def test_fu_yau_run_stationary():
    prob = fl.FuYauProblem(G16, 0.1, zeros(G16), zeros(G16))
    hist = fl.fu_yau_run(prob, 1.0)
    assert hist.halt is None
    assert np.abs(hist.final_payload).max() == 0.0
    assert max(abs(x) for x in hist.monitors["conservation_gap"]) < 1e-14


def test_fu_yau_run_constant_mu_ode():
    c = 0.5
    prob = fl.FuYauProblem(G16, 0.05, zeros(G16), c * np.ones(G16.shape))
    hist = fl.fu_yau_run(prob, 1.0)
    assert hist.halt is None
    assert max(abs(x) for x in hist.monitors["conservation_gap"]) < 1e-8
    assert float(np.exp(hist.final_payload).mean()) == pytest.approx(1 + c * hist.final_t, rel=1e-8)


def test_fu_yau_run_mode_decay():
    xs = G16.coords()
    eps = 1e-3
    u0 = eps * np.cos(xs[0]) * np.ones(G16.shape)
    prob = fl.FuYauProblem(G16, 1e-3, zeros(G16), zeros(G16))
    hist = fl.fu_yau_run(prob, 0.1, u0=u0)

    def mode_amp(u):
        return abs(gr.forward(G16, u + 0j)[1, 0, 0, 0])

    ratio = mode_amp(hist.final_payload) / mode_amp(u0)
    assert ratio == pytest.approx(np.exp(-0.5 * hist.final_t), rel=1e-2)


def test_fu_yau_run_parabolicity_halt_snapshot():
    xs = G16.coords()
    u0 = 1.0 * np.cos(xs[0]) * np.ones(G16.shape)
    prob = fl.FuYauProblem(G16, 3.0, zeros(G16), zeros(G16))
    hist = fl.fu_yau_run(prob, 1.0, u0=u0)
    assert hist.halt is not None and hist.halt.reason == "parabolicity"
    # halt correctness: the snapshot reproduces the halt condition
    assert fl.parabolicity_margin(hist.halt.snapshot, prob) <= 0.0


def test_fu_yau_run_blowup_halts():
    prob = fl.FuYauProblem(G16, 0.0, zeros(G16), -3.0 * np.ones(G16.shape))
    hist = fl.fu_yau_run(prob, 1.0)
    assert hist.halt is not None
    assert hist.halt.t < 1.0


def test_fu_yau_parabolic_smoothing_energy_decay():
    xs = G16.coords()
    u0 = 1e-2 * (np.cos(xs[0]) + np.sin(xs[2] + xs[3])) * np.ones(G16.shape)
    prob = fl.FuYauProblem(G16, 1e-3, zeros(G16), zeros(G16))
    norms = []
    hist = fl.fu_yau_run(
        prob, 0.2, u0=u0, on_step=lambda s, t, dt, u, row: norms.append(gr.l2_norm(G16, u))
    )
    assert hist.halt is None
    assert all(b < a * (1 + 1e-12) for a, b in zip(norms, norms[1:]))


# --- torus flow ---


def test_torus_problem_validation_rejects_nonclosed_phi0():
    om0 = fl.make_balanced_omega0(G32T, 1.0, seed=3, amplitude=0.03)
    x, _ = G32T.coords()
    bad = np.zeros(G32T.shape + (3, 3), dtype=complex)
    bad[..., 0, 1] = 0.3 * np.exp(1j * x) * np.ones(G32T.shape)
    bad[..., 1, 0] = 0.3 * np.exp(-1j * x) * np.ones(G32T.shape)
    with pytest.raises(ValueError):
        fl.TorusProblem(G32T, 0.1, 1.0, bad, om0)


def test_torus_problem_validation_rejects_unbalanced_start():
    x, _ = G32T.coords()
    conf = (1.0 + 0.2 * np.cos(x)) * np.ones(G32T.shape)
    om0 = 2 * conf[..., None, None] * np.eye(3)  # conformal metric is not balanced
    with pytest.raises(ValueError):
        fl.TorusProblem(G32T, 0.1, 1.0, np.zeros(G32T.shape + (3, 3)), om0)


def test_torus_rhs_flat_stationary():
    om0 = np.broadcast_to(2 * np.eye(3, dtype=complex), G32T.shape + (3, 3)).copy()
    prob = fl.TorusProblem(G32T, 0.3, 1.0, np.zeros(G32T.shape + (3, 3)), om0)
    assert np.abs(fl.torus_rhs(prob.psi0, prob)).max() < 1e-14


def test_torus_rhs_matches_public_composition():
    om0 = fl.make_balanced_omega0(G32T, 1.0, seed=5, amplitude=0.03)
    prob = fl.TorusProblem(G32T, 0.2, 1.0, np.zeros(G32T.shape + (3, 3)), om0)
    psi = prob.psi0
    omega, _ = pw.omega_from_psi(psi, 1.0)
    omega_d = gr.dealias(G32T, omega)
    ref = gr.i_ddbar_11(G32T, omega_d) + 0.2 * (
        gr.tr_r_wedge_r(G32T, gr.chern_curvature(G32T, omega_d)) - prob.phi0
    )
    got = fl.torus_rhs(psi, prob)
    assert np.abs(got - ref).max() < 1e-12 * max(np.abs(ref).max(), 1.0)


def test_torus_rhs_is_closed():
    om0 = fl.make_balanced_omega0(G32T, 1.0, seed=6, amplitude=0.03)
    prob = fl.TorusProblem(G32T, 0.15, 1.0, np.zeros(G32T.shape + (3, 3)), om0)
    rhs = fl.torus_rhs(prob.psi0, prob)
    norm = gr.l2_norm(G32T, rhs)
    assert norm > 1e-8  # non-stationary start
    assert gr.d_residual_22(G32T, rhs) < 1e-8


def test_torus_stationary_fixture():
    prob = fl.make_stationary_torus_problem(G32T, 1.0, 0.2, seed=4, amplitude=0.04)
    assert fl.stationarity_report(prob.psi0, prob) < 1e-10
    hist = fl.torus_run(prob, 0.1, fl.DtControl(dt_fixed=0.002))
    assert hist.halt is None
    np.testing.assert_allclose(hist.final_payload, prob.psi0, atol=1e-12)
    for name in fl.TORUS_MONITORS:
        vals = hist.monitors[name]
        assert max(vals) - min(vals) < 1e-10


def test_torus_balanced_preservation_and_dt_halving():
    om0 = fl.make_balanced_omega0(G32T, 1.0, seed=8, amplitude=0.04)
    prob = fl.TorusProblem(G32T, 0.0, 1.0, np.zeros(G32T.shape + (3, 3)), om0)
    r0 = gr.d_residual_22(G32T, prob.psi0)

    def drift(dt, steps):
        hist = fl.torus_run(prob, dt * steps, fl.DtControl(dt_fixed=dt))
        res = hist.monitors["balanced_residual"]
        assert hist.halt is None
        return max(res) - r0, hist

    d1, h1 = drift(0.01, 200)
    d2, _ = drift(0.005, 200)
    assert max(h1.monitors["balanced_residual"]) < 1e-7
    assert d2 <= max(0.6 * d1, 1e-12)


def test_torus_stationarity_report_decreases_on_converging_run():
    prob = fl.make_stationary_torus_problem(G32T, 1.0, 0.2, seed=9, amplitude=0.03)
    # perturb the stationary state: the flow should move back down the residual
    rng = np.random.default_rng(1)
    pert = gr.i_ddbar_11(G32T, gr.random_bandlimited_herm3(G32T, rng, 2, 0.01))
    psi = prob.psi0 + pw.hermitize(pert)
    r_start = fl.stationarity_report(psi, prob)
    assert r_start > 1e-6
    prob2 = fl.TorusProblem(G32T, prob.alpha_p, prob.abs_omega, prob.phi0,
                            pw.omega_from_psi(psi, prob.abs_omega)[0])
    hist = fl.torus_run(prob2, 2.0)
    assert hist.halt is None
    r_end = fl.stationarity_report(hist.final_payload, prob)
    assert r_end < 0.5 * r_start
    rhs_norms = hist.monitors["rhs_norm"]
    assert rhs_norms[-1] < rhs_norms[0]


def test_torus_positivity_halt():
    # an aggressively non-positive direction forces a positivity halt:
    # shrink Psi towards a degenerate matrix by flowing a doctored problem
    om0 = fl.make_balanced_omega0(G32T, 1.0, seed=10, amplitude=0.02)
    phi0 = np.zeros(G32T.shape + (3, 3), dtype=complex)
    prob = fl.TorusProblem(G32T, 0.0, 1.0, phi0, om0)
    # huge fixed dt destabilizes RK4 -> non-finite or positivity halt
    hist = fl.torus_run(prob, 50.0, fl.DtControl(dt_fixed=1.0))
    assert hist.halt is not None
    assert hist.halt.reason in ("positivity", "instability")


def test_stationarity_zero_iff_rhs_zero():
    prob = fl.make_stationary_torus_problem(G32T, 1.0, 0.25, seed=12, amplitude=0.03)
    assert gr.l2_norm(G32T, fl.torus_rhs(prob.psi0, prob)) < 1e-12
    assert fl.stationarity_report(prob.psi0, prob) < 1e-12
    rng = np.random.default_rng(2)
    pert = pw.hermitize(gr.i_ddbar_11(G32T, gr.random_bandlimited_herm3(G32T, rng, 2, 0.02)))
    psi = prob.psi0 + pert
    assert fl.stationarity_report(psi, prob) > 1e-7
