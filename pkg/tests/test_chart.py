import numpy as np
import pytest

from toricflow import chart as C
from toricflow.errors import (
    ConfigError,
    DegenerateFrame,
    DegeneratePotential,
    EmptyLevelSet,
    MeshTooCoarse,
    StepSizeFailure,
)
from toricflow.potentials import ExpressionPotential, FlatPotential, make_potential

PI = np.pi


def flat_chart(m):
    return C.TorusChart(FlatPotential(m), (1,) * m)


def lee_wang_sample(seed=42):
    ch = flat_chart(2)
    return ch, C.sample_level_set(ch, [[1.0, 1.0]], [1.0], 1, seed=seed)[0]


# -- potentials -------------------------------------------------------------


def fd_check_derivatives(pot, x, tol=1e-6):
    h = 1e-5
    m = pot.m
    g = pot.grad(x)
    for j in range(m):
        e = np.zeros(m)
        e[j] = h
        fd = (pot.value(x + e) - pot.value(x - e)) / (2 * h)
        assert abs(fd - g[j]) <= tol * max(1.0, abs(g[j]))
    hs = pot.hess(x)
    for j in range(m):
        e = np.zeros(m)
        e[j] = h
        fd = (pot.grad(x + e) - pot.grad(x - e)) / (2 * h)
        assert np.allclose(fd, hs[:, j], rtol=tol, atol=tol)
    t3 = pot.third(x)
    for j in range(m):
        e = np.zeros(m)
        e[j] = h
        fd = (pot.hess(x + e) - pot.hess(x - e)) / (2 * h)
        assert np.allclose(fd, t3[:, :, j], rtol=1e-5, atol=1e-5)


def test_flat_potential_derivatives_match_fd():
    rng = np.random.default_rng(1)
    pot = FlatPotential(3)
    for _ in range(20):
        fd_check_derivatives(pot, rng.uniform(-1, 1, 3))


def test_expression_potential_derivatives_match_fd():
    pot = ExpressionPotential("exp(2*x1)/4 + exp(2*x2)/4 + exp(x1 + 2*x2)/20", 2)
    rng = np.random.default_rng(2)
    for _ in range(10):
        fd_check_derivatives(pot, rng.uniform(-0.8, 0.5, 2))


def test_expression_potential_rejects_bad_input():
    with pytest.raises(ConfigError):
        ExpressionPotential("exp(2*x1) + y", 1)
    with pytest.raises(ConfigError):
        ExpressionPotential("import os", 1)


def test_make_potential_flat():
    assert isinstance(make_potential("flat", 2), FlatPotential)


def test_degenerate_potential_rejected():
    with pytest.raises(DegeneratePotential):
        C.TorusChart(ExpressionPotential("-(x1*x1)", 1), (1,))


# -- moment map and sampling -------------------------------------------------


def test_moment_map_flat():
    ch = flat_chart(3)
    x = np.array([0.3, -0.1, 0.7])
    assert np.allclose(ch.moment(x), np.exp(2 * x) / 2)
    assert np.max(ch.moment(np.full(3, -12.0))) < 1e-8  # toward the vertex


def test_psi_flat_zero_and_torus_invariant():
    ch = flat_chart(2)
    rng = np.random.default_rng(3)
    for _ in range(5):
        x = rng.uniform(-1, 1, 2)
        assert abs(ch.psi(x)) < 1e-12


def test_sample_level_set_constraints():
    ch = flat_chart(2)
    samples = C.sample_level_set(ch, [[1.0, 1.0]], [1.0], 25, seed=42)
    for s in samples:
        assert abs(np.exp(2 * s.x).sum() / 2 - 1.0) < 1e-10


def test_sample_level_set_n0_box():
    ch = flat_chart(2)
    samples = C.sample_level_set(ch, [], [], 10, seed=0)
    assert len(samples) == 10
    assert all(s.n == 0 for s in samples)


def test_sample_level_set_empty():
    ch = flat_chart(2)
    with pytest.raises(EmptyLevelSet):
        C.sample_level_set(ch, [[1.0, 1.0]], [-1.0], 3, seed=0, max_failures=20)


# -- pointwise identities -----------------------------------------------------


def test_lagrangian_residual_small_and_control():
    ch = flat_chart(2)
    samples = C.sample_level_set(ch, [[1.0, 1.0]], [1.0], 30, seed=7)
    worst = max(C.lagrangian_residual(s) for s in samples)
    assert worst < 1e-8
    bad = max(C.lagrangian_residual(C.perturbed(s, 0.1, seed=i))
              for i, s in enumerate(samples))
    assert bad > 1e-4


def test_real_form_sample_is_lagrangian():
    ch = flat_chart(3)
    for s in C.sample_level_set(ch, [], [], 5, seed=11):
        assert C.lagrangian_residual(s) < 1e-8


def test_splitting_residual():
    ch = flat_chart(2)
    for s in C.sample_level_set(ch, [[1.0, 1.0]], [1.0], 10, seed=5):
        assert C.splitting_residual(s) < 1e-8


def test_angle_closed_form_values():
    ch, s = lee_wang_sample()
    # v = 0: theta = pi/2 for one slicing direction
    s0 = C.ChartSample(chart=ch, zeta=s.zeta, c=s.c, x=s.x, signs=s.signs,
                       v=np.zeros(2))
    assert abs(C.lagrangian_angle(s0, "closed") - PI / 2) < 1e-12
    assert C.angle_gap_mod_pi(C.lagrangian_angle(s0, "closed"),
                              C.lagrangian_angle(s0, "pullback")) < 1e-9
    # v = 0.1 * (1,1): theta = 0.4 pi + pi/2 mod pi = 0.9 pi
    s1 = C.ChartSample(chart=ch, zeta=s.zeta, c=s.c, x=s.x, signs=s.signs,
                       v=0.1 * np.array([1.0, 1.0]))
    assert abs(C.lagrangian_angle(s1, "closed") - 0.9 * PI) < 1e-12
    assert C.angle_gap_mod_pi(C.lagrangian_angle(s1, "closed"),
                              C.lagrangian_angle(s1, "pullback")) < 1e-9


def test_angle_real_form_special_lagrangian():
    ch = flat_chart(2)
    for s in C.sample_level_set(ch, [], [], 5, seed=13):
        th = C.lagrangian_angle(s, "pullback")
        assert min(th, PI - th) < 1e-9  # 0 mod pi


def test_angle_methods_agree_many_samples():
    for m in (2, 3):
        ch = flat_chart(m)
        zeta = [[1.0] * m]
        samples = C.sample_level_set(ch, zeta, [1.0], 50, seed=21)
        gap = max(
            C.angle_gap_mod_pi(C.lagrangian_angle(s, "closed"),
                               C.lagrangian_angle(s, "pullback"))
            for s in samples
        )
        assert gap < 1e-6


def test_degenerate_frame_raises():
    ch, s = lee_wang_sample()
    bad = C.ChartSample(chart=ch, zeta=s.zeta, c=s.c, x=s.x, signs=s.signs,
                        v=s.v, level_frame=np.zeros_like(s.level_frame))
    with pytest.raises(DegenerateFrame):
        C.lagrangian_angle(bad, "pullback")


# -- curvature ---------------------------------------------------------------


def test_flat_K_equals_H_equals_JgradTheta():
    ch, s = lee_wang_sample()
    patch = C.level_set_patch(ch, s)
    rep = C.psi_and_K(patch)
    assert abs(rep.psi) < 1e-12
    assert rep.residual < 1e-3
    assert rep.step_agreement < 1e-2
    # flat case: psi == 0 so K == H
    d = rep.generalized - rep.mean_curvature
    assert ch.metric(s.x, d, d) ** 0.5 < 1e-9
    # circle-bundle magnitude: |K| = sqrt(2/c) for the (1,1) slice at c=1
    assert abs(ch.metric(s.x, rep.generalized, rep.generalized) ** 0.5 - np.sqrt(2.0)) < 1e-4


def test_weighted_potential_K_identity_nontrivial():
    pot = ExpressionPotential("exp(2*x1)/4 + exp(2*x2)/4 + exp(x1 + 2*x2)/20", 2)
    ch = C.TorusChart(pot, (1, 1))
    s = C.sample_level_set(ch, [[1.0, 1.0]], [1.0], 1, seed=3)[0]
    patch = C.level_set_patch(ch, s)
    rep = C.psi_and_K(patch)
    corr = rep.mean_curvature - rep.generalized  # m (grad psi)^perp
    assert ch.metric(s.x, corr, corr) ** 0.5 > 1e-2  # correction genuinely active
    assert rep.residual < 1e-3  # K matches J grad theta
    hdiff = rep.mean_curvature - rep.j_grad_theta
    assert ch.metric(s.x, hdiff, hdiff) ** 0.5 > 1e-2  # bare H alone does not


def test_totally_geodesic_real_form():
    ch = flat_chart(2)
    s = C.sample_level_set(ch, [], [], 1, seed=1)[0]
    rep = C.psi_and_K(C.level_set_patch(ch, s))
    assert ch.metric(s.x, rep.mean_curvature, rep.mean_curvature) ** 0.5 < 1e-6
    assert ch.metric(s.x, rep.generalized, rep.generalized) ** 0.5 < 1e-6


def test_circle_mean_curvature_radius_law():
    ch = C.TorusChart(FlatPotential(1), (1,))
    s = C.sample_level_set(ch, [[1.0]], [1.0], 1, seed=0)[0]
    rep = C.psi_and_K(C.level_set_patch(ch, s))
    r = np.sqrt(2.0)  # moment level c=1 -> |w| = sqrt(2c)
    assert abs(ch.metric(s.x, rep.mean_curvature, rep.mean_curvature) ** 0.5 - 1 / r) < 1e-6


def test_step_size_guard():
    ch, s = lee_wang_sample()
    patch = C.level_set_patch(ch, s)
    with pytest.raises(StepSizeFailure):
        C.psi_and_K(patch, tol=1e-12)


# -- weighted Laplacian -------------------------------------------------------


def test_laplacian_theta_small_on_level_sets():
    ch, s = lee_wang_sample()
    patch = C.level_set_patch(ch, s)
    assert abs(C.weighted_laplacian_theta(patch)) < 1e-3


def test_laplacian_theta_exact_zero_when_stationary():
    ch = flat_chart(2)
    s = C.sample_level_set(ch, [[1.0, -1.0]], [0.2], 1, seed=9)[0]
    patch = C.level_set_patch(ch, s)
    assert C.weighted_laplacian_theta(patch) == 0.0  # theta constant to the bit


def test_laplacian_negative_control():
    ch, s = lee_wang_sample()
    patch = C.level_set_patch(ch, s)

    def fn(u):
        x = patch.phi(u)[:2]
        return float(np.exp(2 * x[0]) / 2)  # <mu, e1>: curved along the level set

    assert abs(C.weighted_laplacian(patch, fn)) > 1e-2


def test_laplacian_mesh_guard():
    ch, s = lee_wang_sample()
    patch = C.level_set_patch(ch, s)
    with pytest.raises(MeshTooCoarse):
        C.weighted_laplacian_theta(patch, h=0.5)


# -- flow law ----------------------------------------------------------------


def test_flow_law_lee_wang():
    ch, s = lee_wang_sample()
    fr = C.flow_residual(s, (1, 1))
    assert fr.targets == (-2 * PI * 2.0,)  # -2 pi <gamma, zeta> = -4 pi
    assert abs(fr.pairings[0] - fr.targets[0]) < 1e-3 * abs(fr.targets[0])
    assert fr.tangential < 1e-3


def test_flow_law_stationary():
    ch = flat_chart(2)
    s = C.sample_level_set(ch, [[1.0, -1.0]], [0.2], 1, seed=9)[0]
    fr = C.flow_residual(s, (1, 1))
    assert fr.span < 1e-6
    assert fr.tangential < 1e-6
    assert np.linalg.norm(fr.velocity) < 1e-12


def test_flow_law_c3():
    ch = flat_chart(3)
    s = C.sample_level_set(ch, [[1.0, 2.0, 0.5]], [1.5], 1, seed=17)[0]
    fr = C.flow_residual(s, (1, 1, 1))
    scale = max(abs(t) for t in fr.targets)
    assert fr.span < 1e-3 * scale
    assert fr.tangential < 1e-3 * scale


# -- first variation ----------------------------------------------------------


def bump2(u, r=0.5):
    return C.smooth_bump(u[0] / r) * C.smooth_bump(u[1] / r)


def test_first_variation_stationary():
    ch, s = lee_wang_sample()
    patch = C.level_set_patch(ch, s)
    fv = C.first_variation_check(patch, bump2, radius=0.5, npts=17)
    assert abs(fv.lhs) < 1e-3 * fv.h0_sup
    assert abs(fv.rhs) < 1e-3 * fv.h0_sup


def test_first_variation_zero_deformation():
    ch, s = lee_wang_sample()
    patch = C.level_set_patch(ch, s)
    fv = C.first_variation_check(patch, lambda u: 0.0, radius=0.4, npts=9)
    assert fv.lhs == 0.0 and fv.rhs == 0.0


def test_first_variation_nonstationary_control():
    ch = flat_chart(2)
    patch = C.graph_patch(ch, [lambda t: 0.4 * np.sin(t), lambda t: 0.3 * np.sin(1.3 * t)])
    fv = C.first_variation_check(patch, bump2, radius=0.5, npts=25)
    assert abs(fv.rhs) > 1e-2  # genuinely non-stationary
    assert abs(fv.lhs - fv.rhs) < 0.05 * abs(fv.rhs)
