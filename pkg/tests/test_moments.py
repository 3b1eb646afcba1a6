import numpy as np
import pytest

from sdemoments import (ExpmOptions, Formulation, LinearSde, MomentState,
                        SdeClass, assemble, build_beta, build_C, build_calA,
                        build_script_B, expm, moment_ode_rhs, moments_at,
                        moments_baseline, propagate_grid, rk4_moments, vec)
from sdemoments.moments import _wants_action
from support import CLASSES, random_stable_model, random_state, rel_diff


def test_calA_scalar_reduction():
    sde = LinearSde(d=1, m=2, A=[[-0.7]], a0=[0.0],
                    B=[[[0.3]], [[0.5]]], b0=[[0.0], [0.0]])
    np.testing.assert_allclose(build_calA(sde),
                               [[2 * -0.7 + 0.3 ** 2 + 0.5 ** 2]], rtol=1e-15)


def test_calA_drives_homogeneous_second_moment():
    # e^{calA t} vec(P0) solves dP/dt = AP + PA^T + sum B P B^T
    rng = np.random.default_rng(40)
    for _ in range(5):
        d = int(rng.integers(1, 4))
        sde, _ = random_stable_model(rng, d, "autonomous_multiplicative", m=2)
        hom = LinearSde(d=d, m=sde.m, A=sde.A, a0=np.zeros(d), B=sde.B,
                        b0=np.zeros((sde.m, d)), t0=sde.t0)
        state = MomentState(m0=np.zeros(d), P0=random_state(rng, d).P0)
        want = rk4_moments(hom, state, sde.t0 + 1.0, 2000).secmom
        got = expm(build_calA(hom), 1.0) @ vec(state.P0)
        np.testing.assert_allclose(got.reshape((d, d), order="F"), want,
                                   rtol=0, atol=1e-8 * np.abs(want).max())


def test_build_C_autonomous_scalar():
    sde = LinearSde(d=1, m=0, A=[[-2.0]], a0=[3.0], t0=0.0)
    state = MomentState(m0=[0.5], P0=[[0.25]])
    C, L, r = build_C(sde, state, SdeClass.AUTONOMOUS_ADDITIVE)
    np.testing.assert_allclose(C, [[-2.0, -2.0 * 0.5 + 3.0], [0.0, 0.0]])
    np.testing.assert_array_equal(L, [[1.0, 0.0]])
    np.testing.assert_array_equal(r, [0.0, 1.0])


def test_build_C_non_autonomous_shape():
    sde = LinearSde(d=2, m=0, A=-np.eye(2), a0=[0.0, 0.0], a1=[1.0, 2.0])
    state = MomentState(m0=[0.0, 0.0], P0=np.zeros((2, 2)))
    C, L, r = build_C(sde, state, SdeClass.NON_AUTONOMOUS)
    assert C.shape == (4, 4)
    np.testing.assert_array_equal(C[:2, 2], [1.0, 2.0])
    assert C[2, 3] == 1.0
    assert L.shape == (2, 4) and r.shape == (4,)


def test_build_C_solves_mean_ode():
    rng = np.random.default_rng(41)
    for kind in CLASSES:
        sde, state = random_stable_model(rng, 3, kind)
        cls = (SdeClass.NON_AUTONOMOUS if kind == "non_autonomous"
               else SdeClass.AUTONOMOUS_MULTIPLICATIVE)
        C, L, r = build_C(sde, state, cls)
        t = sde.t0 + 0.8
        mean = state.m0 + L @ (expm(C, 0.8) @ r)
        want = rk4_moments(sde, state, t, 4000).mean
        np.testing.assert_allclose(mean, want, rtol=0,
                                   atol=1e-9 * max(np.abs(want).max(), 1.0))


def test_beta_zero_model():
    sde = LinearSde(d=2, m=2, A=np.zeros((2, 2)), a0=np.zeros(2),
                    b0=np.zeros((2, 2)))
    betas = build_beta(sde)
    for b in betas:
        np.testing.assert_array_equal(b, np.zeros_like(b))


def test_beta_scalar_hand_case():
    a0, a1, sigma, B = 0.4, 0.2, 0.7, -0.9
    t0 = 0.5
    sde = LinearSde(d=1, m=1, A=[[B]], a0=[a0], a1=[a1], B=[[[B]]],
                    b0=[[sigma]], t0=t0)
    betas = build_beta(sde)
    abar = a0 + a1 * t0
    np.testing.assert_allclose(betas.beta1, [[sigma ** 2]], rtol=1e-15)
    np.testing.assert_allclose(betas.beta2, [[0.0]], atol=0)
    np.testing.assert_allclose(betas.beta4, [[2 * abar + 2 * sigma * B]],
                               rtol=1e-15)
    np.testing.assert_allclose(betas.beta5, [[2 * a1]], rtol=1e-15)


def test_script_B_matches_direct_forcing():
    # B1 + B2 s + B3 s^2 + (B4 + s B5) e^{C s} r reproduces the exact
    # inhomogeneity of the second-moment ODE along the true mean path
    rng = np.random.default_rng(42)
    for _ in range(5):
        d = int(rng.integers(1, 4))
        sde, state = random_stable_model(rng, d, "non_autonomous")
        sb = build_script_B(sde, state, SdeClass.NON_AUTONOMOUS)
        C, _, r = build_C(sde, state, SdeClass.NON_AUTONOMOUS)
        for s in (0.0, 0.3, 1.2):
            mean_s = moments_at(sde, state, sde.t0 + s).mean
            _, forcing = moment_ode_rhs(sde, mean_s, np.zeros((d, d)),
                                        sde.t0 + s)
            flow = expm(C, s) @ r
            got = (sb.B1 + sb.B2 * s + sb.B3 * s ** 2
                   + (sb.B4 + s * sb.B5) @ flow)
            np.testing.assert_allclose(
                got, vec(forcing), rtol=0,
                atol=1e-10 * max(np.abs(forcing).max(), 1.0))


def test_script_B_additive_zeros():
    rng = np.random.default_rng(43)
    sde, state = random_stable_model(rng, 3, "autonomous_additive")
    sb = build_script_B(sde, state)
    np.testing.assert_array_equal(sb.B2, np.zeros_like(sb.B2))
    np.testing.assert_array_equal(sb.B3, np.zeros_like(sb.B3))
    np.testing.assert_array_equal(sb.B5, np.zeros_like(sb.B5))


def test_assemble_dimensions():
    rng = np.random.default_rng(44)
    for d in range(1, 9):
        sizes = {}
        for kind in CLASSES:
            sde, state = random_stable_model(rng, d, kind)
            sizes[kind] = assemble(sde, state).n
        assert sizes["non_autonomous"] == d * d + 2 * d + 7
        assert sizes["autonomous_multiplicative"] == d * d + d + 2
        assert sizes["autonomous_additive"] == 2 * d + 2


def test_assemble_block_structure():
    rng = np.random.default_rng(45)
    sde, state = random_stable_model(rng, 2, "non_autonomous")
    aug = assemble(sde, state)
    offs = {name: (off, size) for name, off, size in aug.block_offsets}
    assert set(offs) == {"secmom", "mean_ramp", "mean_flow",
                         "time_sq", "time", "one"}
    # strictly block upper triangular below the diagonal blocks
    for name, (off, size) in offs.items():
        np.testing.assert_array_equal(aug.M[off:off + size, :off], 0.0)
    # u seeds vec(P0), r, and the constant 1
    np.testing.assert_array_equal(aug.u[aug.secmom_slice], vec(state.P0))
    assert aug.u[-1] == 1.0
    flow_off, flow_size = offs["mean_flow"]
    np.testing.assert_array_equal(aug.u[flow_off:flow_off + flow_size],
                                  np.eye(flow_size)[-1])


def test_assemble_formulation_validation():
    rng = np.random.default_rng(46)
    non_aut, state = random_stable_model(rng, 2, "non_autonomous")
    with pytest.raises(ValueError):
        assemble(non_aut, state, Formulation.AUTONOMOUS)
    with pytest.raises(ValueError):
        assemble(non_aut, state, Formulation.ADDITIVE)
    mult, state2 = random_stable_model(rng, 2, "autonomous_multiplicative")
    with pytest.raises(ValueError):
        assemble(mult, state2, Formulation.ADDITIVE)
    assert assemble(mult, state2, Formulation.GENERAL).n == 15
    with pytest.raises(ValueError):
        assemble(mult, random_state(rng, 3))


def test_moments_at_initial_time_exact():
    rng = np.random.default_rng(47)
    for kind in CLASSES:
        sde, state = random_stable_model(rng, 3, kind)
        res = moments_at(sde, state, sde.t0)
        np.testing.assert_array_equal(res.mean, state.m0)
        np.testing.assert_allclose(res.secmom, state.P0, rtol=0, atol=0)


def test_moments_at_rejects_past_times():
    rng = np.random.default_rng(48)
    sde, state = random_stable_model(rng, 2, "autonomous_additive")
    with pytest.raises(ValueError):
        moments_at(sde, state, sde.t0 - 0.1)


def test_gbm_closed_form():
    a, b = 0.31, 0.42
    sde = LinearSde(d=1, m=1, A=[[a]], a0=[0.0], B=[[[b]]], b0=[[0.0]], t0=0.25)
    state = MomentState(m0=[1.0], P0=[[1.0]])
    res = moments_at(sde, state, 1.25)
    np.testing.assert_allclose(res.mean, [np.exp(a)], rtol=1e-12)
    np.testing.assert_allclose(res.secmom, [[np.exp(2 * a + b * b)]], rtol=1e-12)


def test_ou_closed_form():
    sde = LinearSde(d=1, m=1, A=[[-1.0]], a0=[0.0], b0=[[1.0]])
    state = MomentState(m0=[0.0], P0=[[0.0]])
    for t in (0.5, 1.0, 2.0):
        res = moments_at(sde, state, t)
        np.testing.assert_allclose(res.variance,
                                   [[(1.0 - np.exp(-2.0 * t)) / 2.0]],
                                   rtol=1e-12)


def test_matches_rk4_all_classes():
    rng = np.random.default_rng(49)
    for kind in CLASSES:
        for d in (1, 2, 3):
            sde, state = random_stable_model(rng, d, kind)
            t = sde.t0 + 1.0
            res = moments_at(sde, state, t)
            ref = rk4_moments(sde, state, t, 4000)
            assert rel_diff(res.mean, ref.mean, floor=1.0) < 1e-8
            assert rel_diff(res.secmom, ref.secmom) < 1e-8


def test_formulation_consistency():
    rng = np.random.default_rng(50)
    for d in (1, 2, 4):
        mult, state = random_stable_model(rng, d, "autonomous_multiplicative")
        t = mult.t0 + 1.0
        via_aut = moments_at(mult, state, t, formulation=Formulation.AUTONOMOUS)
        via_gen = moments_at(mult, state, t, formulation=Formulation.GENERAL)
        assert rel_diff(via_aut.mean, via_gen.mean, floor=1.0) < 1e-10
        assert rel_diff(via_aut.secmom, via_gen.secmom) < 1e-10

        add, state2 = random_stable_model(rng, d, "autonomous_additive")
        t = add.t0 + 1.0
        results = [moments_at(add, state2, t, formulation=f)
                   for f in Formulation]
        for res in results[1:]:
            assert rel_diff(res.mean, results[0].mean, floor=1.0) < 1e-10
            assert rel_diff(res.secmom, results[0].secmom) < 1e-10


def test_variance_identity_and_symmetry():
    rng = np.random.default_rng(51)
    for kind in CLASSES:
        sde, state = random_stable_model(rng, 3, kind)
        res = moments_at(sde, state, sde.t0 + 1.3)
        np.testing.assert_array_equal(res.variance,
                                      res.secmom - np.outer(res.mean, res.mean))
        np.testing.assert_array_equal(res.secmom, res.secmom.T)
        assert res.symmetry_defect <= 1e-10 * max(np.abs(res.secmom).max(), 1.0)
        assert res.min_variance_eig >= -1e-8 * np.abs(res.variance).max()


def test_propagate_grid_matches_direct():
    rng = np.random.default_rng(52)
    for kind in CLASSES:
        sde, state = random_stable_model(rng, 2, kind)
        grid = propagate_grid(sde, state, 0.1, 10)
        assert len(grid) == 10
        for k, res in enumerate(grid, start=1):
            direct = moments_at(sde, state, sde.t0 + k * 0.1)
            assert rel_diff(res.mean, direct.mean, floor=1.0) < 1e-9
            assert rel_diff(res.secmom, direct.secmom) < 1e-9


def test_propagate_grid_single_step():
    rng = np.random.default_rng(53)
    sde, state = random_stable_model(rng, 3, "non_autonomous")
    grid = propagate_grid(sde, state, 0.4, 1)
    direct = moments_at(sde, state, sde.t0 + 0.4)
    np.testing.assert_allclose(grid[0].mean, direct.mean, rtol=1e-13, atol=1e-13)
    np.testing.assert_allclose(grid[0].secmom, direct.secmom, rtol=1e-13)


def test_propagate_grid_zero_model():
    sde = LinearSde(d=2, m=1, A=np.zeros((2, 2)), a0=np.zeros(2),
                    b0=np.zeros((1, 2)))
    state = MomentState(m0=[1.0, -1.0], P0=np.outer([1, -1], [1, -1]) + np.eye(2))
    for res in propagate_grid(sde, state, 0.5, 4):
        np.testing.assert_allclose(res.mean, state.m0, rtol=0, atol=1e-15)
        np.testing.assert_allclose(res.secmom, state.P0, rtol=0, atol=1e-15)


def test_propagate_grid_validation():
    rng = np.random.default_rng(54)
    sde, state = random_stable_model(rng, 2, "autonomous_additive")
    with pytest.raises(ValueError):
        propagate_grid(sde, state, 0.0, 5)
    with pytest.raises(ValueError):
        propagate_grid(sde, state, 0.1, 0)


def test_baseline_agrees_with_engine():
    rng = np.random.default_rng(55)
    for kind in CLASSES:
        for d in (1, 2, 4):
            sde, state = random_stable_model(rng, d, kind)
            t = sde.t0 + 1.0
            res = moments_at(sde, state, t)
            base = moments_baseline(sde, state, t)
            assert rel_diff(base.mean, res.mean, floor=1.0) < 1e-9
            assert rel_diff(base.secmom, res.secmom) < 1e-9


def test_baseline_initial_time():
    rng = np.random.default_rng(56)
    sde, state = random_stable_model(rng, 3, "autonomous_multiplicative")
    base = moments_baseline(sde, state, sde.t0)
    np.testing.assert_allclose(base.mean, state.m0, rtol=0, atol=1e-15)
    np.testing.assert_allclose(base.secmom, state.P0, rtol=0, atol=1e-15)


def test_baseline_ou_closed_form():
    sde = LinearSde(d=1, m=1, A=[[-1.0]], a0=[0.0], b0=[[1.0]])
    state = MomentState(m0=[0.0], P0=[[0.0]])
    base = moments_baseline(sde, state, 1.0)
    np.testing.assert_allclose(base.variance,
                               [[(1.0 - np.exp(-2.0)) / 2.0]], rtol=1e-12)


def test_action_route_matches_dense():
    rng = np.random.default_rng(57)
    sde, state = random_stable_model(rng, 5, "non_autonomous")
    t = sde.t0 + 1.0
    dense = moments_at(sde, state, t)
    act = moments_at(sde, state, t, options=ExpmOptions(method="action"))
    assert rel_diff(act.mean, dense.mean, floor=1.0) < 1e-9
    assert rel_diff(act.secmom, dense.secmom) < 1e-9
    grid_a = propagate_grid(sde, state, 0.25, 4,
                            options=ExpmOptions(method="action"))
    grid_d = propagate_grid(sde, state, 0.25, 4)
    assert rel_diff(grid_a[-1].secmom, grid_d[-1].secmom) < 1e-9


def test_action_route_rejected_for_additive():
    rng = np.random.default_rng(58)
    sde, state = random_stable_model(rng, 2, "autonomous_additive")
    with pytest.raises(ValueError):
        moments_at(sde, state, sde.t0 + 1.0, options=ExpmOptions(method="action"))
    with pytest.raises(ValueError):
        propagate_grid(sde, state, 0.1, 2, options=ExpmOptions(method="action"))


def test_default_method_selection():
    rng = np.random.default_rng(59)
    small, state = random_stable_model(rng, 3, "non_autonomous")
    aug_small = assemble(small, state)
    assert not _wants_action(aug_small, None)
    big, state_big = random_stable_model(rng, 20, "non_autonomous", m=1)
    aug_big = assemble(big, state_big)
    assert aug_big.n == 20 * 20 + 2 * 20 + 7
    assert _wants_action(aug_big, None)
    assert not _wants_action(aug_big, ExpmOptions(method="dense"))
