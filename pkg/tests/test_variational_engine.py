"""Tet meshes, action assembly, gradients, residuals, stationary solves."""
from __future__ import annotations

import numpy as np
import pytest

from curvbc import (
    FieldState,
    SingularProblemError,
    SolveOptions,
    action_gradient,
    assemble_action,
    build_ball_tetmesh,
    build_icosphere,
    builtin_bulk,
    bulk_action,
    euler_lagrange_residual,
    integrate_surface,
    make_isotropic_surface,
    natural_bc_residual,
    robin_surface,
    solve_stationary,
    surface_action,
    zero_surface,
)
from curvbc.lagrangian_library import BulkLagrangian, SurfaceLagrangian

POISSON = builtin_bulk("poisson_source", source=6.0)
HARMONIC = builtin_bulk("harmonic")


def small_ball(surface_level=2, radial_layers=4):
    return build_ball_tetmesh(1.0, surface_level=surface_level,
                              radial_layers=radial_layers)


def oracle_state(mesh):
    """Radial solution of the unit-ball Robin problem (source 6, beta 1)."""
    r2 = np.einsum("vj,vj->v", mesh.vertices, mesh.vertices)
    return FieldState((3.0 - r2)[:, None])


def weighted_l2(values, weights):
    return np.sqrt((values**2 * weights).sum() / weights.sum())


# ---------------------------------------------------------------- tet mesh

def test_ball_mesh_invariants():
    mesh = small_ball()
    assert mesh.tet_volumes.min() > 0
    assert abs(mesh.dual_volumes.sum() - mesh.tet_volumes.sum()) <= 1e-12
    assert mesh.interior_mask.sum() + len(mesh.boundary_vertex_ids) == mesh.n_vertices
    assert not mesh.interior_mask[mesh.boundary_vertex_ids].any()
    assert mesh.boundary.n_faces == 320  # icosphere level 2


def test_ball_mesh_fills_boundary_polyhedron():
    mesh = small_ball()
    b = mesh.boundary
    centroids = b.vertices[b.triangles].mean(axis=1)
    flux = np.sum(b.face_areas * np.einsum("fj,fj->f", centroids, b.face_normals))
    assert abs(flux / 3.0 - mesh.tet_volumes.sum()) <= 1e-12


def test_ball_mesh_volume_refines():
    # the boundary polyhedron is inscribed, so the deficit is set by the level
    exact = 4 * np.pi / 3
    errs = []
    for level, layers in ((2, 4), (3, 6)):
        mesh = build_ball_tetmesh(1.0, surface_level=level, radial_layers=layers)
        errs.append(abs(mesh.tet_volumes.sum() - exact) / exact)
    assert errs[0] <= 0.05
    assert errs[1] <= 0.02
    default = build_ball_tetmesh(1.0)
    assert abs(default.tet_volumes.sum() - exact) / exact <= 0.005


def test_ball_mesh_validation():
    with pytest.raises(ValueError):
        build_ball_tetmesh(-1.0)
    with pytest.raises(ValueError):
        build_ball_tetmesh(1.0, grading=0.0)


# ------------------------------------------------------------- field state

def test_field_state_validation():
    n = 8
    vals = np.zeros((n, 1))
    with pytest.raises(ValueError):
        FieldState(vals, trajectory=np.zeros((4, n, 1)), dt=0.1)
    with pytest.raises(ValueError):
        FieldState(vals, trajectory=np.zeros((3, n, 1)))
    with pytest.raises(ValueError):
        FieldState(vals + 1.0, trajectory=np.zeros((3, n, 1)), dt=0.1)


def test_field_state_rates():
    n, dt = 5, 0.1
    c = np.arange(n, dtype=float)[:, None]
    times = (np.arange(5) - 2) * dt
    traj = np.stack([c * t for t in times])
    state = FieldState.from_trajectory(traj, dt)
    assert np.abs(state.rates() - c).max() <= 1e-12
    assert np.abs(state.snapshot_rates(0) - c).max() <= 1e-12  # linear: one-sided exact
    assert np.abs(state.snapshot_rates(3) - c).max() <= 1e-12


# ------------------------------------------------------------------ action

def test_bulk_action_linear_field():
    mesh = small_ball()
    state = FieldState(mesh.vertices[:, 2:3])
    value = bulk_action(mesh, HARMONIC, state)
    assert abs(value - 0.5 * mesh.tet_volumes.sum()) <= 1e-12
    assert abs(value - 2 * np.pi / 3) <= 0.05 * 2 * np.pi / 3


def test_surface_action_uniform_radial_displacement():
    sigma, u = 2.0, 0.37
    mesh = build_ball_tetmesh(1.0, surface_level=3, radial_layers=4)
    surf = make_isotropic_surface(sigma, 0.0)
    plain, curv = surface_action(mesh.boundary, surf, u * mesh.boundary.vertices)
    assert abs(plain - 2.0 * sigma * u * mesh.boundary.total_area) <= 1e-12
    assert abs(plain - 8 * np.pi * sigma * u) <= 0.02 * 8 * np.pi * sigma * u
    assert curv == 0.0


def test_assemble_action_zero_state():
    mesh = small_ball()
    out = assemble_action(mesh, builtin_bulk("harmonic", n_components=3),
                          make_isotropic_surface(1.0, 0.1),
                          FieldState(np.zeros((mesh.n_vertices, 3))))
    assert out.bulk == 0.0
    assert out.surface_plain == 0.0
    assert out.surface_curvature == 0.0


def test_tangential_transport_cancels():
    mesh = small_ball()
    rng = np.random.default_rng(5)
    state = FieldState(rng.standard_normal((mesh.n_vertices, 1)))
    surf = robin_surface(0.8)
    base = assemble_action(mesh, HARMONIC, surf, state)
    b = mesh.boundary
    raw = rng.standard_normal((b.n_faces, 3))
    tangential = raw - b.face_normals * np.einsum("fj,fj->f", raw, b.face_normals)[:, None]
    moved = assemble_action(mesh, HARMONIC, surf, state, surface_transport=tangential)
    assert abs(moved.total - base.total) <= 1e-10 * (1.0 + abs(base.total))
    assert abs(moved.transport_integral) <= 1e-10


def test_component_mismatch_rejected():
    mesh = small_ball()
    state = FieldState(np.zeros((mesh.n_vertices, 1)))
    with pytest.raises(ValueError):
        assemble_action(mesh, HARMONIC, make_isotropic_surface(1.0, 0.0), state)


# ---------------------------------------------------------------- gradient

def test_gradient_matches_finite_differences():
    mesh = build_ball_tetmesh(1.0, surface_level=1, radial_layers=3)
    bulk = builtin_bulk("linear_elastic", mu=1.0, lam=1.0)
    surf = make_isotropic_surface(1.0, 0.1)
    rng = np.random.default_rng(7)
    vals = rng.standard_normal((mesh.n_vertices, 3))
    state = FieldState(vals)
    grad = action_gradient(mesh, bulk, surf, state)
    direction = rng.standard_normal(vals.shape)
    direction /= np.linalg.norm(direction)
    eps = 1e-6 * (1.0 + np.abs(vals).max())
    plus = assemble_action(mesh, bulk, surf, FieldState(vals + eps * direction)).total
    minus = assemble_action(mesh, bulk, surf, FieldState(vals - eps * direction)).total
    fd = (plus - minus) / (2 * eps)
    assert abs(np.vdot(grad, direction) - fd) <= 1e-6 * (1.0 + abs(fd))


def test_gradient_linearity():
    mesh = build_ball_tetmesh(1.0, surface_level=1, radial_layers=3)
    rng = np.random.default_rng(8)
    vals = rng.standard_normal((mesh.n_vertices, 1))
    g1 = action_gradient(mesh, HARMONIC, robin_surface(1.0), FieldState(vals))
    g2 = action_gradient(mesh, HARMONIC, robin_surface(1.0), FieldState(3.0 * vals))
    assert np.abs(g2 - 3.0 * g1).max() <= 1e-12 * (1.0 + np.abs(g1).max())


# --------------------------------------------------------------- residuals

def test_euler_lagrange_affine_field():
    mesh = small_ball()
    rng = np.random.default_rng(3)
    vals = mesh.vertices @ rng.standard_normal(3)[:, None] + 0.7
    res = euler_lagrange_residual(mesh, HARMONIC, FieldState(vals))
    assert np.abs(res[mesh.interior_mask]).max() <= 1e-10 * (1.0 + np.abs(vals).max())


def test_euler_lagrange_equals_scaled_gradient():
    mesh = small_ball()
    rng = np.random.default_rng(4)
    state = FieldState(rng.standard_normal((mesh.n_vertices, 1)))
    res = euler_lagrange_residual(mesh, HARMONIC, state)
    grad = action_gradient(mesh, HARMONIC, zero_surface(), state)
    inner = mesh.interior_mask
    expected = grad[inner] / mesh.dual_volumes[inner, None]
    assert np.abs(res[inner] - expected).max() <= 1e-12 * (1.0 + np.abs(expected).max())


def test_euler_lagrange_poisson_refines():
    # quadratic radial state solving the interior equation; volume-weighted
    # L2 defect against the constant source
    devs = []
    for level, layers in ((2, 4), (3, 6), (4, 12)):
        mesh = build_ball_tetmesh(1.0, surface_level=level, radial_layers=layers)
        r2 = np.einsum("vj,vj->v", mesh.vertices, mesh.vertices)
        res = euler_lagrange_residual(mesh, POISSON, FieldState((-r2)[:, None]))
        inner = mesh.interior_mask
        devs.append(weighted_l2(res[inner, 0], mesh.dual_volumes[inner]) / 6.0)
    assert devs[0] > devs[1] > devs[2]
    assert devs[2] <= 0.05


def make_kinetic_bulk():
    return BulkLagrangian(
        "kinetic", 1,
        density=lambda p, r, g: 0.5 * np.einsum("mk,mk->m", r, r),
        d_phi=lambda p, r, g: np.zeros_like(p),
        d_rate=lambda p, r, g: r.copy(),
        d_grad=lambda p, r, g: np.zeros_like(g),
        rate_dependent=True,
    )


def test_bulk_rate_bracket():
    # kinetic density: residual of phi = c t^2 is -d/dt (c * 2 t) = -2c
    kinetic = make_kinetic_bulk()
    mesh = build_ball_tetmesh(1.0, surface_level=1, radial_layers=2)
    rng = np.random.default_rng(9)
    c = rng.standard_normal((mesh.n_vertices, 1))
    for steps in (3, 5):
        dt = 0.01
        times = (np.arange(steps) - steps // 2) * dt
        traj = np.stack([c * t**2 for t in times])
        state = FieldState.from_trajectory(traj, dt)
        res = euler_lagrange_residual(mesh, kinetic, state)
        inner = mesh.interior_mask
        assert np.abs(res[inner] + 2.0 * c[inner]).max() <= 1e-10


def test_rate_dependent_bulk_needs_trajectory():
    mesh = build_ball_tetmesh(1.0, surface_level=1, radial_layers=2)
    with pytest.raises(ValueError):
        euler_lagrange_residual(mesh, make_kinetic_bulk(),
                                FieldState(np.zeros((mesh.n_vertices, 1))))


# ---------------------------------------------------- boundary condition

def test_neumann_limit_residual_is_flux():
    mesh = small_ball()
    rng = np.random.default_rng(13)
    state = FieldState(rng.standard_normal((mesh.n_vertices, 1)))
    report = natural_bc_residual(mesh, HARMONIC, zero_surface(), state)
    assert np.abs(report.residual - report.flux_weak).max() == 0.0


def test_classical_robin_recovery():
    mesh = small_ball()
    rng = np.random.default_rng(11)
    state = FieldState(rng.standard_normal((mesh.n_vertices, 1)))
    beta = 0.8
    report = natural_bc_residual(mesh, HARMONIC, robin_surface(beta), state)
    expected = report.flux_weak + beta * state.values[mesh.boundary_vertex_ids]
    assert np.abs(report.residual - expected).max() <= 1e-12
    for name in ("gamma0_div", "curv_phi", "curv_div", "grad_H_term"):
        assert np.abs(report.terms[name]).max() == 0.0


def test_bc_residual_refines_at_oracle():
    devs = []
    for level, layers in ((2, 4), (3, 6)):
        mesh = build_ball_tetmesh(1.0, surface_level=level, radial_layers=layers)
        report = natural_bc_residual(mesh, POISSON, robin_surface(1.0),
                                     oracle_state(mesh))
        w = report.vertex_areas
        scale = (weighted_l2(report.rhs[:, 0], w)
                 + weighted_l2(report.flux_weak[:, 0], w))
        devs.append(weighted_l2(report.residual[:, 0], w) / scale)
    assert devs[1] < devs[0]
    assert devs[1] <= 0.03


def test_surface_rate_bracket():
    zero_s = lambda p, r, g: np.zeros(p.shape[0])
    zero_v = lambda p, r, g: np.zeros_like(p)
    zero_g = lambda p, r, g: np.zeros_like(g)
    surf = SurfaceLagrangian(
        "surface_kinetic", 1,
        gamma0=lambda p, r, g: 0.5 * np.einsum("mk,mk->m", r, r),
        gamma0_d_phi=zero_v, gamma0_d_grad=zero_g,
        gamma_hat=zero_s, gamma_hat_d_phi=zero_v, gamma_hat_d_grad=zero_g,
        rate_dependent=True,
        gamma0_d_rate=lambda p, r, g: r.copy(),
    )
    mesh = build_ball_tetmesh(1.0, surface_level=1, radial_layers=2)
    rng = np.random.default_rng(1)
    c = rng.standard_normal((mesh.n_vertices, 1))
    for steps in (3, 5):
        dt = 0.01
        times = (np.arange(steps) - steps // 2) * dt
        traj = np.stack([c * t**2 for t in times])
        state = FieldState.from_trajectory(traj, dt)
        report = natural_bc_residual(mesh, HARMONIC, surf, state)
        expected = -2.0 * c[mesh.boundary_vertex_ids]
        assert np.abs(report.residual - expected).max() <= 1e-10

    with pytest.raises(ValueError):
        natural_bc_residual(mesh, HARMONIC, surf,
                            FieldState(np.zeros((mesh.n_vertices, 1))))


def test_surface_curvature_rate_bracket():
    # rate term in the curvature channel carries the -2H weight
    zero_s = lambda p, r, g: np.zeros(p.shape[0])
    zero_v = lambda p, r, g: np.zeros_like(p)
    zero_g = lambda p, r, g: np.zeros_like(g)
    surf = SurfaceLagrangian(
        "curvature_kinetic", 1,
        gamma0=zero_s, gamma0_d_phi=zero_v, gamma0_d_grad=zero_g,
        gamma_hat=lambda p, r, g: 0.5 * np.einsum("mk,mk->m", r, r),
        gamma_hat_d_phi=zero_v, gamma_hat_d_grad=zero_g,
        rate_dependent=True,
        gamma_hat_d_rate=lambda p, r, g: r.copy(),
    )
    mesh = build_ball_tetmesh(1.0, surface_level=1, radial_layers=2)
    rng = np.random.default_rng(2)
    c = rng.standard_normal((mesh.n_vertices, 1))
    dt = 0.01
    traj = np.stack([c * t**2 for t in (-dt, 0.0, dt)])
    state = FieldState.from_trajectory(traj, dt)
    report = natural_bc_residual(mesh, HARMONIC, surf, state)
    # unit sphere boundary: rhs = 2H * (-phi..) = -4c, residual = flux - rhs
    assert np.abs(report.residual - 4.0 * c[mesh.boundary_vertex_ids]).max() <= 1e-10


# ------------------------------------------------------------------ solve

def test_solve_matches_radial_oracle():
    mesh = build_ball_tetmesh(1.0, surface_level=3, radial_layers=6)
    state, log = solve_stationary(mesh, POISSON, robin_surface(1.0))
    assert log.converged
    r2 = np.einsum("vj,vj->v", mesh.vertices, mesh.vertices)
    exact = 3.0 - r2
    err = weighted_l2(state.values[:, 0] - exact, mesh.dual_volumes)
    assert err / weighted_l2(exact, mesh.dual_volumes) <= 0.01


def test_solve_zero_problem():
    mesh = build_ball_tetmesh(1.0, surface_level=1, radial_layers=2)
    state, log = solve_stationary(mesh, HARMONIC, zero_surface(),
                                  options=SolveOptions(gauge="zero_mean"))
    assert log.converged
    assert np.abs(state.values).max() == 0.0


def test_solve_incompatible_neumann_raises():
    mesh = build_ball_tetmesh(1.0, surface_level=1, radial_layers=2)
    with pytest.raises(SingularProblemError):
        solve_stationary(mesh, POISSON, zero_surface())


def test_solve_rigid_gauge_elastic():
    mesh = build_ball_tetmesh(1.0, surface_level=1, radial_layers=2)
    state, log = solve_stationary(
        mesh, builtin_bulk("linear_elastic", mu=1.0, lam=1.0), zero_surface(3),
        options=SolveOptions(gauge="rigid"))
    assert log.converged
    assert np.abs(state.values).max() <= 1e-10


def test_solve_newton_path_stationary():
    mesh = build_ball_tetmesh(1.0, surface_level=1, radial_layers=2)
    state, log = solve_stationary(mesh, POISSON, robin_surface(1.0),
                                  options=SolveOptions(force_newton=True))
    assert log.converged
    assert log.method == "newton"
    grad = action_gradient(mesh, POISSON, robin_surface(1.0), state)
    assert np.abs(grad).max() <= 1e-10


def test_solve_stationarity_gradient():
    mesh = build_ball_tetmesh(1.0, surface_level=2, radial_layers=3)
    state, log = solve_stationary(mesh, POISSON, robin_surface(1.0))
    assert log.converged
    grad = action_gradient(mesh, POISSON, robin_surface(1.0), state)
    assert np.abs(grad).max() <= 1e-10


def test_bc_residual_small_at_discrete_solution():
    mesh = build_ball_tetmesh(1.0, surface_level=2, radial_layers=3)
    state, _ = solve_stationary(mesh, POISSON, robin_surface(1.0))
    report = natural_bc_residual(mesh, POISSON, robin_surface(1.0), state)
    # the discrete solution satisfies the discrete BC to solver tolerance
    assert np.abs(report.residual).max() <= 1e-6
