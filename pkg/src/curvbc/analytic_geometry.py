"""Closed-form reference geometry: charts, curvature jets, sampled meshes.

Spheres, capped cylinders and tori are provided as analytic surfaces.  A
jet bundles everything the boundary-condition formulas consume at a chart
point: tangent basis, outward normal, first/second fundamental forms,
mixed shape operator, Christoffel symbols, mean curvature and its chart
gradient.  All quantities are hand-written closed forms; finite differences
are used only as cross-checks in the tests.

The second fundamental form follows the droplet convention
``b_AB = d_A(n_out) . d_B(x)`` so a sphere has ``b = g/R`` and ``H = +1/R``.
With the inward normal as the third frame vector, the same numbers agree
with the classical adapted-frame expansions; ``adapted_coefficient_divergence``
lets callers pick either frame explicitly.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .surface_mesh import TriangleMesh


@dataclass(frozen=True)
class AnalyticSurface:
    """One of the supported closed-form surfaces.

    kind is "sphere" (radius), "cylinder" (radius, length; caps added when
    sampling) or "torus" (r_major, r_minor with r_major > r_minor > 0).
    """

    kind: str
    params: tuple

    @staticmethod
    def sphere(radius):
        if radius <= 0:
            raise ValueError("sphere radius must be positive")
        return AnalyticSurface("sphere", (float(radius),))

    @staticmethod
    def cylinder(radius, length):
        if radius <= 0 or length <= 0:
            raise ValueError("cylinder radius and length must be positive")
        return AnalyticSurface("cylinder", (float(radius), float(length)))

    @staticmethod
    def torus(r_major, r_minor):
        if not (r_major > r_minor > 0):
            raise ValueError("torus requires r_major > r_minor > 0")
        return AnalyticSurface("torus", (float(r_major), float(r_minor)))


@dataclass
class GeometryJet:
    """Chart-point geometry bundle.

    Indices: A, B label chart coordinates (u, v); ``christoffel[C, A, B]``
    is Gamma^C_AB, ``shape_mixed[A, C]`` is b_A^C, ``d_H`` holds the chart
    partials of the mean curvature.
    """

    position: np.ndarray
    g1: np.ndarray
    g2: np.ndarray
    normal: np.ndarray
    metric: np.ndarray
    metric_inv: np.ndarray
    second_form: np.ndarray
    shape_mixed: np.ndarray
    christoffel: np.ndarray
    mean_curvature: float
    d_H: np.ndarray

    @property
    def tangents(self):
        return np.stack([self.g1, self.g2])

    def frame_components(self, vec, inward_frame=True):
        """Adapted components (t^1, t^2, n) of a Cartesian vector.

        Tangential components are contravariant; the third component is
        along the inward normal by default (the frame the classical
        expansions are written in), or the outward normal otherwise.
        """
        cov = self.tangents @ np.asarray(vec, dtype=float)
        tang = self.metric_inv @ cov
        nu = -self.normal if inward_frame else self.normal
        return np.array([tang[0], tang[1], float(nu @ vec)])


def evaluate_jet(surface, u, v):
    """Closed-form :class:`GeometryJet` of ``surface`` at chart point (u, v).

    Raises ValueError when (u, v) is outside the chart domain (sphere polar
    angle must lie strictly in (0, pi); cylinder height in [0, length]).
    """
    u = float(u)
    v = float(v)
    if surface.kind == "sphere":
        return _sphere_jet(surface.params[0], u, v)
    if surface.kind == "cylinder":
        return _cylinder_jet(*surface.params, u, v)
    if surface.kind == "torus":
        return _torus_jet(*surface.params, u, v)
    raise ValueError(f"unknown surface kind {surface.kind!r}")


def _finish_jet(position, g1, g2, normal, metric, second_form, christoffel, H, d_H):
    metric_inv = np.linalg.inv(metric)
    shape_mixed = second_form @ metric_inv          # b_A^C = b_AB g^{BC}
    return GeometryJet(
        position=position,
        g1=g1,
        g2=g2,
        normal=normal,
        metric=metric,
        metric_inv=metric_inv,
        second_form=second_form,
        shape_mixed=shape_mixed,
        christoffel=christoffel,
        mean_curvature=float(H),
        d_H=np.asarray(d_H, dtype=float),
    )


def _sphere_jet(R, theta, phi):
    if not (0.0 < theta < np.pi):
        raise ValueError("sphere chart requires polar angle in (0, pi)")
    st, ct = np.sin(theta), np.cos(theta)
    sp, cp = np.sin(phi), np.cos(phi)
    x = R * np.array([st * cp, st * sp, ct])
    g1 = R * np.array([ct * cp, ct * sp, -st])
    g2 = R * np.array([-st * sp, st * cp, 0.0])
    n = x / R
    metric = np.diag([R**2, (R * st) ** 2])
    b = metric / R
    gamma = np.zeros((2, 2, 2))
    gamma[0, 1, 1] = -st * ct            # Gamma^theta_phiphi
    gamma[1, 0, 1] = gamma[1, 1, 0] = ct / st
    return _finish_jet(x, g1, g2, n, metric, b, gamma, 1.0 / R, [0.0, 0.0])


def _cylinder_jet(R, L, u, v):
    if not (0.0 <= v <= L):
        raise ValueError("cylinder chart requires height in [0, length]")
    su, cu = np.sin(u), np.cos(u)
    x = np.array([R * cu, R * su, v])
    g1 = np.array([-R * su, R * cu, 0.0])
    g2 = np.array([0.0, 0.0, 1.0])
    n = np.array([cu, su, 0.0])
    metric = np.diag([R**2, 1.0])
    b = np.diag([R, 0.0])
    gamma = np.zeros((2, 2, 2))
    return _finish_jet(x, g1, g2, n, metric, b, gamma, 0.5 / R, [0.0, 0.0])


def _torus_jet(A, r, u, v):
    su, cu = np.sin(u), np.cos(u)
    sv, cv = np.sin(v), np.cos(v)
    rho = A + r * cv
    x = np.array([rho * cu, rho * su, r * sv])
    g1 = np.array([-rho * su, rho * cu, 0.0])
    g2 = np.array([-r * sv * cu, -r * sv * su, r * cv])
    n = np.array([cv * cu, cv * su, sv])
    metric = np.diag([rho**2, r**2])
    b = np.diag([rho * cv, r])
    gamma = np.zeros((2, 2, 2))
    gamma[0, 0, 1] = gamma[0, 1, 0] = -r * sv / rho
    gamma[1, 0, 0] = rho * sv / r
    H = 0.5 * (cv / rho + 1.0 / r)
    d_H = [0.0, -A * sv / (2.0 * rho**2)]
    return _finish_jet(x, g1, g2, n, metric, b, gamma, H, d_H)


# -- sampled meshes --------------------------------------------------------

def sample_mesh(surface, resolution):
    """Triangulate ``surface`` into a closed mesh with per-vertex jets.

    Returns ``(mesh, jets)`` where ``jets[i]`` is the GeometryJet at vertex
    i's exact chart parameters, or None at chart-singular vertices (sphere
    poles, cylinder caps and cap rims).  Orientation is outward.
    """
    if surface.kind == "sphere":
        return _sample_sphere(surface, *resolution)
    if surface.kind == "cylinder":
        return _sample_cylinder(surface, *resolution)
    if surface.kind == "torus":
        return _sample_torus(surface, *resolution)
    raise ValueError(f"unknown surface kind {surface.kind!r}")


def _sample_sphere(surface, n_theta, n_phi):
    if n_theta < 3 or n_phi < 3:
        raise ValueError("sphere resolution must be at least (3, 3)")
    R = surface.params[0]
    verts = [np.array([0.0, 0.0, R])]
    jets = [None]
    params = [None]
    for i in range(1, n_theta):
        theta = np.pi * i / n_theta
        for j in range(n_phi):
            phi = 2.0 * np.pi * j / n_phi
            st = np.sin(theta)
            verts.append(R * np.array([st * np.cos(phi), st * np.sin(phi), np.cos(theta)]))
            params.append((theta, phi))
            jets.append(None)
    verts.append(np.array([0.0, 0.0, -R]))
    params.append(None)
    jets.append(None)
    south = len(verts) - 1

    def ring(i, j):
        return 1 + (i - 1) * n_phi + (j % n_phi)

    faces = []
    for j in range(n_phi):
        faces.append((0, ring(1, j), ring(1, j + 1)))
    for i in range(1, n_theta - 1):
        for j in range(n_phi):
            a, b = ring(i, j), ring(i, j + 1)
            c, d = ring(i + 1, j), ring(i + 1, j + 1)
            faces.append((a, c, d))
            faces.append((a, d, b))
    for j in range(n_phi):
        faces.append((south, ring(n_theta - 1, j + 1), ring(n_theta - 1, j)))

    mesh = TriangleMesh(np.array(verts), np.array(faces, dtype=np.int64))
    for i, p in enumerate(params):
        if p is not None:
            jets[i] = evaluate_jet(surface, *p)
    return mesh, jets


def _sample_cylinder(surface, n_u, n_v):
    if n_u < 3 or n_v < 2:
        raise ValueError("cylinder resolution must be at least (3, 2)")
    R, L = surface.params
    verts, jets = [], []
    for i in range(n_v + 1):
        h = L * i / n_v
        for j in range(n_u):
            u = 2.0 * np.pi * j / n_u
            verts.append([R * np.cos(u), R * np.sin(u), h])
            jets.append(evaluate_jet(surface, u, h) if 0 < i < n_v else None)
    bottom_c = len(verts)
    verts.append([0.0, 0.0, 0.0])
    jets.append(None)
    top_c = len(verts)
    verts.append([0.0, 0.0, L])
    jets.append(None)

    def ring(i, j):
        return i * n_u + (j % n_u)

    faces = []
    for i in range(n_v):
        for j in range(n_u):
            a, b = ring(i, j), ring(i, j + 1)
            c, d = ring(i + 1, j), ring(i + 1, j + 1)
            faces.append((a, b, d))
            faces.append((a, d, c))
    for j in range(n_u):
        faces.append((bottom_c, ring(0, j + 1), ring(0, j)))
        faces.append((top_c, ring(n_v, j), ring(n_v, j + 1)))
    mesh = TriangleMesh(np.array(verts, dtype=float), np.array(faces, dtype=np.int64))
    return mesh, jets


def _sample_torus(surface, n_u, n_v):
    if n_u < 3 or n_v < 3:
        raise ValueError("torus resolution must be at least (3, 3)")
    A, r = surface.params
    verts, jets = [], []
    for i in range(n_u):
        u = 2.0 * np.pi * i / n_u
        for j in range(n_v):
            v = 2.0 * np.pi * j / n_v
            rho = A + r * np.cos(v)
            verts.append([rho * np.cos(u), rho * np.sin(u), r * np.sin(v)])
            jets.append(evaluate_jet(surface, u, v))

    def vid(i, j):
        return (i % n_u) * n_v + (j % n_v)

    faces = []
    for i in range(n_u):
        for j in range(n_v):
            a, b = vid(i, j), vid(i + 1, j)
            c, d = vid(i + 1, j + 1), vid(i, j + 1)
            faces.append((a, b, c))
            faces.append((a, c, d))
    mesh = TriangleMesh(np.array(verts, dtype=float), np.array(faces, dtype=np.int64))
    return mesh, jets


# -- adapted-frame coefficient calculus ------------------------------------

def adapted_coefficient_divergence(jet, coeffs, inward_frame=True, coeff_partials=None):
    """Exact surface covariant divergence of a coefficient field, per Cartesian slot.

    ``coeffs[A, m]`` holds the adapted components of a two-index object
    c^{A m}: m = 0, 1 are contravariant tangential slots and m = 2 is the
    component along the frame normal (inward normal when ``inward_frame``).
    The adapted components are constant unless ``coeff_partials[A, m]``
    supplies the chart partial of c^{A m} along coordinate A.

    Returns the Cartesian 3-vector ``div_A c^{A .}``, expanding the frame
    rotation with the Gauss-Weingarten relations of the jet.
    """
    c = np.asarray(coeffs, dtype=float)
    eps = 1.0 if inward_frame else -1.0
    nu = -jet.normal if inward_frame else jet.normal
    tangents = jet.tangents                      # (2, 3): g_1, g_2
    gamma = jet.christoffel
    b = jet.second_form
    b_mix = jet.shape_mixed

    out = np.zeros(3)
    # d_A W^A with W^A = c[A,C] g_C + c[A,2] nu
    for A in range(2):
        for C in range(2):
            out += c[A, C] * (gamma[:, A, C] @ tangents + eps * b[A, C] * nu)
        out += c[A, 2] * (-eps) * (b_mix[A] @ tangents)
    # contraction term Gamma^A_AB W^B
    trace_gamma = np.einsum("aba->b", gamma)     # Gamma^A_BA as a function of B
    for B in range(2):
        out += trace_gamma[B] * (c[B, 0] * tangents[0] + c[B, 1] * tangents[1] + c[B, 2] * nu)
    if coeff_partials is not None:
        dc = np.asarray(coeff_partials, dtype=float)
        for A in range(2):
            out += dc[A, 0] * tangents[0] + dc[A, 1] * tangents[1] + dc[A, 2] * nu
    return out


@dataclass
class ExpansionTerms:
    """Every named term of the adapted-frame boundary expansions.

    Tangential entries are (2,) arrays indexed by the free contravariant
    slot; normal entries are scalars.  ``*_printed`` sums follow the signs
    as printed in the source expansions; ``*_corrected`` sums follow the
    frame-free ground truth (the normal-row kappa connection and curvature
    couplings enter with opposite sign).  The two tangential sums agree.
    """

    chi_partial_t: np.ndarray
    chi_conn_trace_t: np.ndarray
    chi_conn_rot_t: np.ndarray
    chi_curv_t: np.ndarray
    chi_partial_n: float
    chi_conn_n: float
    chi_curv_n: float
    kappa_partial_t: np.ndarray
    kappa_conn_trace_t: np.ndarray
    kappa_conn_rot_t: np.ndarray
    kappa_curv_t: np.ndarray
    kappa_partial_n: float
    kappa_conn_n: float
    kappa_curv_n: float
    kappa_dH_t: np.ndarray
    kappa_dH_n: float
    dgamma_bar: np.ndarray
    dgamma_hat: np.ndarray
    mean_curvature: float
    rhs_tangential_printed: np.ndarray
    rhs_normal_printed: float
    rhs_tangential_corrected: np.ndarray
    rhs_normal_corrected: float


def expansion_terms(
    jet,
    chi=None,
    kappa=None,
    dgamma_bar=None,
    dgamma_hat=None,
    chi_partials=None,
    kappa_partials=None,
):
    """Evaluate each adapted-frame boundary-expansion term at a jet.

    ``chi`` and ``kappa`` are (2, 3) adapted coefficient arrays in the same
    layout as :func:`adapted_coefficient_divergence` (third column along the
    inward normal).  ``dgamma_bar``/``dgamma_hat`` are (3,) adapted gradients
    of the surface potentials; ``*_partials`` optionally supply the chart
    partials of the coefficient components (homogeneous case: zero).
    """
    chi = np.zeros((2, 3)) if chi is None else np.asarray(chi, dtype=float)
    kappa = np.zeros((2, 3)) if kappa is None else np.asarray(kappa, dtype=float)
    dgb = np.zeros(3) if dgamma_bar is None else np.asarray(dgamma_bar, dtype=float)
    dgh = np.zeros(3) if dgamma_hat is None else np.asarray(dgamma_hat, dtype=float)
    dchi = np.zeros((2, 3)) if chi_partials is None else np.asarray(chi_partials, dtype=float)
    dkap = np.zeros((2, 3)) if kappa_partials is None else np.asarray(kappa_partials, dtype=float)

    gamma = jet.christoffel
    trace_gamma = np.einsum("aba->b", gamma)       # Gamma^A_BA indexed by B
    b = jet.second_form
    b_mix = jet.shape_mixed
    H = jet.mean_curvature
    dH = jet.d_H

    def blocks(c, dc):
        partial_t = dc[:, :2].sum(axis=0)
        conn_trace = trace_gamma @ c[:, :2]                    # sum_B Gamma^A_BA c^{BC}
        conn_rot = np.einsum("cab,ab->c", gamma, c[:, :2])     # c^{AB} Gamma^C_AB
        curv_t = c[:, 2] @ b_mix                               # c^{A3} b_A^C
        partial_n = dc[:, 2].sum()
        conn_n = float(trace_gamma @ c[:, 2])
        curv_n = float(np.einsum("ab,ab->", c[:, :2], b))
        return partial_t, conn_trace, conn_rot, curv_t, partial_n, conn_n, curv_n

    cpt, cct, ccr, ccu, cpn, ccn, ccun = blocks(chi, dchi)
    kpt, kct, kcr, kcu, kpn, kcn, kcun = blocks(kappa, dkap)
    kdh_t = 2.0 * kappa[:, :2].T @ dH              # 2 kappa^{AC} d_A H
    kdh_n = 2.0 * float(kappa[:, 2] @ dH)

    rhs_t = (
        cpt + cct + ccr - ccu
        - dgb[:2]
        + 2.0 * H * (dgh[:2] - kpt - kct - kcr + kcu)
        - kdh_t
    )
    rhs_n_printed = (
        cpn + ccn + ccun
        - dgb[2]
        + 2.0 * H * (dgh[2] - kpn + kcn + kcun)
        - kdh_n
    )
    rhs_n_corrected = (
        cpn + ccn + ccun
        - dgb[2]
        + 2.0 * H * (dgh[2] - kpn - kcn - kcun)
        - kdh_n
    )
    return ExpansionTerms(
        chi_partial_t=cpt,
        chi_conn_trace_t=cct,
        chi_conn_rot_t=ccr,
        chi_curv_t=ccu,
        chi_partial_n=cpn,
        chi_conn_n=ccn,
        chi_curv_n=ccun,
        kappa_partial_t=kpt,
        kappa_conn_trace_t=kct,
        kappa_conn_rot_t=kcr,
        kappa_curv_t=kcu,
        kappa_partial_n=kpn,
        kappa_conn_n=kcn,
        kappa_curv_n=kcun,
        kappa_dH_t=kdh_t,
        kappa_dH_n=kdh_n,
        dgamma_bar=dgb,
        dgamma_hat=dgh,
        mean_curvature=H,
        rhs_tangential_printed=rhs_t,
        rhs_normal_printed=float(rhs_n_printed),
        rhs_tangential_corrected=rhs_t.copy(),
        rhs_normal_corrected=float(rhs_n_corrected),
    )
