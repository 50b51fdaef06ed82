"""Reduction chain from the general curvature boundary condition to droplet laws.

This module evaluates the boundary-condition right-hand side along four
increasingly specialized routes and cross-checks them:

1. the general route, a full chain rule through a restricted surface pair
   (plain/curvature potentials, drift channels, gradient couplings) at a
   single boundary point;
2. the reduced route, keeping only the potential gradients, the coefficient
   divergences and the curvature-gradient coupling;
3. the uniform-tension droplet route (normal value ``2 sigma H - 4 tau H^2``,
   tangential value ``-2 tau grad H``), whose normal value rearranges into
   the size-corrected capillary pressure ``2 sigma H (1 - delta H)`` with
   ``delta = 2 tau / sigma``;
4. the combined route obtained by tying the curvature pair to the plain
   pair with the fixed length ``delta``.

``verify_reductions`` runs all the cross-equivalences on analytic sphere
and torus jets (tight tolerances) and on discrete meshes (refinement
tolerances) and returns a row-per-check report.

Frame conventions: Cartesian right-hand sides are produced with the
outward boundary normal as the flux normal.  Component projections in the
classical adapted-frame expansions use the inward frame normal; the
droplet pressure is the inward-projected normal value, so a sphere under
tension carries a positive pressure jump.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .analytic_geometry import (AnalyticSurface, adapted_coefficient_divergence,
                                evaluate_jet, expansion_terms)
from .lagrangian_library import SurfaceLagrangian
from .surface_mesh import build_icosphere, mean_curvature


# -- point data ---------------------------------------------------------------

@dataclass
class BoundaryPoint:
    """Field and geometry data the boundary-condition formulas consume.

    ``dphi[A, c]`` holds chart partials of the field, ``grad_H`` the chart
    partials of the mean curvature (covariant index), ``normal`` the
    outward unit normal.
    """

    phi: np.ndarray
    dphi: np.ndarray
    mean_curvature: float
    grad_H: np.ndarray
    metric_inv: np.ndarray
    g1: np.ndarray
    g2: np.ndarray
    normal: np.ndarray

    @classmethod
    def from_jet(cls, jet, phi, dphi):
        phi = np.asarray(phi, dtype=float)
        dphi = np.asarray(dphi, dtype=float)
        return cls(phi, dphi, jet.mean_curvature, jet.d_H, jet.metric_inv,
                   jet.g1, jet.g2, jet.normal)

    @property
    def tangents(self):
        return np.stack([self.g1, self.g2])

    def raise_index(self, covec):
        return self.metric_inv @ np.asarray(covec, dtype=float)

    def tangential_components(self, cart):
        """Contravariant tangential components of a Cartesian vector."""
        return self.metric_inv @ (self.tangents @ np.asarray(cart, dtype=float))


def _pot_value(pot, phi):
    return 0.0 if pot is None else float(pot.value(phi[None])[0])


def _pot_grad(pot, phi):
    if pot is None:
        return np.zeros_like(phi)
    return pot.grad(phi[None])[0]


def _pot_hess(pot, phi):
    k = len(phi)
    if pot is None:
        return np.zeros((k, k))
    return pot.hess(phi[None])[0]


@dataclass
class RestrictedPointCoeffs:
    """Restricted surface pair at one boundary point, chart-indexed.

    ``chi[A, c]`` and ``kappa[A, c]`` couple to the field gradient (chart
    index A up, Cartesian component c); ``chi_tilde``/``kappa_hat`` are the
    contravariant drift channels multiplying gradients of the scalar
    potentials ``gamma0``/``gamma1``.  The ``div_*`` entries supply the
    surface covariant divergences of the coefficient fields; the default
    zeros state that the fields are covariantly constant.
    """

    n_components: int
    gamma_bar: Optional[object] = None
    gamma_hat: Optional[object] = None
    chi: Optional[np.ndarray] = None
    kappa: Optional[np.ndarray] = None
    chi_tilde: Optional[np.ndarray] = None
    gamma0: Optional[object] = None
    kappa_hat: Optional[np.ndarray] = None
    gamma1: Optional[object] = None
    div_chi: Optional[np.ndarray] = None
    div_kappa: Optional[np.ndarray] = None
    div_chi_tilde: float = 0.0
    div_kappa_hat: float = 0.0

    def __post_init__(self):
        k = self.n_components
        self.chi = np.zeros((2, k)) if self.chi is None else np.asarray(self.chi, dtype=float)
        self.kappa = np.zeros((2, k)) if self.kappa is None else np.asarray(self.kappa, dtype=float)
        self.div_chi = np.zeros(k) if self.div_chi is None else np.asarray(self.div_chi, dtype=float)
        self.div_kappa = np.zeros(k) if self.div_kappa is None else np.asarray(self.div_kappa, dtype=float)
        if self.chi_tilde is not None:
            self.chi_tilde = np.asarray(self.chi_tilde, dtype=float)
        if self.kappa_hat is not None:
            self.kappa_hat = np.asarray(self.kappa_hat, dtype=float)


class _ScaledPotential:
    """Fixed multiple of another potential."""

    def __init__(self, base, factor):
        self.base = base
        self.factor = float(factor)
        self.is_quadratic = getattr(base, "is_quadratic", False)

    def value(self, phi):
        return self.factor * self.base.value(phi)

    def grad(self, phi):
        return self.factor * self.base.grad(phi)

    def hess(self, phi):
        return self.factor * self.base.hess(phi)


def tie_curvature_channel(coeffs, delta):
    """Return a copy whose curvature pair is delta/2 times the plain pair."""
    half = 0.5 * float(delta)
    return RestrictedPointCoeffs(
        n_components=coeffs.n_components,
        gamma_bar=coeffs.gamma_bar,
        gamma_hat=None if coeffs.gamma_bar is None
        else _ScaledPotential(coeffs.gamma_bar, half),
        chi=coeffs.chi,
        kappa=half * coeffs.chi,
        chi_tilde=coeffs.chi_tilde,
        gamma0=coeffs.gamma0,
        kappa_hat=None if coeffs.chi_tilde is None else half * coeffs.chi_tilde,
        gamma1=coeffs.gamma0,
        div_chi=coeffs.div_chi,
        div_kappa=half * coeffs.div_chi,
        div_chi_tilde=coeffs.div_chi_tilde,
        div_kappa_hat=half * coeffs.div_chi_tilde,
    )


def coeffs_from_surface(surf, point):
    """Chart-indexed point coefficients of a catalog surface Lagrangian.

    Constant Cartesian coefficient vectors project onto the chart with the
    exact covariant divergence -2 H (c . n) of a tangentially projected
    constant field.  Rejects surface specs without restricted structure.
    """
    if not isinstance(surf, SurfaceLagrangian):
        raise ValueError("expected a catalog SurfaceLagrangian")
    meta = surf.meta
    k = surf.n_components
    H = point.mean_curvature
    n = point.normal
    tang = point.tangents

    def project(c):
        return point.metric_inv @ (tang @ c)

    if "sigma" in meta:
        sigma, tau = meta["sigma"], meta["tau"]
        chi = np.stack([project(sigma * np.eye(3)[c]) for c in range(3)], axis=1)
        kappa = np.stack([project(tau * np.eye(3)[c]) for c in range(3)], axis=1)
        return RestrictedPointCoeffs(
            3, chi=chi, kappa=kappa,
            div_chi=-2.0 * H * sigma * n,
            div_kappa=-2.0 * H * tau * n,
        )
    if not {"chi", "chi_tilde", "kappa", "kappa_hat"} <= meta.keys():
        raise ValueError(f"surface Lagrangian {surf.name!r} is not in restricted form")

    def channel(arr):
        if arr is None:
            return None, None
        arr = np.asarray(arr, dtype=float)
        if arr.ndim == 1:                                  # drift vector
            return project(arr), -2.0 * H * float(arr @ n)
        chart = np.stack([project(arr[c]) for c in range(k)], axis=1)
        return chart, -2.0 * H * (arr @ n)

    chi, div_chi = channel(meta["chi"])
    kappa, div_kappa = channel(meta["kappa"])
    chi_tilde, div_ct = channel(meta["chi_tilde"])
    kappa_hat, div_kh = channel(meta["kappa_hat"])
    return RestrictedPointCoeffs(
        k,
        gamma_bar=meta.get("gamma_bar"),
        gamma_hat=meta.get("gamma_hat"),
        chi=chi, kappa=kappa,
        chi_tilde=chi_tilde, gamma0=meta.get("gamma0"),
        kappa_hat=kappa_hat, gamma1=meta.get("gamma1"),
        div_chi=div_chi, div_kappa=div_kappa,
        div_chi_tilde=div_ct or 0.0, div_kappa_hat=div_kh or 0.0,
    )


# -- boundary-condition evaluations -------------------------------------------

def _channel_pieces(point, drift, drift_pot, coupling, div_coupling, div_drift):
    """Momentum, its divergence, and the potential-derivative row of one channel."""
    k = len(point.phi)
    momentum = np.array(coupling, dtype=float, copy=True)     # (2, k)
    div = np.array(div_coupling, dtype=float, copy=True)      # (k,)
    carried = np.zeros(k)
    if drift is not None:
        g = _pot_grad(drift_pot, point.phi)
        hess = _pot_hess(drift_pot, point.phi)
        momentum = momentum + drift[:, None] * g[None, :]
        # product rule: div(drift * g(phi)) = div(drift) g + drift^A d_A g
        carried = np.einsum("a,ac,cd->d", drift, point.dphi, hess)
        div = div + div_drift * g + carried
    return momentum, div, carried


def general_bc_rhs(point, coeffs):
    """Right-hand side of the unreduced curvature boundary condition.

    Full chain rule through the restricted pair at one point, Cartesian
    components with the outward flux normal.  Rate terms are zero for the
    rate-independent family handled here.
    """
    phi = point.phi
    H = point.mean_curvature

    _, div_pi0, extra0 = _channel_pieces(
        point, coeffs.chi_tilde, coeffs.gamma0, coeffs.chi,
        coeffs.div_chi, coeffs.div_chi_tilde)
    d_gamma0_phi = _pot_grad(coeffs.gamma_bar, phi) + extra0

    pihat, div_pihat, extrah = _channel_pieces(
        point, coeffs.kappa_hat, coeffs.gamma1, coeffs.kappa,
        coeffs.div_kappa, coeffs.div_kappa_hat)
    d_gammahat_phi = _pot_grad(coeffs.gamma_hat, phi) + extrah

    return (div_pi0 - d_gamma0_phi
            + 2.0 * H * (d_gammahat_phi - div_pihat)
            - 2.0 * np.einsum("ak,a->k", pihat, point.grad_H))


def reduced_bc_rhs(surf, point):
    """Right-hand side of the reduced boundary condition.

    Keeps the potential gradients, the coefficient divergences and the
    curvature-gradient coupling; the drift channels are dropped, which is
    exact when they are covariantly constant and the curvature is uniform
    (the general route keeps their full contribution).  ``surf`` is either
    a :class:`RestrictedPointCoeffs` or a restricted catalog SurfaceLagrangian.
    """
    coeffs = coeffs_from_surface(surf, point) if isinstance(surf, SurfaceLagrangian) else surf
    phi = point.phi
    H = point.mean_curvature
    return (-_pot_grad(coeffs.gamma_bar, phi)
            + coeffs.div_chi
            + 2.0 * H * (_pot_grad(coeffs.gamma_hat, phi) - coeffs.div_kappa)
            - 2.0 * np.einsum("ak,a->k", coeffs.kappa, point.grad_H))


def extended_bc_rhs(point, coeffs, delta):
    """Size-corrected boundary condition from tying the pairs with ``delta``.

    Evaluates ``(1 - delta H) [div(momentum) - d(plain)/d(phi)]
    - delta momentum^A d_A H`` using only the plain channel of ``coeffs``.
    Equals :func:`general_bc_rhs` with the curvature pair set to half
    ``delta`` times the plain pair (see :func:`tie_curvature_channel`).
    """
    phi = point.phi
    H = point.mean_curvature
    pi0, div_pi0, extra0 = _channel_pieces(
        point, coeffs.chi_tilde, coeffs.gamma0, coeffs.chi,
        coeffs.div_chi, coeffs.div_chi_tilde)
    d_gamma0_phi = _pot_grad(coeffs.gamma_bar, phi) + extra0
    bracket = div_pi0 - d_gamma0_phi
    return ((1.0 - delta * H) * bracket
            - delta * np.einsum("ak,a->k", pi0, point.grad_H))


# -- droplet laws --------------------------------------------------------------

@dataclass(frozen=True)
class IsotropicSurfaceParams:
    """Uniform tension pair (sigma, tau) with the derived length delta."""

    sigma: float
    tau: float

    def __post_init__(self):
        if self.sigma < 0:
            raise ValueError("sigma must be non-negative")
        if self.sigma == 0.0 and self.tau != 0.0:
            raise ValueError("tau requires a positive sigma")

    @property
    def delta(self):
        if self.sigma == 0.0:
            return 0.0
        return 2.0 * self.tau / self.sigma


def isotropic_bc_values(params, H, grad_H=None, metric_inv=None):
    """Droplet boundary values: (tangential 2-vector, normal scalar).

    Normal value is ``2 sigma H - 4 tau H^2`` (pressure side, inward
    projection); tangential value is ``-2 tau`` times the raised curvature
    gradient, evaluated in an orthonormal tangent frame unless a metric
    inverse is supplied (the metric-derivative terms of the chart form are
    coordinate artifacts and vanish in orthonormal frames).
    """
    H = float(H)
    normal = 2.0 * params.sigma * H - 4.0 * params.tau * H**2
    if grad_H is None:
        tangential = np.zeros(2)
    else:
        grad_H = np.asarray(grad_H, dtype=float)
        ginv = np.eye(2) if metric_inv is None else np.asarray(metric_inv, dtype=float)
        tangential = -2.0 * params.tau * (ginv @ grad_H)
    return tangential, normal


def tolman_pressure(params, H):
    """Size-corrected capillary pressure 2 sigma H (1 - delta H)."""
    H = np.asarray(H, dtype=float)
    return 2.0 * params.sigma * H * (1.0 - params.delta * H)


@dataclass
class TolmanCurve:
    """Pressure-vs-radius table for a uniform-tension droplet.

    Columns: R, H = 1/R, dp_tolman, dp_young_laplace = 2 sigma H, and the
    relative size effect delta_H = delta * H.  Row identity
    ``dp_tolman = dp_young_laplace * (1 - delta_H)`` holds to 1e-12.
    """

    params: IsotropicSurfaceParams
    radii: np.ndarray
    mean_curvatures: np.ndarray = field(init=False)
    dp_tolman: np.ndarray = field(init=False)
    dp_young_laplace: np.ndarray = field(init=False)
    delta_H: np.ndarray = field(init=False)

    CSV_HEADER = "R,H,dp_tolman,dp_young_laplace,delta_H"

    def __post_init__(self):
        self.radii = np.asarray(self.radii, dtype=float)
        if np.any(self.radii <= 0):
            raise ValueError("radii must be positive")
        H = 1.0 / self.radii
        self.mean_curvatures = H
        self.dp_young_laplace = 2.0 * self.params.sigma * H
        self.delta_H = self.params.delta * H
        self.dp_tolman = tolman_pressure(self.params, H)
        # row identities: factored form and the normal boundary value agree
        ident = self.dp_young_laplace * (1.0 - self.delta_H)
        scale = 1.0 + np.abs(self.dp_tolman).max()
        if np.abs(ident - self.dp_tolman).max() > 1e-12 * scale:
            raise AssertionError("pressure factorization identity violated")
        normals = np.array([isotropic_bc_values(self.params, h)[1] for h in H])
        if np.abs(normals - self.dp_tolman).max() > 1e-12 * scale:
            raise AssertionError("normal boundary value identity violated")

    def rows(self):
        return np.column_stack([self.radii, self.mean_curvatures,
                                self.dp_tolman, self.dp_young_laplace,
                                self.delta_H])

    def write_csv(self, path, comments=()):
        with open(path, "w", encoding="utf-8") as fh:
            for line in comments:
                fh.write(f"# {line}\n")
            fh.write(self.CSV_HEADER + "\n")
            for row in self.rows():
                fh.write(",".join(f"{v:.17g}" for v in row) + "\n")


def tolman_curve(params, radii):
    radii = np.sort(np.asarray(radii, dtype=float))
    return TolmanCurve(params, radii)


# -- equivalence report ---------------------------------------------------------

@dataclass
class ReductionRow:
    name: str
    passed: Optional[bool]
    max_deviation: float
    tolerance: Optional[float]
    note: str = ""


@dataclass
class ReductionReport:
    rows: list

    @property
    def all_passed(self):
        return all(r.passed for r in self.rows if r.passed is not None)

    def row(self, name):
        for r in self.rows:
            if r.name == name:
                return r
        raise KeyError(name)

    def format_table(self):
        lines = [f"{'check':44s} {'status':8s} {'max dev':>12s} {'tol':>9s}  note"]
        for r in self.rows:
            status = "finding" if r.passed is None else ("pass" if r.passed else "FAIL")
            tol = "-" if r.tolerance is None else f"{r.tolerance:.0e}"
            lines.append(f"{r.name:44s} {status:8s} {r.max_deviation:12.3e} "
                         f"{tol:>9s}  {r.note}")
        return "\n".join(lines)

    def to_json(self):
        return json.dumps([{
            "name": r.name,
            "passed": r.passed,
            "max_deviation": r.max_deviation,
            "tolerance": r.tolerance,
            "note": r.note,
        } for r in self.rows], indent=2)


class _CubicPotential:
    """Quadratic-plus-cubic scalar potential for exercising hessian terms."""

    is_quadratic = False

    def __init__(self, linear, matrix, cubic):
        self.linear = np.asarray(linear, dtype=float)
        self.matrix = np.asarray(matrix, dtype=float)
        self.matrix = 0.5 * (self.matrix + self.matrix.T)
        self.cubic = float(cubic)

    def value(self, phi):
        return (phi @ self.linear
                + 0.5 * np.einsum("mi,ij,mj->m", phi, self.matrix, phi)
                + self.cubic / 6.0 * (phi**3).sum(axis=1))

    def grad(self, phi):
        return self.linear + phi @ self.matrix + 0.5 * self.cubic * phi**2

    def hess(self, phi):
        base = np.broadcast_to(self.matrix, (phi.shape[0],) + self.matrix.shape).copy()
        idx = np.arange(phi.shape[1])
        base[:, idx, idx] += self.cubic * phi
        return base


def _random_potential(rng, k):
    return _CubicPotential(rng.standard_normal(k),
                           rng.standard_normal((k, k)),
                           rng.standard_normal())


def _random_coeffs(rng, k, with_channels=True):
    kwargs = dict(
        n_components=k,
        gamma_bar=_random_potential(rng, k),
        gamma_hat=_random_potential(rng, k),
        chi=rng.standard_normal((2, k)),
        kappa=rng.standard_normal((2, k)),
        div_chi=rng.standard_normal(k),
        div_kappa=rng.standard_normal(k),
    )
    if with_channels:
        kwargs.update(
            chi_tilde=rng.standard_normal(2),
            gamma0=_random_potential(rng, k),
            kappa_hat=rng.standard_normal(2),
            gamma1=_random_potential(rng, k),
        )
    return RestrictedPointCoeffs(**kwargs)


def _fixture_jets():
    sphere = AnalyticSurface.sphere(1.0)
    torus = AnalyticSurface.torus(2.0, 0.5)
    jets = {"sphere": [], "torus": []}
    for theta in (0.5, 1.2, 2.3):
        for phi in (0.3, 2.1, 4.4):
            jets["sphere"].append(evaluate_jet(sphere, theta, phi))
    for u in (0.4, 1.7, 3.9):
        for v in (0.7, 2.0, 3.6, 5.1):
            jets["torus"].append(evaluate_jet(torus, u, v))
    return jets


def verify_reductions(trials=25, seed=0):
    """Cross-check every reduction step; returns a :class:`ReductionReport`.

    Analytic rows use sphere and torus jets with random restricted data;
    discrete rows compare the mesh machinery against closed forms under
    refinement.  The printed-sign discrepancy of the adapted-frame normal
    row is measured and reported as a finding, not asserted.
    """
    rng = np.random.default_rng(seed)
    jets = _fixture_jets()
    rows = []
    TIGHT = 1e-10

    def run_states(jet_list, k, fn):
        worst = 0.0
        for jet in jet_list:
            for _ in range(trials):
                phi = rng.standard_normal(k)
                dphi = rng.standard_normal((2, k))
                point = BoundaryPoint.from_jet(jet, phi, dphi)
                worst = max(worst, fn(point))
        return worst

    # 1. reduced route equals the general route when the drift channels are
    # covariantly constant and the curvature is uniform (sphere fixture).
    def check_reduced(point):
        coeffs = _random_coeffs(rng, 3)
        coeffs.div_chi_tilde = 0.0
        coeffs.div_kappa_hat = 0.0
        g = general_bc_rhs(point, coeffs)
        r = reduced_bc_rhs(coeffs, point)
        return float(np.abs(g - r).max())

    dev = run_states(jets["sphere"], 3, check_reduced)
    rows.append(ReductionRow(
        "reduced_equals_general_uniform_curvature", dev <= TIGHT, dev, TIGHT,
        "drift-channel derivative terms cancel through the potential hessians"))

    # 2. the plain drift channel drops from the general route entirely
    # (variable curvature included) when its coefficient is divergence-free.
    def check_gamma0_channel(point):
        base = _random_coeffs(rng, 3, with_channels=False)
        with_chan = RestrictedPointCoeffs(
            3, gamma_bar=base.gamma_bar, gamma_hat=base.gamma_hat,
            chi=base.chi, kappa=base.kappa,
            div_chi=base.div_chi, div_kappa=base.div_kappa,
            chi_tilde=rng.standard_normal(2), gamma0=_random_potential(rng, 3))
        g0 = general_bc_rhs(point, base)
        g1 = general_bc_rhs(point, with_chan)
        return float(np.abs(g1 - g0).max())

    dev = run_states(jets["torus"], 3, check_gamma0_channel)
    rows.append(ReductionRow(
        "plain_drift_channel_drops", dev <= TIGHT, dev, TIGHT,
        "divergence-free drift in the plain pair never reaches the boundary condition"))

    # 3. the curvature drift channel leaves exactly one remnant, the
    # curvature-gradient coupling; zero on uniform-curvature surfaces.
    def check_gamma1_channel(point):
        base = _random_coeffs(rng, 3, with_channels=False)
        kappa_hat = rng.standard_normal(2)
        gamma1 = _random_potential(rng, 3)
        with_chan = RestrictedPointCoeffs(
            3, gamma_bar=base.gamma_bar, gamma_hat=base.gamma_hat,
            chi=base.chi, kappa=base.kappa,
            div_chi=base.div_chi, div_kappa=base.div_kappa,
            kappa_hat=kappa_hat, gamma1=gamma1)
        g0 = general_bc_rhs(point, base)
        g1 = general_bc_rhs(point, with_chan)
        remnant = -2.0 * float(kappa_hat @ point.grad_H) * _pot_grad(gamma1, point.phi)
        return float(np.abs((g1 - g0) - remnant).max())

    dev = run_states(jets["torus"], 3, check_gamma1_channel)
    rows.append(ReductionRow(
        "curvature_drift_channel_remnant", dev <= TIGHT, dev, TIGHT,
        "remnant -2 (khat . grad H) dgamma1/dphi; zero where curvature is uniform "
        "and omitted by the reduced route"))

    # 4. normal projection identity between the component form and the
    # projected form of the uniform-tension condition, potentials included.
    def check_projection(point):
        sigma, tau = rng.uniform(0.2, 2.0), rng.uniform(-0.5, 0.5)
        gbar = _random_potential(rng, 3)
        ghat = _random_potential(rng, 3)
        spec_coeffs = coeffs_from_surface_isotropic(sigma, tau, point)
        spec_coeffs.gamma_bar = gbar
        spec_coeffs.gamma_hat = ghat
        g = general_bc_rhs(point, spec_coeffs)
        nu = -point.normal                       # inward frame normal
        H = point.mean_curvature
        projected = (2.0 * sigma * H
                     - float(_pot_grad(gbar, point.phi) @ nu)
                     + 2.0 * H * (float(_pot_grad(ghat, point.phi) @ nu)
                                  - 2.0 * tau * H))
        return abs(float(g @ nu) - projected)

    dev = run_states(jets["sphere"] + jets["torus"], 3, check_projection)
    rows.append(ReductionRow(
        "normal_projection_identity", dev <= TIGHT, dev, TIGHT,
        "component row equals the inward-projected form"))

    # 5. tangential row of the uniform-tension condition: -2 tau raised grad H
    # (metric-derivative terms vanish in the invariant evaluation).
    def check_tangential(point):
        sigma, tau = rng.uniform(0.2, 2.0), rng.uniform(-0.5, 0.5)
        coeffs = coeffs_from_surface_isotropic(sigma, tau, point)
        g = general_bc_rhs(point, coeffs)
        tang = point.tangential_components(g)
        expect = -2.0 * tau * point.raise_index(point.grad_H)
        return float(np.abs(tang - expect).max())

    dev = run_states(jets["torus"], 3, check_tangential)
    rows.append(ReductionRow(
        "tangential_row_tension_gradient", dev <= TIGHT, dev, TIGHT,
        "evaluated invariantly; chart metric-derivative terms are frame artifacts"))

    # 6. pressure algebra: normal value, factored form, limits.
    worst = 0.0
    for _ in range(trials):
        sigma = rng.uniform(0.1, 3.0)
        tau = rng.uniform(0.0, 0.5) * sigma
        params = IsotropicSurfaceParams(sigma, tau)
        H = rng.uniform(0.05, 5.0)
        _, normal = isotropic_bc_values(params, H)
        worst = max(worst, abs(normal - float(tolman_pressure(params, H))))
        if params.delta > 0:
            worst = max(worst, abs(float(tolman_pressure(params, 1.0 / params.delta))))
    rows.append(ReductionRow(
        "pressure_normal_value_identity", worst <= 1e-12, worst, 1e-12,
        "normal boundary value equals the factored pressure; zero at R = delta"))

    # 7. tied curvature pair: the general route with the pair scaled by
    # delta/2 equals the size-corrected one-channel form.
    def check_tied(point):
        coeffs = _random_coeffs(rng, 3)
        coeffs.kappa = np.zeros((2, 3))
        coeffs.div_kappa = np.zeros(3)
        coeffs.gamma_hat = None
        coeffs.kappa_hat = None
        coeffs.gamma1 = None
        delta = rng.uniform(-0.4, 0.4)
        g = general_bc_rhs(point, tie_curvature_channel(coeffs, delta))
        e = extended_bc_rhs(point, coeffs, delta)
        return float(np.abs(g - e).max())

    dev = run_states(jets["sphere"] + jets["torus"], 3, check_tied)
    rows.append(ReductionRow(
        "tied_pair_equals_size_corrected_form", dev <= TIGHT, dev, TIGHT,
        "identity holds for constant delta including drift channels"))

    # 8. adapted-frame expansions against the frame-free route, for
    # frame-constant coefficient components.
    dev_t, dev_n, dev_printed, printed_closed = 0.0, 0.0, 0.0, 0.0
    for jet in jets["sphere"] + jets["torus"]:
        for _ in range(trials):
            chi_f = rng.standard_normal((2, 3))
            kappa_f = rng.standard_normal((2, 3))
            phi = rng.standard_normal(3)
            dgb = rng.standard_normal(3)
            dgh = rng.standard_normal(3)
            terms = expansion_terms(jet, chi=chi_f, kappa=kappa_f,
                                    dgamma_bar=dgb, dgamma_hat=dgh)
            div_chi = adapted_coefficient_divergence(jet, chi_f)
            div_kappa = adapted_coefficient_divergence(jet, kappa_f)
            nu = -jet.normal
            tangents = jet.tangents
            H = jet.mean_curvature
            kap_mom = (kappa_f[:, :2] @ tangents + kappa_f[:, 2:] * nu)   # (2, 3)
            dgb_cart = dgb[:2] @ tangents + dgb[2] * nu
            dgh_cart = dgh[:2] @ tangents + dgh[2] * nu
            rhs_cart = (div_chi - dgb_cart
                        + 2.0 * H * (dgh_cart - div_kappa)
                        - 2.0 * np.einsum("ak,a->k", kap_mom, jet.d_H))
            tang = jet.metric_inv @ (tangents @ rhs_cart)
            norm = float(nu @ rhs_cart)
            dev_t = max(dev_t, float(np.abs(tang - terms.rhs_tangential_printed).max()))
            dev_n = max(dev_n, abs(norm - terms.rhs_normal_corrected))
            printed_dev = abs(terms.rhs_normal_printed - terms.rhs_normal_corrected)
            closed = abs(4.0 * H * (terms.kappa_conn_n + terms.kappa_curv_n))
            dev_printed = max(dev_printed, printed_dev)
            printed_closed = max(printed_closed, abs(printed_dev - closed))

    rows.append(ReductionRow(
        "adapted_tangential_row_matches", dev_t <= TIGHT, dev_t, TIGHT,
        "printed tangential expansion agrees with the frame-free route"))
    rows.append(ReductionRow(
        "adapted_normal_row_corrected_matches", dev_n <= TIGHT, dev_n, TIGHT,
        "normal expansion with corrected curvature-block signs agrees"))
    rows.append(ReductionRow(
        "adapted_normal_row_printed_signs", None, dev_printed, None,
        "printed normal row deviates from the frame-free route by exactly "
        f"4H(connection+curvature kappa couplings); closed-form match {printed_closed:.2e}"))

    # 9. discrete route: mesh surface-action gradient reproduces the droplet
    # normal value under refinement.
    from .lagrangian_library import make_isotropic_surface
    from .variational_engine import surface_action_gradient
    sigma, tau = 1.0, 0.05
    spec = make_isotropic_surface(sigma, tau)
    devs = []
    for level in (2, 3):
        mesh = build_icosphere(1.0, level)
        vals = np.zeros((mesh.n_vertices, 3))
        g = surface_action_gradient(mesh, spec, vals)
        rhs = -g / mesh.vertex_areas[:, None]
        normal_vals = -np.einsum("vk,vk->v", rhs, mesh.vertices / 1.0)
        expect = 2.0 * sigma - 4.0 * tau
        devs.append(float(np.abs(normal_vals - expect).max() / abs(expect)))
    disc_tol = 0.05
    refining = devs[-1] < devs[0] or devs[-1] <= 1e-10
    rows.append(ReductionRow(
        "discrete_droplet_normal_value", devs[-1] <= disc_tol and refining,
        devs[-1], disc_tol,
        f"mesh route vs closed form, refining {devs[0]:.3e} -> {devs[-1]:.3e}"))

    return ReductionReport(rows)


def coeffs_from_surface_isotropic(sigma, tau, point):
    """Chart coefficients of the uniform-tension pair at a point."""
    tang = point.tangents
    H = point.mean_curvature
    n = point.normal

    def project(c):
        return point.metric_inv @ (tang @ c)

    chi = np.stack([project(sigma * np.eye(3)[c]) for c in range(3)], axis=1)
    kappa = np.stack([project(tau * np.eye(3)[c]) for c in range(3)], axis=1)
    return RestrictedPointCoeffs(
        3, chi=chi, kappa=kappa,
        div_chi=-2.0 * H * sigma * n,
        div_kappa=-2.0 * H * tau * n,
    )
