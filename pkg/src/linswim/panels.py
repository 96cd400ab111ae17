"""Exterior Neumann problem for the 2D Laplace equation by source panels.

Constant-strength source panels, collocation at panel midpoints. With
panel normals ``n`` pointing into the bodies, the unknown strengths solve

    -sigma_i / 2 + sum_{j != i} sigma_j (grad phi_j)(x_i) . n_i = g_i

where ``g = w . n`` is the prescribed normal velocity. The additive constant
of the potential is irrelevant: every quantity built from it pairs the
potential with compatible (zero-flux) data.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import warnings

import numpy as np
from scipy.linalg import LinAlgWarning, lapack, lu_factor, lu_solve

from .geometry import BodyBoundary, loop_fluxes

CONDITION_LIMIT = 1e12
FOUR_PI = 4.0 * np.pi


class IncompatibleFluxError(ValueError):
    """Neumann data with nonzero net flux through a closed loop."""


class IllConditionedError(RuntimeError):
    """The panel system is numerically singular (e.g. touching loops)."""


def source_influence(points: np.ndarray, b: BodyBoundary, potential: bool = True):
    """Potential and velocity induced at ``points`` by unit-strength panels.

    Returns ``(phi, vel)`` with shapes ``(p, n)`` and ``(p, n, 2)``; ``phi``
    is None when ``potential`` is False. The velocity on a panel itself is
    the limit from the fluid side.
    """
    pts = np.asarray(points, dtype=float)
    t = b.tangents
    nu = -b.normals  # out of the body, into the fluid
    half = 0.5 * b.lengths
    rel = pts[:, None, :] - b.midpoints[None, :, :]
    xi = np.einsum("pnk,nk->pn", rel, t)
    eta = np.einsum("pnk,nk->pn", rel, nu)
    ua, ub = xi + half, xi - half
    ra2 = ua * ua + eta * eta
    rb2 = ub * ub + eta * eta
    on_panel = (np.abs(eta) <= 1e-13 * half) & (np.abs(xi) < half)
    eta_s = np.where(on_panel, 0.0, eta)
    with np.errstate(divide="ignore", invalid="ignore"):
        u_xi = np.log(ra2 / rb2) / FOUR_PI
        u_eta = (np.arctan2(eta_s, ub) - np.arctan2(eta_s, ua)) / (2.0 * np.pi)
    u_eta = np.where(on_panel, 0.5, u_eta)
    vel = u_xi[..., None] * t[None] + u_eta[..., None] * nu[None]
    phi = None
    if potential:
        phi = (_antiderivative(ua, eta) - _antiderivative(ub, eta)) / FOUR_PI
    return phi, vel


def influence_matrices(points, normals, b: BodyBoundary, self_block: bool = True):
    """Collocation matrix (normal velocity at ``points`` along ``normals``) and
    potential matrix for unit source strengths on ``b``."""
    phi, vel = source_influence(points, b)
    A = np.einsum("pnk,pk->pn", vel, normals)
    if self_block:
        np.fill_diagonal(A, -0.5)
    return A, phi


def _antiderivative(u, eta):
    """F(u) = u ln(u^2 + eta^2) - 2u + 2 eta atan(u / eta), with its limits."""
    r2 = u * u + eta * eta
    with np.errstate(divide="ignore", invalid="ignore"):
        log_term = np.where(u == 0.0, 0.0, u * np.log(r2))
        atan_term = np.where(eta == 0.0, 0.0, 2.0 * eta * np.arctan(u / eta))
    return log_term - 2.0 * u + atan_term


@dataclass(frozen=True, eq=False)
class PanelSolution:
    """Source strengths and boundary potentials, one column per data vector."""

    boundary: BodyBoundary
    data: np.ndarray
    strengths: np.ndarray
    potential_at_panels: np.ndarray
    condition: float
    normal_derivative: np.ndarray = field(repr=False)

    def residual(self) -> float:
        """Relative mismatch of the reconstructed normal derivative."""
        scale = max(np.max(np.abs(self.data)), 1e-300)
        return float(np.max(np.abs(self.normal_derivative - self.data)) / scale)

    def velocity(self, points) -> np.ndarray:
        """Fluid velocity at arbitrary points, shape (p, k, 2) or (p, 2)."""
        _, vel = source_influence(np.atleast_2d(points), self.boundary, potential=False)
        out = np.einsum("pnd,nk->pkd", vel, np.atleast_2d(self.strengths.T).T)
        return out[:, 0, :] if self.strengths.ndim == 1 else out


class PanelOperator:
    """Factorized collocation system for one boundary, reusable across data."""

    def __init__(self, b: BodyBoundary, matrix: np.ndarray | None = None, potential_matrix: np.ndarray | None = None):
        self.boundary = b
        if matrix is None:
            matrix, potential_matrix = influence_matrices(b.midpoints, b.normals, b)
        A = matrix
        phi = potential_matrix
        self.matrix = A
        self.potential_matrix = phi
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", LinAlgWarning)
            self.lu = lu_factor(A)
        anorm = np.linalg.norm(A, 1)
        rcond, _ = lapack.dgecon(self.lu[0], anorm, norm="1")
        self.condition = np.inf if rcond == 0 else 1.0 / rcond
        if not self.condition < CONDITION_LIMIT:
            raise IllConditionedError(f"panel system condition estimate {self.condition:.3g} exceeds {CONDITION_LIMIT:g}")

    def solve(self, data, check_flux: bool = True) -> PanelSolution:
        data = np.asarray(data, dtype=float)
        b = self.boundary
        if data.shape[0] != b.n_panels:
            raise ValueError(f"expected {b.n_panels} data values, got {data.shape[0]}")
        if check_flux:
            flux = loop_fluxes(b, data)
            scale = max(1.0, float(np.max(loop_fluxes(b, np.abs(data)))))
            if np.any(np.abs(flux) > 1e-8 * scale):
                raise IncompatibleFluxError(f"net loop flux {np.max(np.abs(flux)):.3g} is not zero")
        sigma = lu_solve(self.lu, data)
        return PanelSolution(
            boundary=b,
            data=data,
            strengths=sigma,
            potential_at_panels=self.potential_matrix @ sigma,
            condition=self.condition,
            normal_derivative=self.matrix @ sigma,
        )


def solve_neumann(b: BodyBoundary, data, obstacle: BodyBoundary | None = None) -> PanelSolution:
    """Solve the exterior Neumann problem ``d phi / dn = data`` on ``b``.

    With an obstacle, its panels are appended with zero data (fixed wall).
    """
    data = np.asarray(data, dtype=float)
    if obstacle is not None:
        b = b.union(obstacle)
        pad = np.zeros((obstacle.n_panels,) + data.shape[1:])
        data = np.concatenate([data, pad])
    return PanelOperator(b).solve(data)


def boundary_pairing(sol_i: PanelSolution, data_j: np.ndarray) -> np.ndarray:
    """Matrix of ``sum_k phi_i(x_k) g_j(x_k) L_k`` over all panels."""
    L = sol_i.boundary.lengths
    phi = np.atleast_2d(sol_i.potential_at_panels.T).T
    g = np.atleast_2d(np.asarray(data_j).T).T
    return phi.T @ (g * L[:, None])
