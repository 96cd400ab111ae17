"""High-Reynolds swimmers in an ideal fluid with potential flow.

The flow potential splits into elementary potentials, one per rigid mode
``(omega, vx, vy)`` and one per shape mode, each solving the exterior
Neumann problem with unit-mode data. Kinetic energies follow from the
boundary pairing ``rho_f * sum phi_i (w_j . n) L``.

In free space, starting from rest, the total impulse stays zero and the
dynamics reduce to ``q' = -frame(theta) Mr(s)^{-1} N(s) s'``. Near a fixed
obstacle the Euler-Lagrange equations stay second order; they are written
in world coordinates with every derivative of the placement-dependent
matrices taken by central differences.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from .engine import ShapePath, SwimmerField, TabulatedConnection, Trajectory, connection_field, estimate_bound
from .geometry import (
    BodyBoundary,
    ScallopGeometry,
    build_scallop,
    closest_distance,
    rigid_mode_data,
    scallop_mass_matrix,
)
from .lowre import ALPHA_REST, STROKE_LIMIT, GrandMatrices, ShapeRangeError
from .panels import PanelOperator, PanelSolution, influence_matrices
from .se2 import BodyTwist, Pose, frame_matrix, inverse, rotation


class CollisionStop(RuntimeError):
    """The swimmer reached the minimal admissible gap to the obstacle."""


@dataclass(frozen=True, eq=False)
class KirchhoffBasis:
    """Elementary potentials: columns 0-2 rigid modes, then shape modes."""

    solution: PanelSolution

    @property
    def boundary(self) -> BodyBoundary:
        return self.solution.boundary

    @property
    def n_modes(self) -> int:
        return self.solution.strengths.shape[1] - 3

    def energy_pairing(self) -> np.ndarray:
        """Unsymmetrized ``sum_k phi_i(x_k) g_j(x_k) L_k`` (per unit fluid density)."""
        sol = self.solution
        return sol.potential_at_panels.T @ (sol.data * self.boundary.lengths[:, None])


def kirchhoff_basis(b: BodyBoundary, obstacle: BodyBoundary | None = None) -> KirchhoffBasis:
    """Solve for all elementary potentials of ``b`` (optionally beside a fixed wall)."""
    full = b if obstacle is None else b.union(obstacle)
    data = np.concatenate([rigid_mode_data(full), full.mode_normal_data()], axis=1)
    return KirchhoffBasis(PanelOperator(full).solve(data))


def _sym(E):
    return 0.5 * (E + E.T)


def added_mass(basis: KirchhoffBasis, rho_f: float = 1.0) -> np.ndarray:
    """Symmetrized 3 x 3 fluid mass matrix."""
    return rho_f * _sym(basis.energy_pairing()[:3, :3])


def added_mass_asymmetry(basis: KirchhoffBasis) -> float:
    """``|M - M^T| / |M|`` of the rigid block before symmetrization."""
    E = basis.energy_pairing()[:3, :3]
    return float(np.linalg.norm(E - E.T) / np.linalg.norm(E))


def coupling_highre(basis: KirchhoffBasis, rho_f: float = 1.0) -> np.ndarray:
    """Shape coupling ``N`` (3 x m), averaged over the two equivalent pairings."""
    E = basis.energy_pairing()
    return rho_f * 0.5 * (E[:3, 3:] + E[3:, :3].T)


def coupling_asymmetry(basis: KirchhoffBasis) -> float:
    E = basis.energy_pairing()
    a, b = E[:3, 3:], E[3:, :3].T
    return float(np.linalg.norm(a - b) / max(np.linalg.norm(a), 1e-300))


def shape_energy(basis: KirchhoffBasis, rho_f: float = 1.0) -> np.ndarray:
    """Fluid kinetic-energy matrix of the shape modes (m x m)."""
    return rho_f * _sym(basis.energy_pairing()[3:, 3:])


def full_mass(s, geom: ScallopGeometry = ScallopGeometry(), rho_0: float = 1.0, rho_f: float = 1.0,
              basis: KirchhoffBasis | None = None) -> GrandMatrices:
    """``Mr = diag(I, m, m) + M_f`` and ``N`` for the scallop at opening ``s``."""
    g = geom.with_alpha(float(np.atleast_1d(s)[0]))
    if basis is None:
        basis = kirchhoff_basis(build_scallop(g))
    Mr = scallop_mass_matrix(g, rho_0) + added_mass(basis, rho_f)
    return GrandMatrices(Mr, coupling_highre(basis, rho_f))


def highre_connection(geom: ScallopGeometry = ScallopGeometry(), rho_0: float = 1.0, rho_f: float = 1.0,
                      alpha_rest: float = ALPHA_REST, stroke_limit: float = STROKE_LIMIT):
    """Free-space body connection ``s -> -Mr(s)^{-1} N(s)`` by direct panel solves."""

    def connection(s):
        alpha = float(np.atleast_1d(s)[0])
        if abs(alpha - alpha_rest) > stroke_limit + 1e-9:
            raise ShapeRangeError(f"opening {alpha:.6g} outside {alpha_rest:.6g} +/- {stroke_limit:.6g}")
        return full_mass(alpha, geom, rho_0, rho_f).connection()

    return connection


def highre_free_field(q, s, sdot, geom: ScallopGeometry = ScallopGeometry(), rho_0: float = 1.0, rho_f: float = 1.0) -> np.ndarray:
    """World rate of the free-space scallop, ``-frame(theta) Mr^{-1} N s'``."""
    q = q.as_array() if isinstance(q, Pose) else np.asarray(q, dtype=float)
    A = full_mass(s, geom, rho_0, rho_f).connection()
    return frame_matrix(q[0]) @ (A @ np.atleast_1d(sdot))


def highre_swimmer(geom: ScallopGeometry = ScallopGeometry(), rho_0: float = 1.0, rho_f: float = 1.0,
                   tabulate: bool = True, degree: int = 32, alpha_rest: float = ALPHA_REST,
                   stroke_limit: float = STROKE_LIMIT) -> SwimmerField:
    """Free-space potential-flow scallop as a pluggable first-order field.

    With ``tabulate`` the connection is replaced by its Chebyshev interpolant
    over the stroke range, which removes panel solves from the time loop.
    """
    lo, hi = alpha_rest - stroke_limit, alpha_rest + stroke_limit
    conn = highre_connection(geom, rho_0, rho_f, alpha_rest, stroke_limit)
    if tabulate:
        conn = TabulatedConnection(conn, lo, hi, degree)
    K = estimate_bound(conn, ((lo, hi),), n=41 if not tabulate else 201)
    return connection_field(conn, ((lo, hi),), K, "highre")


# ---------------------------------------------------------------------------
# second-order dynamics


@dataclass(frozen=True)
class RichState:
    """Placement and body twist: the state of the second-order dynamics."""

    q: Pose
    qdot: BodyTwist

    def as_array(self) -> np.ndarray:
        return np.concatenate([self.q.as_array(), self.qdot.as_array()])

    @classmethod
    def from_array(cls, y) -> "RichState":
        return cls(Pose.from_array(y[:3]), BodyTwist.from_array(y[3:]))


@dataclass(eq=False)
class HighReModel:
    """Scallop in an ideal fluid, optionally beside a fixed obstacle (world frame)."""

    geom: ScallopGeometry = field(default_factory=ScallopGeometry)
    obstacle: BodyBoundary | None = None
    rho_0: float = 1.0
    rho_f: float = 1.0
    min_gap: float | None = None
    cache_size: int = 64

    def __post_init__(self):
        if self.min_gap is None:
            self.min_gap = 0.05 * self.geom.b
        self.length = 2.0 * self.geom.a
        self.dq = np.array([1e-4, 1e-4 * self.length, 1e-4 * self.length])
        self.ds = 1e-4
        self._body = lru_cache(maxsize=self.cache_size)(self._body_matrices)
        self._swimmer = lru_cache(maxsize=self.cache_size)(self._swimmer_blocks)
        self._obstacle_block = None
        if self.obstacle is not None:
            o = self.obstacle
            self._obstacle_block = influence_matrices(o.midpoints, o.normals, o)

    def swimmer(self, s: float) -> BodyBoundary:
        return self._swimmer(float(s))[0]

    def _swimmer_blocks(self, s: float):
        b = build_scallop(self.geom.with_alpha(s))
        return (b,) + influence_matrices(b.midpoints, b.normals, b)

    def _coupled_basis(self, s: float, obst: BodyBoundary) -> KirchhoffBasis:
        """Basis beside ``obst`` (body frame), reusing the rigid-motion invariant blocks."""
        b, A_ss, P_ss = self._swimmer(s)
        A_oo, P_oo = self._obstacle_block
        A_so, P_so = influence_matrices(b.midpoints, b.normals, obst, self_block=False)
        A_os, P_os = influence_matrices(obst.midpoints, obst.normals, b, self_block=False)
        full = b.union(obst)
        data = np.concatenate([rigid_mode_data(full), full.mode_normal_data()], axis=1)
        op = PanelOperator(full, np.block([[A_ss, A_so], [A_os, A_oo]]), np.block([[P_ss, P_so], [P_os, P_oo]]))
        return KirchhoffBasis(op.solve(data))

    def gap(self, s: float, q) -> float:
        if self.obstacle is None:
            return np.inf
        world = self.swimmer(s).transformed(Pose.from_array(q))
        return closest_distance(world, self.obstacle)

    def _body_matrices(self, s: float, q: tuple | None):
        """Body-frame ``(M, N, C)`` at shape s; q only matters with an obstacle."""
        if self.obstacle is None:
            b, A_ss, P_ss = self._swimmer(s)
            data = np.concatenate([rigid_mode_data(b), b.mode_normal_data()], axis=1)
            basis = KirchhoffBasis(PanelOperator(b, A_ss, P_ss).solve(data))
        else:
            basis = self._coupled_basis(s, self.obstacle.transformed(inverse(Pose.from_array(q))))
        M = scallop_mass_matrix(self.geom.with_alpha(s), self.rho_0) + added_mass(basis, self.rho_f)
        return M, coupling_highre(basis, self.rho_f), shape_energy(basis, self.rho_f)

    def body_matrices(self, s: float, q) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        key = None if self.obstacle is None else tuple(float(v) for v in q)
        return self._body(float(s), key)

    def world_matrices(self, s: float, q):
        """Mass ``A = F M F^T``, coupling ``B = F N`` and shape energy ``C`` in world rates."""
        M, N, C = self.body_matrices(s, q)
        F = frame_matrix(q[0])
        return F @ M @ F.T, F @ N, C

    def derivatives(self, s: float, q):
        """Central differences of (A, B, C) in each placement coordinate and in s."""
        q = np.asarray(q, dtype=float)
        dA, dB, dC = [], [], []
        for k in range(3):
            e = np.zeros(3)
            e[k] = self.dq[k]
            if self.obstacle is None and k > 0:
                A0, B0, C0 = self.world_matrices(s, q)
                dA.append(np.zeros_like(A0)), dB.append(np.zeros_like(B0)), dC.append(np.zeros_like(C0))
                continue
            Ap, Bp, Cp = self.world_matrices(s, q + e)
            Am, Bm, Cm = self.world_matrices(s, q - e)
            h = 2 * self.dq[k]
            dA.append((Ap - Am) / h), dB.append((Bp - Bm) / h), dC.append((Cp - Cm) / h)
        Ap, Bp, _ = self.world_matrices(s + self.ds, q)
        Am, Bm, _ = self.world_matrices(s - self.ds, q)
        return dA, dB, dC, (Ap - Am) / (2 * self.ds), (Bp - Bm) / (2 * self.ds)

    def accelerations(self, q, qdot_world, s, sdot, sddot) -> np.ndarray:
        """World accelerations from ``d/dt dT/dq' - dT/dq = 0``."""
        s0 = float(np.atleast_1d(s)[0])
        sd = np.atleast_1d(sdot).astype(float)
        sdd = np.atleast_1d(sddot).astype(float)
        A, B, _ = self.world_matrices(s0, q)
        dA, dB, dC, dAs, dBs = self.derivatives(s0, q)
        v = np.asarray(qdot_world, dtype=float)
        Adot = sum(dA[k] * v[k] for k in range(3)) + dAs * sd[0]
        Bdot = sum(dB[k] * v[k] for k in range(3)) + dBs * sd[0]
        dT = np.array([0.5 * v @ dA[k] @ v + v @ dB[k] @ sd + 0.5 * sd @ dC[k] @ sd for k in range(3)])
        rhs = -Adot @ v - Bdot @ sd - B @ sdd + dT
        return np.linalg.solve(A, rhs)

    def impulse(self, s: float, q, qdot_world, sdot) -> np.ndarray:
        """Generalized momentum ``A q' + B s'`` (zero for free swimming from rest)."""
        A, B, _ = self.world_matrices(float(s), q)
        return A @ np.asarray(qdot_world) + B @ np.atleast_1d(sdot)


def obstacle_dynamics_step(state: RichState, s, sdot, sddot, model: HighReModel):
    """Time derivative of a :class:`RichState`: ``(q', xi')`` as two 3-arrays.

    Raises :class:`CollisionStop` when the swimmer is within the model's
    minimal gap of the obstacle.
    """
    q = state.q.as_array()
    s0 = float(np.atleast_1d(s)[0])
    if model.gap(s0, q) <= model.min_gap:
        raise CollisionStop(f"gap below {model.min_gap:g} at q={q.tolist()}, s={s0!r}")
    xi = state.qdot.as_array()
    F = frame_matrix(q[0])
    v = F @ xi
    acc = model.accelerations(q, v, s0, sdot, sddot)
    # xi = F^T v, so xi' = dF^T/dtheta * theta' * v + F^T v'
    dFT = np.zeros((3, 3))
    dFT[1:, 1:] = rotation(q[0] + np.pi / 2).T
    return v, dFT @ v * v[0] + F.T @ acc


def integrate_second_order(model: HighReModel, path: ShapePath, q0: Pose, step: float,
                           horizon: float | None = None, twist0: BodyTwist | None = None) -> Trajectory:
    """RK4 on the rich state; stops with status ``"collision"`` at contact."""
    T = path.horizon if horizon is None else float(horizon)
    n = max(1, int(round(T / step)))
    h = T / n
    y = np.concatenate([q0.as_array(), (twist0 or BodyTwist()).as_array()])

    def f(t, y):
        s, sd = path(t)
        dq, dxi = obstacle_dynamics_step(RichState.from_array(y), s, sd, path.acceleration(t), model)
        return np.concatenate([dq, dxi])

    ts, ys, ss = [0.0], [y.copy()], [path.shape(0.0)]
    status = "ok"
    try:
        for i in range(n):
            t = i * h
            k1 = f(t, y)
            k2 = f(t + h / 2, y + h / 2 * k1)
            k3 = f(t + h / 2, y + h / 2 * k2)
            k4 = f(t + h, y + h * k3)
            y = y + h / 6 * (k1 + 2 * k2 + 2 * k3 + k4)
            t1 = T if i == n - 1 else (i + 1) * h
            ts.append(t1), ys.append(y.copy()), ss.append(path.shape(t1))
            if model.gap(float(ss[-1][0]), y[:3]) <= model.min_gap:
                status = "collision"
                break
    except CollisionStop:
        status = "collision"
    ys = np.array(ys)
    qdot = np.array([frame_matrix(row[0]) @ row[3:] for row in ys])
    return Trajectory(np.array(ts), np.array(ss), ys[:, :3], qdot, h, twist=ys[:, 3:], status=status)
