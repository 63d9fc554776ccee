"""Analytic coverage footprints, minimum-FOV bounds, and visibility checks.

A tilted PD with FOV psi_c sees an elliptical patch of the ceiling (the
intersection of its acceptance cone with the ceiling plane).  The union of
the per-PD ellipses (plus the central circle for a TPR) must reach every AP
from every UE position for full visibility.  Two constraints bound the
per-PD FOV from below for a fixed total budget psi_total = psi_c + theta_pd:

* constraint 1 - no hole directly above the receiver: psi_total/2 for a PR
  and psi_total/3 for a TPR;
* constraint 2 - the outer boundary must reach the worst-case horizontal AP
  distance d_c_min, evaluated at the azimuthal midpoint between adjacent
  side PDs (omega_c = pi / n_side), where the boundary is closest.

The bound is the maximum of the two.  Monte-Carlo visibility over sampled
UE positions verifies the analytic bound on a 1-degree grid.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import adr
from .adr import AdrLayout, layout_from_total_fov, vertical_normals
from .geometry import Orientation, rotation_matrix
from .orientation import OrientationModel, sample_arrays

SS = "ss"
DS = "ds"
MODES = (SS, DS)


@dataclass(frozen=True)
class EllipseSpec:
    """Footprint ellipse in the UE-centered horizontal frame.

    center is the ellipse center, rotation the major-axis azimuth; a circle
    is the a == b, rotation 0 case.
    """

    a: float
    b: float
    center: tuple
    rotation: float = 0.0

    def boundary_points(self, n: int = 360) -> np.ndarray:
        """(n, 2) points tracing the boundary."""
        t = np.linspace(0.0, 2.0 * math.pi, n, endpoint=False)
        x = self.a * np.cos(t)
        y = self.b * np.sin(t)
        c, s = math.cos(self.rotation), math.sin(self.rotation)
        return np.column_stack(
            [self.center[0] + c * x - s * y, self.center[1] + s * x + c * y]
        )

    def contains(self, x: float, y: float) -> bool:
        c, s = math.cos(self.rotation), math.sin(self.rotation)
        dx, dy = x - self.center[0], y - self.center[1]
        u = c * dx + s * dy
        v = -s * dx + c * dy
        return (u / self.a) ** 2 + (v / self.b) ** 2 <= 1.0 + 1e-12


def footprint_ellipse(h: float, psi_c: float, theta_pd: float) -> EllipseSpec:
    """Ceiling footprint of a PD tilted by theta_pd towards +x.

    a = h sin(2 psi_c) / (cos(2 psi_c) + cos(2 theta_pd)),
    b = sqrt(2) h sin(psi_c) / sqrt(cos(2 psi_c) + cos(2 theta_pd)),
    center offset x = h sin(2 theta_pd) / (cos(2 psi_c) + cos(2 theta_pd)).
    """
    if psi_c <= 0.0 or theta_pd < 0.0:
        raise ValueError("psi_c must be positive and theta_pd nonnegative")
    if psi_c + theta_pd >= math.pi / 2:
        raise ValueError("unbounded footprint: psi_c + theta_pd must be below 90 deg")
    denom = math.cos(2.0 * psi_c) + math.cos(2.0 * theta_pd)
    a = h * math.sin(2.0 * psi_c) / denom
    b = math.sqrt(2.0) * h * math.sin(psi_c) / math.sqrt(denom)
    x_center = h * math.sin(2.0 * theta_pd) / denom
    return EllipseSpec(a, b, (x_center, 0.0))


def adr_footprint(layout: AdrLayout, h: float) -> list[EllipseSpec]:
    """Per-PD footprints of a vertically oriented receiver.

    Side-PD ellipses are the first PD's footprint rotated by each PD azimuth
    about the UE axis; a TPR central PD contributes a circle of radius
    h tan(psi_c).
    """
    base = footprint_ellipse(h, layout.psi_c, layout.theta_pd)
    out = []
    for pd in layout.pds:
        if pd.vert_angles.elevation == 0.0:
            r = h * math.tan(layout.psi_c)
            out.append(EllipseSpec(r, r, (0.0, 0.0)))
        else:
            az = pd.vert_angles.azimuth
            cx = base.center[0] * math.cos(az)
            cy = base.center[0] * math.sin(az)
            out.append(EllipseSpec(base.a, base.b, (cx, cy), az))
    return out


@dataclass(eq=False)
class CellLayout:
    """Square-cell AP deployment over a rectangular service area.

    ap_positions are horizontal AP coordinates; h is the vertical AP-UE
    distance; in DS mode each AP splits into two sources at +-d_source/2
    along the x-axis (the positive source on +x).
    """

    mode: str
    r_cell: float
    ap_positions: np.ndarray  # (n_ap, 2)
    h: float
    d_source: float = 0.0
    extent: tuple = (0.0, 0.0)

    def __post_init__(self):
        if self.mode not in MODES:
            raise ValueError(f"unknown cell mode {self.mode!r}, expected one of {MODES}")
        if self.r_cell <= 0.0 or self.h <= 0.0:
            raise ValueError("r_cell and h must be positive")
        self.ap_positions = np.atleast_2d(np.asarray(self.ap_positions, dtype=float))
        if self.mode == DS and not 0.0 < self.d_source < self.r_cell * math.sqrt(2.0):
            raise ValueError("DS requires 0 < d_source < r_cell * sqrt(2)")

    @property
    def n_ap(self) -> int:
        return len(self.ap_positions)

    def emitter_xy(self) -> np.ndarray:
        """Horizontal emitter coordinates: APs (SS) or split sources (DS)."""
        if self.mode == SS:
            return self.ap_positions.copy()
        off = np.array([self.d_source / 2.0, 0.0])
        return np.vstack([self.ap_positions + off, self.ap_positions - off])


def square_cell_grid(
    extent_x: float,
    extent_y: float,
    r_cell: float,
    mode: str = SS,
    d_source: float = 0.0,
    h: float = 2.15,
) -> CellLayout:
    """APs at the centers of an r_cell x r_cell tiling of the service area."""
    nx = max(1, round(extent_x / r_cell))
    ny = max(1, round(extent_y / r_cell))
    xs = (np.arange(nx) + 0.5) * r_cell
    ys = (np.arange(ny) + 0.5) * r_cell
    aps = np.array([(x, y) for y in ys for x in xs])
    return CellLayout(mode, r_cell, aps, h, d_source, (nx * r_cell, ny * r_cell))


def constraint1_min(kind: str, psi_total: float) -> float:
    """No central hole: psi_total/2 (PR) or psi_total/3 (TPR)."""
    if not 0.0 < psi_total < math.pi / 2:
        raise ValueError("psi_total must be in (0, pi/2)")
    if kind == adr.PR:
        return psi_total / 2.0
    if kind == adr.TPR:
        return psi_total / 3.0
    raise ValueError(f"unknown receiver kind {kind!r}")


def dc_min(cell: CellLayout) -> float:
    """Worst-case horizontal distance from a UE to its nearest emitter."""
    if cell.mode == SS:
        return math.sqrt(2.0) / 2.0 * cell.r_cell
    half = cell.r_cell / 2.0
    if cell.d_source <= half:
        return math.hypot(half - cell.d_source / 2.0, half)
    return math.hypot(half, cell.d_source / 2.0)


def omega_c(kind: str, n_pd: int) -> float:
    """Azimuth midpoint between adjacent side PDs: half of the second PD azimuth."""
    n_side = n_pd - 1 if kind == adr.TPR else n_pd
    return math.pi / n_side


def boundary_reach_angle(d_c: float, psi_total: float, omega: float, h: float) -> float:
    """Side-PD elevation F1(d_c) placing the outer boundary point at distance d_c.

    F1 = arctan((sqrt(h^2+d^2) cos(psi_total) - h)
                / (d cos(omega) - sqrt(h^2+d^2) sin(psi_total))).
    """
    if d_c <= 0.0:
        raise ValueError("d_c must be positive")
    if d_c > h * math.tan(psi_total) + 1e-12:
        raise ValueError("cell too large for the total FOV budget")
    hyp = math.hypot(h, d_c)
    f1 = hyp * math.cos(psi_total) - h
    f2 = d_c * math.cos(omega) - hyp * math.sin(psi_total)
    if f2 == 0.0:
        return math.pi / 2.0
    return math.atan(f1 / f2)


def min_fov_at_distance(d_c: float, psi_total: float, omega: float, h: float) -> float:
    """F2(d_c) = psi_total - F1(d_c): the FOV left after tilting to reach d_c."""
    return psi_total - boundary_reach_angle(d_c, psi_total, omega, h)


def critical_distance(psi_total: float, omega: float, h: float) -> float:
    """d_c2, the distance where F1 peaks: h cos(omega) sin(psi) / (cos(psi) + sin(omega))."""
    return h * math.cos(omega) * math.sin(psi_total) / (math.cos(psi_total) + math.sin(omega))


def constraint2_min(cell: CellLayout, kind: str, n_pd: int, psi_total: float) -> float:
    """Outer-boundary constraint: F2 at max(d_c_min clamp, local F1 maximum)."""
    om = omega_c(kind, n_pd)
    d_req = dc_min(cell)
    d_c2 = critical_distance(psi_total, om, cell.h)
    if d_req <= d_c2:
        return min_fov_at_distance(d_c2, psi_total, om, cell.h)
    return min_fov_at_distance(d_req, psi_total, om, cell.h)


@dataclass(frozen=True)
class FovBound:
    """Minimum per-PD FOV and the geometry quantities behind it."""

    psi_c1_min: float
    psi_c2_min: float
    psi_c_min: float
    d_c_min: float
    d_c2: float
    omega_c: float


def fov_lower_bound(cell: CellLayout, kind: str, n_pd: int, psi_total: float) -> FovBound:
    """Minimum per-PD FOV guaranteeing full visibility: max of both constraints."""
    c1 = constraint1_min(kind, psi_total)
    c2 = constraint2_min(cell, kind, n_pd, psi_total)
    om = omega_c(kind, n_pd)
    return FovBound(
        psi_c1_min=c1,
        psi_c2_min=c2,
        psi_c_min=max(c1, c2),
        d_c_min=dc_min(cell),
        d_c2=critical_distance(psi_total, om, cell.h),
        omega_c=om,
    )


def _emitter_directions(cell: CellLayout, positions_xy: np.ndarray) -> np.ndarray:
    """Unit UE-to-emitter directions, shape (n_positions, n_emitters, 3)."""
    em = cell.emitter_xy()
    diff = np.empty((len(positions_xy), len(em), 3))
    diff[:, :, :2] = em[None, :, :] - positions_xy[:, None, :]
    diff[:, :, 2] = cell.h
    return diff / np.linalg.norm(diff, axis=2, keepdims=True)


def visibility(
    ue_pos,
    orientation: Orientation,
    layout: AdrLayout,
    cell: CellLayout,
    psi_c: float | None = None,
):
    """Per-(emitter, PD) visibility factors and the receiver-level indicator.

    An emitter is visible to a PD when the incidence angle is within psi_c;
    the receiver sees the network when any (emitter, PD) pair is visible.
    Returns (V, factors) with factors of shape (n_emitters, n_pd).
    """
    if psi_c is None:
        psi_c = layout.psi_c
    pos = np.asarray(ue_pos, dtype=float)[:2].reshape(1, 2)
    dirs = _emitter_directions(cell, pos)[0]  # (S, 3)
    rot = rotation_matrix(orientation)
    normals = vertical_normals(layout) @ rot.T  # (P, 3)
    cos_psi = dirs @ normals.T  # (S, P)
    factors = (cos_psi >= math.cos(psi_c)).astype(int)
    return int(factors.any()), factors


def _sample_positions(cell: CellLayout, n_samples: int, rng: np.random.Generator) -> np.ndarray:
    return rng.uniform((0.0, 0.0), cell.extent, size=(n_samples, 2))


def _visible_mask(
    dirs: np.ndarray,
    layout: AdrLayout,
    psi_c: float,
    rotations: np.ndarray | None,
) -> np.ndarray:
    """Per-sample any-pair-visible flags for precomputed emitter directions."""
    n_vert = vertical_normals(layout)  # (P, 3)
    if rotations is None:
        cos_psi = np.einsum("usk,pk->usp", dirs, n_vert)
    else:
        normals = np.einsum("uij,pj->upi", rotations, n_vert)
        cos_psi = np.einsum("usk,upk->usp", dirs, normals)
    return cos_psi.max(axis=(1, 2)) >= math.cos(psi_c)


def prob_visibility(
    layout: AdrLayout,
    cell: CellLayout,
    psi_c: float,
    orientation_mode: str = "vertical",
    n_samples: int = 2000,
    seed: int = 0,
    model: OrientationModel | None = None,
) -> float:
    """Monte-Carlo estimate of the probability that some AP is visible."""
    rng = np.random.default_rng(seed)
    positions = _sample_positions(cell, n_samples, rng)
    dirs = _emitter_directions(cell, positions)
    rotations = _orientation_rotations(orientation_mode, n_samples, rng, model)
    return float(np.mean(_visible_mask(dirs, layout, psi_c, rotations)))


def _orientation_rotations(orientation_mode, n_samples, rng, model):
    if orientation_mode == "vertical":
        return None
    if orientation_mode != "random":
        raise ValueError("orientation_mode must be 'vertical' or 'random'")
    thetas, omegas = sample_arrays(model or OrientationModel(), rng, n_samples)
    return np.array([rotation_matrix(Orientation(t, o)) for t, o in zip(thetas, omegas)])


def empirical_min_fov(
    kind: str,
    n_pd: int,
    cell: CellLayout,
    psi_total: float,
    n_samples: int = 5000,
    seed: int = 0,
    orientation_mode: str = "vertical",
    model: OrientationModel | None = None,
    grid_deg: float = 1.0,
) -> float:
    """Smallest grid FOV (degrees) with every sampled position visible.

    theta_pd tracks the budget (psi_total - psi_c) at every grid point, so
    each candidate FOV is tested with its own receiver geometry.  Returns the
    smallest grid value from which visibility stays complete upward.
    """
    rng = np.random.default_rng(seed)
    positions = _sample_positions(cell, n_samples, rng)
    dirs = _emitter_directions(cell, positions)
    rotations = _orientation_rotations(orientation_mode, n_samples, rng, model)

    psi_total_deg = math.degrees(psi_total)
    grid = np.arange(grid_deg, psi_total_deg + 1e-9, grid_deg)
    best = None
    for psi_deg in grid[::-1]:
        psi = math.radians(psi_deg)
        layout = layout_from_total_fov(kind, n_pd, psi_total, psi)
        if _visible_mask(dirs, layout, psi, rotations).all():
            best = psi_deg
        else:
            break
    if best is None:
        raise ValueError("no grid FOV achieves full visibility; enlarge psi_total")
    return float(best)
