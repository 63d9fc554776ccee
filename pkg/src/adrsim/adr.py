"""Angle diversity receiver construction and the PD-area bandwidth model.

Two receiver families are supported:

* ``pr``  — pyramid receiver: n_pd identical side PDs tilted by theta_pd,
  azimuths uniformly spread over the circle.
* ``tpr`` — truncated pyramid receiver: n_pd - 1 side PDs plus one
  vertical central PD (the last index).

Per-PD area is total_area / n_pd so that receivers with different PD counts
are compared at equal total collection area.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .geometry import Orientation, PdAngles, direction_from_angles, rotate_direction

PR = "pr"
TPR = "tpr"
KINDS = (PR, TPR)

# vacuum permittivity F/m, silicon relative permittivity, hole velocity m/s
DEFAULT_EPS0 = 8.854e-12
DEFAULT_EPS_R = 11.68
DEFAULT_V_P = 4.8e4


@dataclass(eq=False)
class PdSpec:
    """One photodiode: horizontal offset from the UE and its resting angles."""

    index: int
    offset: np.ndarray
    vert_angles: PdAngles


@dataclass(eq=False)
class AdrLayout:
    """Receiver geometry: PD ring plus (for TPR) a vertical central PD."""

    kind: str
    n_pd: int
    psi_c: float
    theta_pd: float
    ring_radius: float
    total_area: float
    pds: list[PdSpec] = field(default_factory=list)

    @property
    def area_pd(self) -> float:
        return self.total_area / self.n_pd

    @property
    def n_side(self) -> int:
        return self.n_pd - 1 if self.kind == TPR else self.n_pd


def build_layout(
    kind: str,
    n_pd: int,
    psi_c: float,
    theta_pd: float,
    ring_radius: float = 0.01,
    total_area: float = 1e-4,
) -> AdrLayout:
    """Construct PD offsets and resting angles for a PR or TPR receiver."""
    if kind not in KINDS:
        raise ValueError(f"unknown receiver kind {kind!r}, expected one of {KINDS}")
    if kind == PR and n_pd < 3:
        raise ValueError("PR requires at least 3 PDs")
    if kind == TPR and n_pd < 4:
        raise ValueError("TPR requires at least 4 PDs (3 side PDs + central)")
    if psi_c <= 0.0:
        raise ValueError("psi_c must be positive")
    if not 0.0 <= theta_pd < math.pi / 2:
        raise ValueError("theta_pd must be in [0, pi/2)")
    if total_area <= 0.0 or ring_radius < 0.0:
        raise ValueError("total_area must be positive and ring_radius nonnegative")

    layout = AdrLayout(kind, n_pd, psi_c, theta_pd, ring_radius, total_area)
    n_side = layout.n_side
    for p in range(n_side):
        az = 2.0 * math.pi * p / n_side
        offset = ring_radius * np.array([math.cos(az), math.sin(az), 0.0])
        layout.pds.append(PdSpec(p + 1, offset, PdAngles(theta_pd, az)))
    if kind == TPR:
        layout.pds.append(PdSpec(n_pd, np.zeros(3), PdAngles(0.0, 0.0)))
    return layout


def layout_from_total_fov(
    kind: str,
    n_pd: int,
    psi_total: float,
    psi_c: float,
    ring_radius: float = 0.01,
    total_area: float = 1e-4,
) -> AdrLayout:
    """Split a total-FOV budget: theta_pd = psi_total - psi_c."""
    theta_pd = psi_total - psi_c
    if theta_pd < 0.0:
        raise ValueError("psi_c exceeds the total FOV budget")
    return build_layout(kind, n_pd, psi_c, theta_pd, ring_radius, total_area)


def pd_world_poses(
    layout: AdrLayout,
    ue_pos: np.ndarray,
    o: Orientation,
    collocate_pds: bool = True,
):
    """Room-frame (positions, normals) of every PD for a UE pose.

    Offsets are not rotated with the device; with collocate_pds (the default)
    all PDs sit at the UE position, matching the far-field approximation that
    AP-PD distances are equal across the receiver.
    """
    ue_pos = np.asarray(ue_pos, dtype=float)
    positions = np.empty((layout.n_pd, 3))
    normals = np.empty((layout.n_pd, 3))
    for i, pd in enumerate(layout.pds):
        positions[i] = ue_pos if collocate_pds else ue_pos + pd.offset
        normals[i] = rotate_direction(direction_from_angles(pd.vert_angles), o)
    return positions, normals


def vertical_normals(layout: AdrLayout) -> np.ndarray:
    """Resting PD normals (device pointing straight up)."""
    return np.array([direction_from_angles(pd.vert_angles) for pd in layout.pds])


@dataclass(frozen=True)
class BandwidthModel:
    """First-order PD electrical model: RC-limited plus transit-time-limited."""

    r_load: float = 50.0
    eps0: float = DEFAULT_EPS0
    eps_r: float = DEFAULT_EPS_R
    v_p: float = DEFAULT_V_P

    def __post_init__(self):
        for name in ("r_load", "eps0", "eps_r", "v_p"):
            if getattr(self, name) <= 0.0:
                raise ValueError(f"{name} must be positive")


def optimal_thickness(area_pd: float, bw: BandwidthModel) -> float:
    """Depletion thickness balancing the RC and transit-time terms."""
    return math.sqrt(0.886 * math.pi * bw.r_load * bw.eps0 * bw.eps_r * area_pd * bw.v_p)


def receiver_bandwidth(area_pd: float, bw: BandwidthModel, l_p="optimal") -> float:
    """3-dB receiver bandwidth in Hz.

    B_r = 1 / sqrt((2*pi*R*C)^2 + (L_p / (0.443*v_p))^2) with C = eps0*eps_r*A/L_p.
    """
    if area_pd <= 0.0:
        raise ValueError("area_pd must be positive")
    if l_p == "optimal":
        l_p = optimal_thickness(area_pd, bw)
    elif l_p <= 0.0:
        raise ValueError("l_p must be positive")
    c_r = bw.eps0 * bw.eps_r * area_pd / l_p
    rc_term = 2.0 * math.pi * bw.r_load * c_r
    transit_term = l_p / (0.443 * bw.v_p)
    return 1.0 / math.hypot(rc_term, transit_term)


def calibrate_r_load(area_pd: float, target_hz: float, bw: BandwidthModel | None = None) -> BandwidthModel:
    """Fit r_load so that the optimal-thickness bandwidth at area_pd hits target_hz.

    At optimal thickness B^2 = 0.443 * v_p / (4*pi*R*eps0*eps_r*A), so the fit
    is closed-form.
    """
    if bw is None:
        bw = BandwidthModel()
    if area_pd <= 0.0 or target_hz <= 0.0:
        raise ValueError("area_pd and target_hz must be positive")
    r_load = 0.443 * bw.v_p / (4.0 * math.pi * bw.eps0 * bw.eps_r * area_pd * target_hz**2)
    return BandwidthModel(r_load=r_load, eps0=bw.eps0, eps_r=bw.eps_r, v_p=bw.v_p)
