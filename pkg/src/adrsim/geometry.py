"""3D vector math shared by every module: device rotation and incidence angles.

The device orientation model has two angles: the receiver is tilted by
``theta`` about the y-axis, then spun by ``omega`` about the z-axis, so a
direction n in the device frame maps to R(omega) @ R(theta) @ n in the room
frame.  All angles are radians; degrees appear only at the config boundary.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

Vec3 = np.ndarray

UNIT_Z = np.array([0.0, 0.0, 1.0])


class GeometryError(ValueError):
    """Raised for degenerate geometric inputs (e.g. coincident endpoints)."""


def normalize(v: Vec3) -> Vec3:
    n = np.linalg.norm(v)
    if n == 0.0:
        raise GeometryError("cannot normalize zero vector")
    return np.asarray(v, dtype=float) / n


@dataclass(frozen=True)
class Orientation:
    """Device orientation: elevation theta in [0, pi/2], azimuth omega in [0, 2*pi)."""

    theta: float
    omega: float

    def __post_init__(self):
        if not 0.0 <= self.theta <= math.pi / 2:
            raise ValueError(f"theta must be in [0, pi/2], got {self.theta}")
        if not 0.0 <= self.omega < 2 * math.pi:
            raise ValueError(f"omega must be in [0, 2*pi), got {self.omega}")


@dataclass(frozen=True)
class PdAngles:
    """Photodiode normal direction: elevation in [0, pi], azimuth in [0, 2*pi)."""

    elevation: float
    azimuth: float

    def __post_init__(self):
        if not 0.0 <= self.elevation <= math.pi:
            raise ValueError(f"elevation must be in [0, pi], got {self.elevation}")
        if not 0.0 <= self.azimuth < 2 * math.pi:
            raise ValueError(f"azimuth must be in [0, 2*pi), got {self.azimuth}")


def rotation_matrix(o: Orientation) -> np.ndarray:
    """Room-frame rotation R(omega) @ R(theta) for a device orientation."""
    ct, st = math.cos(o.theta), math.sin(o.theta)
    co, so = math.cos(o.omega), math.sin(o.omega)
    r_theta = np.array([[ct, 0.0, st], [0.0, 1.0, 0.0], [-st, 0.0, ct]])
    r_omega = np.array([[co, -so, 0.0], [so, co, 0.0], [0.0, 0.0, 1.0]])
    return r_omega @ r_theta


def rotate_direction(n_vert: Vec3, o: Orientation) -> Vec3:
    """Rotate a unit direction from the device frame into the room frame."""
    return rotation_matrix(o) @ np.asarray(n_vert, dtype=float)


def direction_from_angles(angles: PdAngles) -> Vec3:
    """Unit normal (sin(el)cos(az), sin(el)sin(az), cos(el))."""
    se = math.sin(angles.elevation)
    return np.array(
        [se * math.cos(angles.azimuth), se * math.sin(angles.azimuth), math.cos(angles.elevation)]
    )


def angles_from_direction(n: Vec3) -> PdAngles:
    """Elevation/azimuth of a unit direction; azimuth 0 by convention at +-z."""
    x, y, z = float(n[0]), float(n[1]), float(n[2])
    elevation = math.acos(min(1.0, max(-1.0, z)))
    if abs(x) < 1e-15 and abs(y) < 1e-15:
        return PdAngles(elevation, 0.0)
    azimuth = math.atan2(y, x) % (2 * math.pi)
    return PdAngles(elevation, azimuth)


def post_rotation_angles(vert: PdAngles, o: Orientation) -> PdAngles:
    """PD elevation/azimuth after the device rotation is applied to its resting normal.

    The azimuth is recovered with a four-quadrant arctangent so that
    direction_from_angles(post_rotation_angles(...)) round-trips exactly.
    """
    return angles_from_direction(rotate_direction(direction_from_angles(vert), o))


def incidence_angle(n_pd: Vec3, p_rx: Vec3, p_tx: Vec3) -> float:
    """Angle between the PD normal and the receiver-to-transmitter direction.

    cos(psi) = n_pd . d / ||d||  with d = p_tx - p_rx; result in [0, pi].
    """
    d = np.asarray(p_tx, dtype=float) - np.asarray(p_rx, dtype=float)
    dist = np.linalg.norm(d)
    if dist == 0.0:
        raise GeometryError("degenerate link: transmitter and receiver coincide")
    c = float(np.dot(np.asarray(n_pd, dtype=float), d) / dist)
    return math.acos(min(1.0, max(-1.0, c)))
