"""Optical DC channel gains: LOS link plus the wall-reflected diffuse link.

The diffuse gain is solved with a transfer-matrix (radiosity) method: the
room surfaces are split into N_E patches, a room-intrinsic matrix H holds the
patch-to-patch Lambertian gains, G_rho the patch reflectivities, and the
all-orders diffuse gain from one source to a receiver is

    H_diff = r^T G_rho (I - H G_rho)^(-1) t

where t holds source-to-patch gains and r patch-to-receiver gains.  The
matrix convention is row = receiving patch, column = emitting patch, so the
column scaling by G_rho applies a reflectivity at each bounce.  The kernel
G_rho (I - H G_rho)^(-1) t is solved once per source; each receiver query is
then a single dot product, which keeps Monte-Carlo loops cheap.

Patches absorb with their configured reflectivity and re-emit as ideal
diffuse (first-order Lambertian) sources; as receivers they have hemispheric
acceptance and no concentrator.  Only the receiver PD applies the filter gain
and the concentrator gain n_ref^2 / sin^2(psi_c).
"""

from __future__ import annotations

import hashlib
import math
import os
from dataclasses import dataclass, field

import numpy as np

from .geometry import GeometryError

CACHE_FORMAT_VERSION = "adrsim-ops-v1"


@dataclass(frozen=True)
class Room:
    """Rectangular room with per-surface reflectivities."""

    width: float = 8.0
    depth: float = 8.0
    height: float = 3.0
    rho_wall: float = 0.8
    rho_ceiling: float = 0.8
    rho_floor: float = 0.3

    def __post_init__(self):
        if min(self.width, self.depth, self.height) <= 0.0:
            raise ValueError("room dimensions must be positive")
        for name in ("rho_wall", "rho_ceiling", "rho_floor"):
            if not 0.0 <= getattr(self, name) <= 1.0:
                raise ValueError(f"{name} must be in [0, 1]")


@dataclass(eq=False)
class SurfaceMesh:
    """Discretized room surfaces: centers, inward normals, areas, reflectivities."""

    centers: np.ndarray
    normals: np.ndarray
    areas: np.ndarray
    rho: np.ndarray
    patch_size: float

    @property
    def n_elements(self) -> int:
        return len(self.areas)


@dataclass(frozen=True)
class Source:
    """Downlink emitter: Lambertian LED with order m and optical power in W."""

    position: tuple
    normal: tuple = (0.0, 0.0, -1.0)
    lambert_m: float = 1.0
    power: float = 10.0

    def __post_init__(self):
        if self.power <= 0.0:
            raise ValueError("source power must be positive")
        if self.lambert_m <= 0.0:
            raise ValueError("lambert_m must be positive")

    @property
    def pos_array(self) -> np.ndarray:
        return np.asarray(self.position, dtype=float)

    @property
    def normal_array(self) -> np.ndarray:
        return np.asarray(self.normal, dtype=float)


def lambert_order(phi_half: float) -> float:
    """Lambertian order m = -ln(2) / ln(cos(phi_half))."""
    return -math.log(2.0) / math.log(math.cos(phi_half))


@dataclass(frozen=True)
class OpticalRx:
    """Receiving PD: area, FOV psi_c, concentrator index n_ref, filter gain t_s."""

    position: tuple
    normal: tuple
    area: float
    psi_c: float
    n_ref: float = 1.5
    t_s: float = 1.0

    def __post_init__(self):
        if not 0.0 < self.psi_c <= math.pi / 2:
            raise ValueError("psi_c must be in (0, pi/2]")
        if self.area <= 0.0:
            raise ValueError("area must be positive")

    @property
    def concentrator_gain(self) -> float:
        return self.n_ref**2 / math.sin(self.psi_c) ** 2


def _face_grid(origin, u_axis, v_axis, u_len, v_len, patch_size):
    """Patch centers and areas of one rectangular face."""
    nu = max(1, math.ceil(u_len / patch_size))
    nv = max(1, math.ceil(v_len / patch_size))
    du, dv = u_len / nu, v_len / nv
    ui = (np.arange(nu) + 0.5) * du
    vi = (np.arange(nv) + 0.5) * dv
    uu, vv = np.meshgrid(ui, vi, indexing="ij")
    centers = (
        np.asarray(origin, dtype=float)
        + uu.reshape(-1, 1) * np.asarray(u_axis, dtype=float)
        + vv.reshape(-1, 1) * np.asarray(v_axis, dtype=float)
    )
    return centers, np.full(nu * nv, du * dv)


def build_mesh(room: Room, patch_size: float, max_elements: int = 4096) -> SurfaceMesh:
    """Grid all six faces of the room into reflective patches.

    Patch edges are dim/ceil(dim/patch_size) per face so areas sum exactly to
    the interior surface area.
    """
    if not 0.0 < patch_size < min(room.width, room.depth, room.height):
        raise ValueError("patch_size must be positive and smaller than the room")
    w, d, h = room.width, room.depth, room.height
    faces = [
        # origin, u axis, v axis, u len, v len, inward normal, rho
        ((0, 0, 0), (1, 0, 0), (0, 1, 0), w, d, (0, 0, 1), room.rho_floor),
        ((0, 0, h), (1, 0, 0), (0, 1, 0), w, d, (0, 0, -1), room.rho_ceiling),
        ((0, 0, 0), (0, 1, 0), (0, 0, 1), d, h, (1, 0, 0), room.rho_wall),
        ((w, 0, 0), (0, 1, 0), (0, 0, 1), d, h, (-1, 0, 0), room.rho_wall),
        ((0, 0, 0), (1, 0, 0), (0, 0, 1), w, h, (0, 1, 0), room.rho_wall),
        ((0, d, 0), (1, 0, 0), (0, 0, 1), w, h, (0, -1, 0), room.rho_wall),
    ]
    centers, normals, areas, rho = [], [], [], []
    for origin, u_axis, v_axis, u_len, v_len, normal, face_rho in faces:
        c, a = _face_grid(origin, u_axis, v_axis, u_len, v_len, patch_size)
        centers.append(c)
        areas.append(a)
        normals.append(np.tile(np.asarray(normal, dtype=float), (len(a), 1)))
        rho.append(np.full(len(a), face_rho))
    centers = np.vstack(centers)
    n_elements = len(centers)
    if n_elements > max_elements:
        total_area = 2 * (w * d + w * h + d * h)
        suggested = math.sqrt(total_area / max_elements)
        raise ValueError(
            f"mesh too fine: {n_elements} elements exceeds cap {max_elements}; "
            f"try patch_size >= {suggested:.3f} m"
        )
    return SurfaceMesh(centers, np.vstack(normals), np.concatenate(areas), np.concatenate(rho), patch_size)


def _pairwise_gain(
    emit_pos, emit_norm, lambert_m, rx_pos, rx_norm, rx_area, cos_fov, optics_gain,
    allow_coincident=False,
):
    """Lambertian point-to-point gain for broadcast emitter/receiver arrays.

    All position/normal arrays broadcast against each other on the leading
    axes; emitters past their half-space or receivers outside the FOV get 0.
    """
    diff = rx_pos - emit_pos
    dist_sq = np.sum(diff * diff, axis=-1)
    if np.any(dist_sq == 0.0):
        if not allow_coincident:
            raise GeometryError("degenerate link: transmitter and receiver coincide")
        dist_sq = np.where(dist_sq == 0.0, np.inf, dist_sq)
    dist = np.sqrt(dist_sq)
    cos_phi = np.sum(diff * emit_norm, axis=-1) / dist
    cos_psi = -np.sum(diff * rx_norm, axis=-1) / dist
    visible = (cos_phi > 0.0) & (cos_psi >= cos_fov) & (cos_psi > 0.0)
    cos_phi = np.clip(cos_phi, 0.0, None)
    gain = (
        (lambert_m + 1.0)
        / (2.0 * math.pi * dist_sq)
        * rx_area
        * optics_gain
        * cos_phi**lambert_m
        * cos_psi
    )
    return np.where(visible, gain, 0.0)


def los_gain(src: Source, rx: OpticalRx) -> float:
    """Direct-path DC gain from a source to a PD (0 outside FOV/half-space)."""
    gain = _pairwise_gain(
        src.pos_array,
        src.normal_array,
        src.lambert_m,
        np.asarray(rx.position, dtype=float),
        np.asarray(rx.normal, dtype=float),
        rx.area,
        math.cos(rx.psi_c),
        rx.t_s * rx.concentrator_gain,
    )
    return float(gain)


def source_to_elements(src: Source, mesh: SurfaceMesh) -> np.ndarray:
    """Transmitter transfer vector t: source-to-patch gains (hemispheric patches)."""
    return _pairwise_gain(
        src.pos_array,
        src.normal_array,
        src.lambert_m,
        mesh.centers,
        mesh.normals,
        mesh.areas,
        0.0,
        1.0,
    )


def elements_to_rx(mesh: SurfaceMesh, rx: OpticalRx, lambert_m_reflect: float = 1.0) -> np.ndarray:
    """Receiver transfer vector r: patch-to-PD gains with the PD's own optics."""
    return _pairwise_gain(
        mesh.centers,
        mesh.normals,
        lambert_m_reflect,
        np.asarray(rx.position, dtype=float),
        np.asarray(rx.normal, dtype=float),
        rx.area,
        math.cos(rx.psi_c),
        rx.t_s * rx.concentrator_gain,
    )


def element_matrix(mesh: SurfaceMesh, lambert_m_reflect: float = 1.0, block: int = 256) -> np.ndarray:
    """Room-intrinsic matrix H: H[k, i] is the gain from patch i to patch k.

    Assembled in row blocks to bound the peak memory of the pairwise temps.
    """
    n = mesh.n_elements
    gain = np.empty((n, n))
    for lo in range(0, n, block):
        hi = min(lo + block, n)
        gain[lo:hi] = _pairwise_gain(
            mesh.centers[None, :, :],
            mesh.normals[None, :, :],
            lambert_m_reflect,
            mesh.centers[lo:hi, None, :],
            mesh.normals[lo:hi, None, :],
            mesh.areas[lo:hi, None],
            0.0,
            1.0,
            allow_coincident=True,
        )
    np.fill_diagonal(gain, 0.0)
    return gain


@dataclass(eq=False)
class TransferOperators:
    """Cached radiosity operators for one room and a fixed set of sources."""

    mesh: SurfaceMesh
    sources: tuple
    t_by_source: np.ndarray  # (N_E, n_sources)
    h_matrix: np.ndarray  # (N_E, N_E)
    g_rho: np.ndarray  # (N_E,) diagonal of the reflectivity matrix
    kernel_by_source: np.ndarray  # (N_E, n_sources), all reflection orders
    lambert_m_reflect: float = 1.0
    _truncated: dict = field(default_factory=dict, repr=False)

    def kernel_matrix(self, reflections="exact") -> np.ndarray:
        """All-orders kernel, or the partial sum of the first L reflection orders."""
        if reflections == "exact":
            return self.kernel_by_source
        order = int(reflections)
        if order < 0:
            raise ValueError("reflection order must be nonnegative")
        if order not in self._truncated:
            self._truncated[order] = truncated_kernel(
                self.h_matrix, self.g_rho, self.t_by_source, order
            )
        return self._truncated[order]


def truncated_kernel(h_matrix, g_rho, t, order: int) -> np.ndarray:
    """Partial Neumann sum  sum_{l=0}^{order-1} (G_rho H)^l G_rho t."""
    acc = np.zeros_like(t)
    term = g_rho[:, None] * t
    for _ in range(order):
        acc = acc + term
        term = g_rho[:, None] * (h_matrix @ term)
    return acc


def _cache_key(mesh: SurfaceMesh, sources, lambert_m_reflect: float) -> str:
    hasher = hashlib.sha256(CACHE_FORMAT_VERSION.encode())
    for arr in (mesh.centers, mesh.normals, mesh.areas, mesh.rho):
        hasher.update(np.ascontiguousarray(arr).tobytes())
    for src in sources:
        hasher.update(
            np.array([*src.position, *src.normal, src.lambert_m, src.power, lambert_m_reflect]).tobytes()
        )
    return hasher.hexdigest()[:16]


def assemble_operators(
    mesh: SurfaceMesh,
    sources,
    lambert_m_reflect: float = 1.0,
    cache_dir: str | None = None,
) -> TransferOperators:
    """Build t/H/G_rho and pre-solve the diffuse kernel for every source.

    The kernel is obtained from a dense linear solve of (I - H G_rho), never
    an explicit inverse.  With cache_dir set, operators are loaded from /
    saved to a versioned binary cache keyed by the mesh and source geometry.
    """
    sources = tuple(sources)
    key = _cache_key(mesh, sources, lambert_m_reflect)
    if cache_dir is not None:
        cached = _load_cached(os.path.join(cache_dir, f"{CACHE_FORMAT_VERSION}-{key}.npz"), key)
        if cached is not None:
            return TransferOperators(mesh, sources, *cached, lambert_m_reflect)

    t = np.column_stack([source_to_elements(src, mesh) for src in sources])
    h_matrix = element_matrix(mesh, lambert_m_reflect)
    g_rho = mesh.rho.copy()

    # ||H G_rho||_1 < 1 guarantees the reflected energy decays; a closed room
    # has patch power-collection fractions <= 1, so this only trips on
    # non-physical meshes.
    col_gain = g_rho * h_matrix.sum(axis=0)
    if col_gain.max() >= 1.0:
        raise ValueError("non-physical mesh (energy gain): reflected power does not decay")
    system = np.eye(mesh.n_elements) - h_matrix * g_rho[None, :]
    try:
        kernel = g_rho[:, None] * np.linalg.solve(system, t)
    except np.linalg.LinAlgError as exc:
        raise ValueError("non-physical mesh (energy gain): singular transfer system") from exc

    ops = TransferOperators(mesh, sources, t, h_matrix, g_rho, kernel, lambert_m_reflect)
    if cache_dir is not None:
        _save_cached(ops, cache_dir, key)
    return ops


def _save_cached(ops: TransferOperators, cache_dir: str, key: str) -> None:
    os.makedirs(cache_dir, exist_ok=True)
    path = os.path.join(cache_dir, f"{CACHE_FORMAT_VERSION}-{key}.npz")
    np.savez_compressed(
        path,
        format_version=np.array(CACHE_FORMAT_VERSION),
        key=np.array(key),
        t_by_source=ops.t_by_source,
        h_matrix=ops.h_matrix,
        g_rho=ops.g_rho,
        kernel_by_source=ops.kernel_by_source,
    )


def _load_cached(path: str, key: str):
    if not os.path.exists(path):
        return None
    with np.load(path, allow_pickle=False) as data:
        if str(data["format_version"]) != CACHE_FORMAT_VERSION or str(data["key"]) != key:
            return None
        return (
            data["t_by_source"],
            data["h_matrix"],
            data["g_rho"],
            data["kernel_by_source"],
        )


def diffuse_gain(ops: TransferOperators, source_id: int, rx: OpticalRx) -> float:
    """All-reflection-orders diffuse DC gain from one source to a PD."""
    r = elements_to_rx(ops.mesh, rx, ops.lambert_m_reflect)
    return float(r @ ops.kernel_by_source[:, source_id])


def diffuse_gain_truncated(ops: TransferOperators, source_id: int, rx: OpticalRx, order: int) -> float:
    """Diffuse gain including reflection orders 1..order only (0 gives 0)."""
    r = elements_to_rx(ops.mesh, rx, ops.lambert_m_reflect)
    return float(r @ ops.kernel_matrix(order)[:, source_id])


def total_gain(ops: TransferOperators, source_id: int, rx: OpticalRx, reflections="exact") -> float:
    """LOS plus diffuse DC gain."""
    if reflections == "exact":
        diff = diffuse_gain(ops, source_id, rx)
    else:
        diff = diffuse_gain_truncated(ops, source_id, rx, int(reflections))
    return los_gain(ops.sources[source_id], rx) + diff


def ds_delta_gain(ops: TransferOperators, pos_id: int, neg_id: int, rx: OpticalRx, reflections="exact") -> float:
    """Signed gain difference H_pos - H_neg of a double-source AP at one PD."""
    return total_gain(ops, pos_id, rx, reflections) - total_gain(ops, neg_id, rx, reflections)


def batch_total_gains(
    ops: TransferOperators,
    positions: np.ndarray,
    normals: np.ndarray,
    area: float,
    psi_c: float,
    n_ref: float = 1.5,
    t_s: float = 1.0,
    reflections="exact",
) -> np.ndarray:
    """Total (LOS + diffuse) gains for a batch of PD poses, shape (Q, n_sources).

    This is the Monte-Carlo fast path: one receiver-vector build per pose and
    a dot product against the pre-solved kernels.
    """
    positions = np.atleast_2d(np.asarray(positions, dtype=float))
    normals = np.atleast_2d(np.asarray(normals, dtype=float))
    optics = t_s * n_ref**2 / math.sin(psi_c) ** 2
    cos_fov = math.cos(psi_c)

    r = _pairwise_gain(
        ops.mesh.centers[None, :, :],
        ops.mesh.normals[None, :, :],
        ops.lambert_m_reflect,
        positions[:, None, :],
        normals[:, None, :],
        area,
        cos_fov,
        optics,
    )  # (Q, N_E)
    gains = r @ ops.kernel_matrix(reflections)  # (Q, S)

    src_pos = np.array([s.position for s in ops.sources], dtype=float)
    src_norm = np.array([s.normal for s in ops.sources], dtype=float)
    src_m = np.array([s.lambert_m for s in ops.sources])
    gains += _pairwise_gain(
        src_pos[None, :, :],
        src_norm[None, :, :],
        src_m[None, :],
        positions[:, None, :],
        normals[:, None, :],
        area,
        cos_fov,
        optics,
    )
    return gains
