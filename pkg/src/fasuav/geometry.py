"""
Line-of-sight channel between the UAV's vertical antenna array and the
active fluid-antenna ports of a ground user.

Conventions
-----------
* Antennas are numbered 1..N from bottom to top, ports 1..M likewise.
  Port selections use these 1-based labels.
* Horizontal coordinates are metres in the ground plane; the UAV flies at
  the fixed height ``uav_height``.
* Channel matrices are ``m0 x N`` complex arrays (rows = ports).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import DegenerateGeometryError, InvalidSelectionError

#: Amplitude gain at 1 m; a power gain of -10 dB.
REFERENCE_GAIN = 10.0 ** -0.5


@dataclass(frozen=True)
class ArrayGeometry:
    n_antennas: int
    antenna_spacing: float
    uav_height: float
    wavelength: float

    def __post_init__(self):
        if int(self.n_antennas) != self.n_antennas or self.n_antennas < 1:
            raise ValueError("n_antennas must be a positive integer")
        for name in ("antenna_spacing", "uav_height", "wavelength"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be positive")


@dataclass(frozen=True)
class PortLayout:
    n_ports: int
    port_spacing: float
    n_active: int

    def __post_init__(self):
        if int(self.n_ports) != self.n_ports or self.n_ports < 1:
            raise ValueError("n_ports must be a positive integer")
        if not self.port_spacing > 0:
            raise ValueError("port_spacing must be positive")
        if int(self.n_active) != self.n_active or not 1 <= self.n_active <= self.n_ports:
            raise ValueError("n_active must satisfy 1 <= n_active <= n_ports")


@dataclass(frozen=True)
class UserSite:
    position: tuple[float, float]
    uncertainty_radius_sq: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "position",
                           (float(self.position[0]), float(self.position[1])))
        if not self.uncertainty_radius_sq >= 0:
            raise ValueError("uncertainty_radius_sq must be >= 0")


def check_selection(layout: PortLayout, sel: Sequence[int]) -> tuple[int, ...]:
    """Validate a port selection against ``layout`` and return it as a tuple."""
    sel = tuple(int(r) for r in sel)
    if len(sel) != layout.n_active:
        raise InvalidSelectionError(
            f"expected {layout.n_active} ports, got {len(sel)}")
    if any(r < 1 or r > layout.n_ports for r in sel):
        raise InvalidSelectionError(f"port index outside 1..{layout.n_ports}: {sel}")
    if any(b <= a for a, b in zip(sel, sel[1:])):
        raise InvalidSelectionError(f"port indices must be strictly increasing: {sel}")
    return sel


def antenna_offsets(geom: ArrayGeometry) -> np.ndarray:
    """Vertical offsets of the N transmit antennas about the array centre."""
    n = np.arange(1, geom.n_antennas + 1)
    return (2 * (n - 1) - geom.n_antennas + 1) / 2 * geom.antenna_spacing


def _port_offsets(layout: PortLayout, idx) -> np.ndarray:
    idx = np.asarray(idx)
    return (2 * (idx - 1) - layout.n_ports + 1) / 2 * layout.port_spacing


def port_offsets(layout: PortLayout, sel: Sequence[int]) -> np.ndarray:
    """Vertical offsets of the selected ports about the FAS centre."""
    sel = check_selection(layout, sel)
    return _port_offsets(layout, sel)


def horizontal_distance(uav_xy, user: UserSite) -> float:
    dx = float(uav_xy[0]) - user.position[0]
    dy = float(uav_xy[1]) - user.position[1]
    return float(np.hypot(dx, dy))


def path_length(uav_xy, user: UserSite, H: float, port_offset: float) -> float:
    """Distance from the array origin to a port."""
    return float(np.sqrt((H - port_offset) ** 2 + horizontal_distance(uav_xy, user) ** 2))


def departure_sine(H_minus_y, L):
    L = np.asarray(L, dtype=float)
    if np.any(L == 0):
        raise DegenerateGeometryError("zero path length")
    out = np.asarray(H_minus_y, dtype=float) / L
    return float(out) if out.ndim == 0 else out


def path_difference(L, antenna_offset, sin_theta):
    """Extra propagation distance of an antenna relative to the array origin.

    Evaluated as ``(y^2 + 2 L y s) / (sqrt(L^2 + y^2 + 2 L y s) + L)``, which
    is algebraically the same as ``sqrt(...) - L`` but keeps full precision
    when ``|y| << L``.
    """
    L = np.asarray(L, dtype=float)
    y = np.asarray(antenna_offset, dtype=float)
    s = np.asarray(sin_theta, dtype=float)
    num = y * y + 2.0 * L * y * s
    radicand = np.maximum(L * L + num, 0.0)
    out = num / (np.sqrt(radicand) + L)
    return float(out) if out.ndim == 0 else out


def channel_gain(h0, geom: ArrayGeometry, uav_xy, user: UserSite,
                 antenna_offset, port_offset):
    dist = np.sqrt((geom.uav_height + np.asarray(antenna_offset) - np.asarray(port_offset)) ** 2
                   + horizontal_distance(uav_xy, user) ** 2)
    if np.any(dist == 0):
        raise DegenerateGeometryError("zero antenna-port distance")
    out = h0 / dist
    return float(out) if np.ndim(out) == 0 else out


def port_rows(geom: ArrayGeometry, layout: PortLayout, uav_xy, user: UserSite,
              h0: float = REFERENCE_GAIN, robust: bool = False) -> np.ndarray:
    """Channel rows for *all* M ports, shape ``(M, N)``.

    With ``robust=True`` the magnitudes are evaluated at the horizontal
    distance inflated by ``sqrt(V)`` (worst case over the uncertainty disc)
    while phases stay at the nominal position.
    """
    H = geom.uav_height
    y_bs = antenna_offsets(geom)[None, :]
    y_port = _port_offsets(layout, np.arange(1, layout.n_ports + 1))[:, None]
    dist = horizontal_distance(uav_xy, user)
    gain_dist = dist + np.sqrt(user.uncertainty_radius_sq) if robust else dist

    L = np.sqrt((H - y_port) ** 2 + dist ** 2)
    if np.any(L == 0):
        raise DegenerateGeometryError("zero path length")
    sin_theta = (H - y_port) / L
    d = path_difference(L, y_bs, sin_theta)

    denom = np.sqrt((H + y_bs - y_port) ** 2 + gain_dist ** 2)
    if np.any(denom == 0):
        raise DegenerateGeometryError("zero antenna-port distance")
    return (h0 / denom) * np.exp(1j * (2.0 * np.pi / geom.wavelength) * d)


def build_channel(geom: ArrayGeometry, layout: PortLayout, sel: Sequence[int],
                  uav_xy, user: UserSite, h0: float = REFERENCE_GAIN) -> np.ndarray:
    """Channel matrix ``G`` (``m0 x N``) for the selected ports."""
    sel = check_selection(layout, sel)
    return port_rows(geom, layout, uav_xy, user, h0)[np.asarray(sel) - 1]


def worst_case_channel(geom: ArrayGeometry, layout: PortLayout, sel: Sequence[int],
                       uav_xy, user: UserSite, h0: float = REFERENCE_GAIN) -> np.ndarray:
    """Conservative channel over the user's location-uncertainty disc.

    Every entry magnitude is a lower bound on the gain for any true user
    position within ``sqrt(V)`` of the nominal one. For ``V = 0`` the result
    equals :func:`build_channel` exactly.
    """
    sel = check_selection(layout, sel)
    return port_rows(geom, layout, uav_xy, user, h0, robust=True)[np.asarray(sel) - 1]
