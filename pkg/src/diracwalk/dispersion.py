"""Momentum-space walk operators, eigenphase branches and gap searches.

Plane waves are ``A exp(i(omega t - k.X))`` so a gather from offset ``v``
contributes ``exp(-i k.v)``. Wave-vectors are expressed in the *reference
chart*: the equilateral chart for the three triangular walks (the isosceles
walk's row spacing is stretched from 1/2 to sqrt(3)/2) and the native chart for
the honeycomb walk. In this chart every walk shares the scan window
``[-pi, pi] x [-pi/sqrt(3), pi/sqrt(3)]``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np
from scipy.ndimage import minimum_filter

from .lattice import Family, LatticeSpec, site_grid
from .walks import WalkSpec

PI = math.pi
SQRT3 = math.sqrt(3.0)
KX_MAX = PI
KY_MAX = PI / SQRT3

_CHART_GENERATORS = {
    Family.EQUILATERAL: np.array([[1.0, 0.0], [0.5, SQRT3 / 2]]),
    Family.ISOSCELES: np.array([[1.0, 0.0], [0.5, SQRT3 / 2]]),
    Family.HONEYCOMB: np.array([[1.0, 0.0], [-0.5, SQRT3 / 2]]),
}


class NonUnitaryError(ArithmeticError):
    pass


class GaugeConfiguredError(ValueError):
    pass


@dataclass(frozen=True)
class WaveVector:
    kx: float
    ky: float

    def __iter__(self):
        return iter((self.kx, self.ky))


def chart_offset(family: Family, index_step: tuple[int, int]) -> np.ndarray:
    g = _CHART_GENERATORS[Family(family)]
    return index_step[0] * g[0] + index_step[1] * g[1]


@lru_cache(maxsize=64)
def _momentum_plan(walk: WalkSpec):
    lat = LatticeSpec(walk.family, 2, 2)
    plan = []
    for sub in walk.substeps:
        vl = chart_offset(walk.family, lat.index_step(sub.shift.left_dir))
        vr = chart_offset(walk.family, lat.index_step(sub.shift.right_dir))
        plan.append((sub.pre_matrix(), vl, vr, sub.post_matrix()))
    return tuple(plan), walk.mass_matrix()


def chart_positions(lattice: LatticeSpec) -> tuple[np.ndarray, np.ndarray]:
    """Reference-chart coordinates (epsilon = 1) of every site, for plane-wave phases."""
    a, b = site_grid(lattice)
    g = _CHART_GENERATORS[lattice.family]
    return a * g[0, 0] + b * g[1, 0], a * g[0, 1] + b * g[1, 1]


def physical_to_chart(family: Family, kx, ky):
    """Convert a physical wave-vector (epsilon = 1) into reference-chart components."""
    if Family(family) is Family.ISOSCELES:
        return kx, np.asarray(ky) / SQRT3
    return kx, ky


def commensurate_wavevector(lattice: LatticeSpec, p: int, q: int) -> WaveVector:
    """Chart wave-vector whose plane wave is single valued on the periodic cell."""
    return WaveVector(2 * PI * p / lattice.n_x, 4 * PI * q / (SQRT3 * lattice.n_y))


def walk_matrix(walk: WalkSpec, kx, ky, gauge=None) -> np.ndarray:
    """``W(k)`` for scalar or array ``kx, ky``; shape ``broadcast(kx, ky) + (2, 2)``."""
    if gauge is not None:
        raise GaugeConfiguredError("momentum-space operator is defined for free walks only")
    kx, ky = np.broadcast_arrays(np.asarray(kx, dtype=float), np.asarray(ky, dtype=float))
    plan, mass = _momentum_plan(walk)
    m = np.broadcast_to(np.eye(2, dtype=np.complex128), kx.shape + (2, 2)).copy()
    for pre, vl, vr, post in plan:
        m = pre @ m
        m[..., 0, :] *= np.exp(-1j * (kx * vl[0] + ky * vl[1]))[..., None]
        m[..., 1, :] *= np.exp(-1j * (kx * vr[0] + ky * vr[1]))[..., None]
        m = post @ m
    return mass @ m


def eigenphase(w: np.ndarray) -> np.ndarray:
    """Non-negative eigenphase ``omega`` in ``[0, pi]`` of unit-determinant 2x2 unitaries.

    Uses ``atan2(sin, cos)`` with ``sin^2 = det(W - cos I)``, which equals
    ``arccos(Re tr W / 2)`` but keeps full precision near 0 and pi.
    """
    c = 0.5 * (w[..., 0, 0] + w[..., 1, 1]).real
    s2 = ((w[..., 0, 0] - c) * (w[..., 1, 1] - c) - w[..., 0, 1] * w[..., 1, 0]).real
    return np.arctan2(np.sqrt(np.maximum(s2, 0.0)), c)


def dispersion_at(walk: WalkSpec, kx, ky, tol: float = 1e-10):
    """Return ``(omega_plus, omega_minus)`` with ``omega_minus = -omega_plus``."""
    w = walk_matrix(walk, kx, ky)
    tr = w[..., 0, 0] + w[..., 1, 1]
    det = w[..., 0, 0] * w[..., 1, 1] - w[..., 0, 1] * w[..., 1, 0]
    ok = (np.abs(tr.imag) < tol) & (np.abs(det - 1) < tol)
    omega = eigenphase(w)
    if not np.all(ok):
        bad = ~np.asarray(ok)
        omega = np.array(omega, copy=True, ndmin=1)
        phases = np.angle(np.linalg.eigvals(w.reshape(-1, 2, 2)[bad.ravel()]))
        phases.sort(axis=-1)
        if np.any(np.abs(phases[:, 0] + phases[:, 1]) > 1e-8):
            raise NonUnitaryError("eigenphases are not a conjugate pair; W(k) is not in SU(2)")
        omega.reshape(-1)[bad.ravel()] = phases[:, 1]
        omega = omega.reshape(np.shape(tr))
    return omega, -omega


def omega(walk: WalkSpec, kx, ky) -> np.ndarray:
    return dispersion_at(walk, kx, ky)[0]


@dataclass
class DispersionResult:
    kx: np.ndarray
    ky: np.ndarray
    omega_plus: np.ndarray
    omega_minus: np.ndarray

    @property
    def resolution(self) -> tuple[int, int]:
        return len(self.kx), len(self.ky)

    def polarization(self, walk: WalkSpec) -> np.ndarray:
        """Eigenvectors of ``W(k)`` on the grid, columns ordered as (plus, minus)."""
        kx, ky = np.meshgrid(self.kx, self.ky)
        vals, vecs = np.linalg.eig(walk_matrix(walk, kx, ky))
        order = np.argsort(-np.angle(vals), axis=-1)
        return np.take_along_axis(vecs, order[..., None, :], axis=-1)

    def to_csv(self, path) -> None:
        from .output import write_dispersion_csv
        write_dispersion_csv(path, self)


def bz_grid(nx: int, ny: int) -> tuple[np.ndarray, np.ndarray]:
    """Half-open uniform axes ``[-kmax, kmax)``; even sizes contain ``k = 0``."""
    return (np.linspace(-KX_MAX, KX_MAX, nx, endpoint=False),
            np.linspace(-KY_MAX, KY_MAX, ny, endpoint=False))


def closed_grid(nx: int, ny: int) -> tuple[np.ndarray, np.ndarray]:
    """Endpoint-inclusive axes over the scan window (symmetric under k -> -k)."""
    return np.linspace(-KX_MAX, KX_MAX, nx), np.linspace(-KY_MAX, KY_MAX, ny)


def scan_bz(walk: WalkSpec, nx: int, ny: int) -> DispersionResult:
    if nx < 8 or ny < 8:
        raise ValueError("grid resolution must be at least 8 x 8")
    kx, ky = bz_grid(nx, ny)
    kxx, kyy = np.meshgrid(kx, ky)
    plus, minus = dispersion_at(walk, kxx, kyy)
    return DispersionResult(kx, ky, plus, minus)


# --------------------------------------------------------------------------- gap search

@dataclass
class GapReport:
    omega_min: float
    minimizers: list[WaveVector]
    degenerate_lines: list[tuple[str, float]] = field(default_factory=list)

    @property
    def gap(self) -> float:
        return 2 * self.omega_min

    @property
    def degenerate_line(self) -> bool:
        return bool(self.degenerate_lines)


_MOVES = np.array([(1, 0), (-1, 0), (0, 1), (0, -1), (1, 1), (1, -1), (-1, 1), (-1, -1)], dtype=float)


def _refine(walk: WalkSpec, kx: np.ndarray, ky: np.ndarray, step: float, tol: float = 1e-8):
    """Derivative-free pattern search (axis and diagonal moves, halving step), run on all
    starting points at once and clamped to the scan window."""
    kx = np.array(kx, dtype=float)
    ky = np.array(ky, dtype=float)
    best = omega(walk, kx, ky)
    steps = np.full(kx.shape, step)
    active = steps >= tol
    while np.any(active):
        cx = np.clip(kx[active, None] + _MOVES[:, 0] * steps[active, None], -KX_MAX, KX_MAX)
        cy = np.clip(ky[active, None] + _MOVES[:, 1] * steps[active, None], -KY_MAX, KY_MAX)
        vals = omega(walk, cx, cy)
        pick = np.argmin(vals, axis=1)
        rows = np.arange(len(pick))
        better = vals[rows, pick] < best[active]
        idx = np.flatnonzero(active)
        moved = idx[better]
        kx[moved] = cx[rows[better], pick[better]]
        ky[moved] = cy[rows[better], pick[better]]
        best[moved] = vals[rows[better], pick[better]]
        steps[idx[~better]] /= 2
        active = steps >= tol
    return kx, ky, best


def _cluster(points, radius):
    out = []
    for p in sorted(points, key=lambda p: p[2]):
        if all(math.hypot(p[0] - q[0], p[1] - q[1]) > radius for q in out):
            out.append(p)
    return out


def min_gap(walk: WalkSpec, n: int = 512, value_tol: float = 1e-7, cluster_radius: float = 1e-4,
            zero_tol: float = 1e-9, line_tol: float = 1e-9) -> GapReport:
    """Minimal eigenphase over the closed scan window and the wave-vectors attaining it.

    A ``(n+1) x (n+1)`` grid (including edges, corners and k = 0) is scanned,
    every grid local minimum close to the global one is refined, refined
    points are clustered, and window edges along which omega is constant at the
    minimum are reported as degenerate lines instead of point lists.
    """
    kx_axis, ky_axis = closed_grid(n + 1, n + 1)
    kxx, kyy = np.meshgrid(kx_axis, ky_axis)
    grid = omega(walk, kxx, kyy)
    gmin = float(grid.min())

    lines = []
    for name, values, fixed in (("kx", grid[:, 0], -KX_MAX), ("kx", grid[:, -1], KX_MAX),
                                ("ky", grid[0, :], -KY_MAX), ("ky", grid[-1, :], KY_MAX)):
        if np.ptp(values) < line_tol and values[0] < gmin + line_tol:
            lines.append((name, fixed))

    local = (grid == minimum_filter(grid, size=3, mode="nearest")) & (grid < gmin + 0.05)
    for axis, fixed in lines:
        if axis == "kx":
            local[:, 0 if fixed < 0 else -1] = False
        else:
            local[0 if fixed < 0 else -1, :] = False
    jj, ii = np.nonzero(local)
    x0, y0, v0 = kx_axis[ii], ky_axis[jj], grid[jj, ii]
    zero = v0 < zero_tol
    rx, ry, rv = _refine(walk, x0[~zero], y0[~zero], 2 * KX_MAX / n)
    refined = list(zip(x0[zero], y0[zero], v0[zero])) + list(zip(rx, ry, rv))
    if not refined:
        return GapReport(gmin, [], lines)
    best = min(min(p[2] for p in refined), gmin)
    keep = [p for p in refined if p[2] <= best + value_tol]
    for axis, fixed in lines:
        idx = 0 if axis == "kx" else 1
        keep = [p for p in keep if abs(p[idx] - fixed) > cluster_radius]
    pts = _cluster(keep, cluster_radius)
    pts.sort(key=lambda p: (round(p[0], 6), round(p[1], 6)))
    return GapReport(float(best), [WaveVector(float(p[0]), float(p[1])) for p in pts], lines)


def cone_slope_check(walk: WalkSpec, radius: float = 0.05, directions: int = 32):
    """Anisotropy ``max |s - mean(s)| / mean(s)`` of ``s = omega/|k|`` on a small ring.

    The ring is taken in physical wave-vector coordinates. Returns
    ``(anisotropy, angles, slopes)``.
    """
    if walk.mass != 0:
        raise ValueError("cone check requires a massless walk")
    if not 0 < radius <= 0.2:
        raise ValueError("radius must lie in (0, 0.2]")
    angles = np.linspace(0.0, 2 * PI, directions, endpoint=False)
    kx, ky = physical_to_chart(walk.family, radius * np.cos(angles), radius * np.sin(angles))
    slopes = omega(walk, kx, ky) / radius
    mean = slopes.mean()
    return float(np.max(np.abs(slopes - mean)) / mean), angles, slopes


def zitter_walk(kind, m: float, epsilon: float = 1.0) -> WalkSpec:
    """Walk used for minimal-frequency tables at mass ``m``.

    The equilateral walks are tabulated with the opposite mass-coin sign
    (coin angle ``-m * dt``); the isosceles walk uses ``+m``. The two signs give
    the same physics up to ``k -> -k`` and a change of rotation handedness.
    """
    from .walks import FAMILY_OF, WalkKind, build_walk
    kind = WalkKind(kind)
    sign = 1.0 if FAMILY_OF[kind] is not Family.EQUILATERAL else -1.0
    return build_walk(kind, mass=sign * m, epsilon=epsilon)
