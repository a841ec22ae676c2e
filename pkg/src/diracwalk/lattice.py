"""Lattice geometries, site charts and spinor-field storage.

Every family is indexed by integer coefficients ``(a, b)`` of two generating
vectors ``g1``, ``g2``. The periodic cell is the rectangle spanned by
``n_x * g1`` and the vertical vector ``n_y * g2 + twist * (n_y / 2) * g1``, so a
site that wraps through the top edge keeps its x-coordinate. This makes
projections on the x-axis well defined even after a packet wraps vertically.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

SQRT3 = float(np.sqrt(3.0))


class Family(str, enum.Enum):
    EQUILATERAL = "equilateral"
    ISOSCELES = "isosceles"
    HONEYCOMB = "honeycomb"


# Generators in units of epsilon.
_GENERATORS = {
    Family.EQUILATERAL: ((1.0, 0.0), (0.5, SQRT3 / 2)),
    Family.ISOSCELES: ((1.0, 0.0), (0.5, 0.5)),
    Family.HONEYCOMB: ((1.0, 0.0), (-0.5, SQRT3 / 2)),
}

# Integer (da, db) of each neighbour direction.
_TRIANGULAR_STEPS = {1: (1, 0), 2: (0, 1), 3: (-1, 1), 4: (-1, 0), 5: (0, -1), 6: (1, -1)}
_HONEYCOMB_STEPS = {1: (1, 0), 2: (0, 1), 3: (-1, -1)}

# a-shift applied per wrap through the b edge, in units of n_y / 2.
_TWIST = {Family.EQUILATERAL: -1, Family.ISOSCELES: -1, Family.HONEYCOMB: 1}


class DirectionError(ValueError):
    pass


@dataclass(frozen=True)
class SiteIndex:
    a: int
    b: int


@dataclass(frozen=True)
class LatticeSpec:
    family: Family
    n_x: int
    n_y: int
    epsilon: float = 1.0

    def __post_init__(self):
        object.__setattr__(self, "family", Family(self.family))
        if self.n_x < 2 or self.n_y < 2:
            raise ValueError("n_x and n_y must be at least 2")
        if self.n_y % 2:
            raise ValueError("n_y must be even (the periodic cell is rectangular)")
        if not self.epsilon > 0:
            raise ValueError("epsilon must be positive")

    @property
    def n_sites(self) -> int:
        return self.n_x * self.n_y

    @property
    def shape(self) -> tuple[int, int]:
        """Array shape of a per-site field, b-major: ``(n_y, n_x)``."""
        return (self.n_y, self.n_x)

    @property
    def generators(self) -> np.ndarray:
        return self.epsilon * np.array(_GENERATORS[self.family])

    @property
    def directions(self) -> tuple[int, ...]:
        return (1, 2, 3) if self.family is Family.HONEYCOMB else (1, 2, 3, 4, 5, 6)

    @property
    def period(self) -> tuple[float, float]:
        """Side lengths ``(L_x, L_y)`` of the rectangular periodic cell."""
        return self.n_x * self.epsilon, self.n_y * self.generators[1, 1]

    def index_step(self, j: int) -> tuple[int, int]:
        steps = _HONEYCOMB_STEPS if self.family is Family.HONEYCOMB else _TRIANGULAR_STEPS
        if j not in steps:
            raise DirectionError(f"direction {j} invalid for {self.family.value} lattice")
        return steps[j]

    def offset(self, j: int) -> np.ndarray:
        """Position offset ``X_j - X`` of direction ``j``."""
        da, db = self.index_step(j)
        return da * self.generators[0] + db * self.generators[1]


def wrap_direction(j: int) -> int:
    """Map any integer direction onto 1..6 (so ``N_7 = N_1``)."""
    return (j - 1) % 6 + 1


def normalize(lattice: LatticeSpec, a, b):
    """Reduce integer coordinates into the periodic cell (works on arrays too)."""
    a = np.asarray(a)
    b = np.asarray(b)
    wraps = np.floor_divide(b, lattice.n_y)
    b = b - wraps * lattice.n_y
    a = (a + _TWIST[lattice.family] * wraps * (lattice.n_y // 2)) % lattice.n_x
    return a, b


def neighbor(lattice: LatticeSpec, site: SiteIndex, j: int) -> SiteIndex:
    da, db = lattice.index_step(j)
    a, b = normalize(lattice, site.a + da, site.b + db)
    return SiteIndex(int(a), int(b))


def position(lattice: LatticeSpec, site: SiteIndex) -> tuple[float, float]:
    g = lattice.generators
    p = site.a * g[0] + site.b * g[1]
    return float(p[0]), float(p[1])


def site_grid(lattice: LatticeSpec) -> tuple[np.ndarray, np.ndarray]:
    """Integer ``(a, b)`` arrays of shape ``lattice.shape``."""
    b, a = np.indices(lattice.shape)
    return a, b


def positions(lattice: LatticeSpec) -> tuple[np.ndarray, np.ndarray]:
    a, b = site_grid(lattice)
    g = lattice.generators
    return a * g[0, 0] + b * g[1, 0], a * g[0, 1] + b * g[1, 1]


def column_index(lattice: LatticeSpec) -> np.ndarray:
    """Half-epsilon column of every site, in ``[0, 2 n_x)``."""
    a, b = site_grid(lattice)
    sign = 1 if lattice.generators[1, 0] > 0 else -1
    return (2 * a + sign * b) % (2 * lattice.n_x)


def periodic_displacement(lattice: LatticeSpec, x: np.ndarray, y: np.ndarray,
                          origin: tuple[float, float]) -> tuple[np.ndarray, np.ndarray]:
    """Displacement from ``origin`` wrapped into the half-open cell centred on it."""
    lx, ly = lattice.period
    dx = np.mod(x - origin[0] + lx / 2, lx) - lx / 2
    dy = np.mod(y - origin[1] + ly / 2, ly) - ly / 2
    return dx, dy


@lru_cache(maxsize=64)
def neighbor_table(lattice: LatticeSpec, j: int) -> np.ndarray:
    """Flat index of ``N_j(X)`` for every flat site index ``X`` (b-major)."""
    da, db = lattice.index_step(j)
    a, b = site_grid(lattice)
    na, nb = normalize(lattice, a + da, b + db)
    table = (nb * lattice.n_x + na).ravel().astype(np.int64)
    table.setflags(write=False)
    return table


def translate_index(lattice: LatticeSpec, da: int, db: int) -> np.ndarray:
    """Flat gather table of the translation ``X -> X + da*g1 + db*g2``."""
    a, b = site_grid(lattice)
    na, nb = normalize(lattice, a + da, b + db)
    return (nb * lattice.n_x + na).ravel().astype(np.int64)


@dataclass
class SpinorField:
    """Two complex amplitudes per site; ``psi[0]`` is psi^L, ``psi[1]`` is psi^R."""

    lattice: LatticeSpec
    psi: np.ndarray = field(repr=False)

    def __post_init__(self):
        self.psi = np.ascontiguousarray(self.psi, dtype=np.complex128)
        if self.psi.shape != (2,) + self.lattice.shape:
            raise ValueError(f"psi must have shape {(2,) + self.lattice.shape}, got {self.psi.shape}")

    @classmethod
    def zeros(cls, lattice: LatticeSpec) -> "SpinorField":
        return cls(lattice, np.zeros((2,) + lattice.shape, dtype=np.complex128))

    @classmethod
    def localized(cls, lattice: LatticeSpec, site: SiteIndex, spinor=(1 / np.sqrt(2), 1 / np.sqrt(2))):
        f = cls.zeros(lattice)
        a, b = normalize(lattice, site.a, site.b)
        f.psi[:, int(b), int(a)] = np.asarray(spinor, dtype=np.complex128)
        return f

    @property
    def psi_l(self) -> np.ndarray:
        return self.psi[0]

    @property
    def psi_r(self) -> np.ndarray:
        return self.psi[1]

    def density(self) -> np.ndarray:
        return np.abs(self.psi[0]) ** 2 + np.abs(self.psi[1]) ** 2

    def norm(self) -> float:
        return float(np.sum(self.density()))

    def copy(self) -> "SpinorField":
        return SpinorField(self.lattice, self.psi.copy())
