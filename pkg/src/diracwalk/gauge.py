"""Gauge coin fields for the three-step equilateral walk.

Each of the three sub-steps of the three-step equilateral walk carries a coin
``U(alpha_i, xi_i, zeta_i, 0) = diag(e^{i(alpha_i + xi_i)}, e^{i(alpha_i - xi_i)})``
applied right after its shift. A :class:`FieldConfig` supplies these angles for
a step starting at time ``t``; sub-step ``i`` runs from ``t + (i-1) dt/3`` to
``t + i dt/3``.

A local phase change ``Psi -> e^{i dphi} Psi`` is absorbed by shifting the coin
angles (:func:`gauge_transform`), which is what makes the coupling a gauge
field.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Callable

import numpy as np

from .lattice import Family, LatticeSpec, neighbor_table

SQRT3 = math.sqrt(3.0)
DT_EQUILATERAL = 1.5
FORMAT_TAG = "diracwalk-field"
FORMAT_VERSION = 1

# (left, right) source directions of the three sub-step shifts.
SLOT_PAIRS = {1: (1, 4), 2: (2, 5), 3: (3, 6)}

# Unit offsets of the left source neighbour of each sub-step.
_SLOT_OFFSETS = {1: (1.0, 0.0), 2: (0.5, SQRT3 / 2), 3: (-0.5, SQRT3 / 2)}

FORMS = ("momentum-shift", "literal-ramp", "literal-static")


class FieldConfig:
    """Base class for the three per-sub-step angle fields.

    Subclasses implement :meth:`angles`, returning ``(alpha, xi, zeta)`` for
    sub-step ``slot`` of the step starting at ``t``. Each value is a scalar
    (spatially uniform) or an array of shape ``lattice.shape``.
    """

    dt: float = DT_EQUILATERAL

    def substep_time(self, slot: int, t: float) -> float:
        return t + (slot - 1) * self.dt / 3

    def angles(self, slot: int, t: float, lattice: LatticeSpec):
        raise NotImplementedError

    def angle_arrays(self, t: float, lattice: LatticeSpec) -> np.ndarray:
        """All angles at step time ``t`` as an array ``(3 slots, 3 angles, n_y, n_x)``."""
        out = np.empty((3, 3) + lattice.shape)
        for slot in (1, 2, 3):
            for n, v in enumerate(self.angles(slot, t, lattice)):
                out[slot - 1, n] = v
        return out


def _check_slot(slot: int) -> None:
    if slot not in (1, 2, 3):
        raise ValueError(f"gauge slot must be 1, 2 or 3, got {slot}")


@dataclass(frozen=True)
class FreeField(FieldConfig):
    dt: float = DT_EQUILATERAL

    def angles(self, slot, t, lattice):
        _check_slot(slot)
        return 0.0, 0.0, 0.0


@dataclass(frozen=True)
class ElectricField:
    Ex: float
    Ey: float

    @property
    def magnitude(self) -> float:
        return math.hypot(self.Ex, self.Ey)


@dataclass(frozen=True)
class UniformElectricField(FieldConfig):
    """Spatially uniform coins describing a constant electric field.

    The angles ramp linearly with ``tau = t / dt``, the index of the step. With
    ``form="momentum-shift"`` the sub-step ``i`` coin is a Peierls phase
    ``xi_i = tau * (w . v_i)`` with ``w = (-Ex, Ey)`` and ``v_i`` the unit offset
    of the sub-step's left source neighbour; every step then shifts the
    quasi-momentum by ``(Ex, -Ey)``. ``"literal-ramp"`` uses
    ``xi_1 = 0, xi_2 = (-3Ex + sqrt3 Ey)/2, xi_3 = (3Ex + sqrt3 Ey)/2`` times
    ``tau`` and ``"literal-static"`` the same values without the ramp. All
    three share the same continuum potential up to the ramp.
    """

    Ex: float = 0.0
    Ey: float = 0.0
    form: str = "momentum-shift"
    dt: float = DT_EQUILATERAL

    def __post_init__(self):
        if self.form not in FORMS:
            raise ValueError(f"unknown field form {self.form!r}; expected one of {FORMS}")

    def base_xi(self) -> tuple[float, float, float]:
        """Sub-step ``xi`` values per unit of ``tau``."""
        ex, ey = self.Ex, self.Ey
        if self.form == "momentum-shift":
            return tuple(-ex * vx + ey * vy for vx, vy in (_SLOT_OFFSETS[s] for s in (1, 2, 3)))
        return (0.0, (-3 * ex + SQRT3 * ey) / 2, (3 * ex + SQRT3 * ey) / 2)

    def angles(self, slot, t, lattice):
        _check_slot(slot)
        ramp = 1.0 if self.form == "literal-static" else t / self.dt
        return 0.0, ramp * self.base_xi()[slot - 1], 0.0


def uniform_electric_config(E: ElectricField | tuple[float, float], dt: float = DT_EQUILATERAL,
                            form: str = "momentum-shift") -> UniformElectricField:
    if not isinstance(E, ElectricField):
        E = ElectricField(*E)
    return UniformElectricField(float(E.Ex), float(E.Ey), form=form, dt=dt)


@dataclass(frozen=True, eq=False)
class TabulatedField(FieldConfig):
    """Angles stored per step and sub-step.

    ``tables`` has shape ``(steps, 3, 3, n_y, n_x)``: step index, sub-step slot,
    then ``(alpha, xi, zeta)``. Times past the last tabulated step reuse the
    last step's values.
    """

    tables: np.ndarray
    dt: float = DT_EQUILATERAL

    def __post_init__(self):
        tab = np.asarray(self.tables, dtype=float)
        if tab.ndim != 5 or tab.shape[1:3] != (3, 3) or tab.shape[0] < 1:
            raise ValueError("tables must have shape (steps, 3, 3, n_y, n_x)")
        object.__setattr__(self, "tables", tab)

    @property
    def steps(self) -> int:
        return self.tables.shape[0]

    def angles(self, slot, t, lattice):
        _check_slot(slot)
        if self.tables.shape[3:] != lattice.shape:
            raise ValueError(f"table shape {self.tables.shape[3:]} does not match lattice {lattice.shape}")
        n = min(max(int(round(t / self.dt)), 0), self.steps - 1)
        a, x, z = self.tables[n, slot - 1]
        return a, x, z


# --------------------------------------------------------------------------- phase changes


@dataclass(frozen=True, eq=False)
class PhaseChange:
    """Real phase field ``dphi(t, X)`` evaluated on a lattice."""

    func: Callable[[float, LatticeSpec], np.ndarray | float]

    def __call__(self, t: float, lattice: LatticeSpec) -> np.ndarray:
        return np.broadcast_to(np.asarray(self.func(t, lattice), dtype=float), lattice.shape)

    @classmethod
    def zero(cls) -> "PhaseChange":
        return cls(lambda t, lattice: 0.0)

    @classmethod
    def constant(cls, c: float) -> "PhaseChange":
        return cls(lambda t, lattice: float(c))

    @classmethod
    def static(cls, values: np.ndarray) -> "PhaseChange":
        values = np.array(values, dtype=float)
        return cls(lambda t, lattice: values)

    @classmethod
    def tabulated(cls, values: np.ndarray, dt: float = DT_EQUILATERAL) -> "PhaseChange":
        """Values on the sub-step grid: ``values[r]`` is ``dphi`` at ``t = r dt/3``."""
        values = np.array(values, dtype=float)
        last = values.shape[0] - 1

        def f(t, lattice):
            r = int(round(3 * t / dt))
            return values[min(max(r, 0), last)]

        return cls(f)

    @classmethod
    def random(cls, rng: np.random.Generator, lattice: LatticeSpec, steps: int,
               dt: float = DT_EQUILATERAL, scale: float = math.pi) -> "PhaseChange":
        return cls.tabulated(rng.uniform(-scale, scale, size=(3 * steps + 1,) + lattice.shape), dt)

    @classmethod
    def linear(cls, start: np.ndarray, end: np.ndarray, t0: float = 0.0,
               dt: float = DT_EQUILATERAL) -> "PhaseChange":
        """Linear interpolation in time from ``start`` at ``t0`` to ``end`` at ``t0 + dt``."""
        start = np.array(start, dtype=float)
        diff = np.array(end, dtype=float) - start
        return cls(lambda t, lattice: start + (t - t0) / dt * diff)


def _gather(values: np.ndarray, lattice: LatticeSpec, direction: int) -> np.ndarray:
    return values.ravel()[neighbor_table(lattice, direction)].reshape(lattice.shape)


def _half_sum_diff(values: np.ndarray, lattice: LatticeSpec, slot: int):
    left, right = SLOT_PAIRS[slot]
    a = _gather(values, lattice, left)
    b = _gather(values, lattice, right)
    return (a + b) / 2, (a - b) / 2


def _require_equilateral(lattice: LatticeSpec) -> None:
    if lattice.family is not Family.EQUILATERAL:
        raise ValueError("gauge fields live on the equilateral lattice")


@dataclass(frozen=True)
class AngleDelta:
    """Changes of ``alpha_i`` and ``xi_i``, each of shape ``(3, n_y, n_x)``."""

    alpha: np.ndarray
    xi: np.ndarray

    def max_abs_difference(self, other: "AngleDelta") -> float:
        return float(max(np.max(np.abs(self.alpha - other.alpha)), np.max(np.abs(self.xi - other.xi))))


def transform_deltas(phase: PhaseChange, t: float, lattice: LatticeSpec,
                     dt: float = DT_EQUILATERAL) -> AngleDelta:
    """Angle changes absorbing ``phase`` in the step starting at ``t``."""
    _require_equilateral(lattice)
    da = np.empty((3,) + lattice.shape)
    dx = np.empty((3,) + lattice.shape)
    for slot in (1, 2, 3):
        sigma, delta = _half_sum_diff(phase(t + (slot - 1) * dt / 3, lattice), lattice, slot)
        da[slot - 1] = phase(t + slot * dt / 3, lattice) - sigma
        dx[slot - 1] = -delta
    return AngleDelta(da, dx)


@dataclass(frozen=True, eq=False)
class TransformedField(FieldConfig):
    """``base`` with coins shifted to absorb the phase change ``phase``.

    ``corrupt_slots`` flips the sign of the ``xi`` correction in the listed
    slots; it exists only to build negative controls.
    """

    base: FieldConfig
    phase: PhaseChange
    corrupt_slots: tuple[int, ...] = ()

    @property
    def dt(self) -> float:
        return self.base.dt

    def angles(self, slot, t, lattice):
        _check_slot(slot)
        _require_equilateral(lattice)
        alpha, xi, zeta = self.base.angles(slot, t, lattice)
        sigma, delta = _half_sum_diff(self.phase(self.substep_time(slot, t), lattice), lattice, slot)
        sign = 1.0 if slot in self.corrupt_slots else -1.0
        alpha = alpha + self.phase(t + slot * self.dt / 3, lattice) - sigma
        xi = xi + sign * delta
        return alpha, xi, zeta


def gauge_transform(config: FieldConfig, phase: PhaseChange) -> TransformedField:
    """Return the coin fields seen by ``e^{i dphi} Psi``."""
    return TransformedField(config, phase)


def simplified_transform_constant_substeps(phase: PhaseChange, t: float, lattice: LatticeSpec,
                                           dt: float = DT_EQUILATERAL, tol: float = 0.0) -> AngleDelta:
    """Angle changes when ``dphi`` is equal at ``t``, ``t + dt/3`` and ``t + 2dt/3``.

    All ``sigma_i, delta_i`` then come from ``dphi(t)``; only ``alpha_3`` looks
    at ``dphi(t + dt)``.
    """
    _require_equilateral(lattice)
    p0 = phase(t, lattice)
    for r in (1, 2):
        if np.max(np.abs(phase(t + r * dt / 3, lattice) - p0)) > tol:
            raise ValueError("phase change is not constant across the sub-steps of the step")
    p_end = phase(t + dt, lattice)
    da = np.empty((3,) + lattice.shape)
    dx = np.empty((3,) + lattice.shape)
    for slot in (1, 2, 3):
        sigma, delta = _half_sum_diff(p0, lattice, slot)
        da[slot - 1] = (p_end if slot == 3 else p0) - sigma
        dx[slot - 1] = -delta
    return AngleDelta(da, dx)


def simplified_transform_linear_interpolation(start: np.ndarray, end: np.ndarray,
                                              lattice: LatticeSpec) -> AngleDelta:
    """Angle changes when ``dphi`` moves linearly from ``start`` to ``end`` over the step.

    With ``D = end - start``::

        dalpha_i = start + i D/3 - [sum_i(start)/2 + (i-1) sum_i(D)/6]
        dxi_i    = -[diff_i(start)/2 + (i-1) diff_i(D)/6]

    where ``sum_i`` and ``diff_i`` combine the values at the sub-step's two
    source neighbours.
    """
    _require_equilateral(lattice)
    start = np.broadcast_to(np.asarray(start, dtype=float), lattice.shape)
    diff = np.broadcast_to(np.asarray(end, dtype=float), lattice.shape) - start
    da = np.empty((3,) + lattice.shape)
    dx = np.empty((3,) + lattice.shape)
    for slot in (1, 2, 3):
        s0, d0 = _half_sum_diff(start, lattice, slot)
        s1, d1 = _half_sum_diff(diff, lattice, slot)
        da[slot - 1] = start + slot * diff / 3 - (s0 + (slot - 1) * s1 / 3)
        dx[slot - 1] = -(d0 + (slot - 1) * d1 / 3)
    return AngleDelta(da, dx)


# --------------------------------------------------------------------------- continuum limit


@dataclass(frozen=True)
class PotentialTriple:
    A0: np.ndarray | float
    A1: np.ndarray | float
    A2: np.ndarray | float


def potential_from_angles(alpha, xi, epsilon: float = 1.0) -> PotentialTriple:
    """Continuum potential from per-slot angles ``alpha[i], xi[i]`` (``i = 0, 1, 2``).

    Angles are assumed to scale as ``epsilon`` times their reduced values.
    """
    a = [np.asarray(v, dtype=float) / epsilon for v in alpha]
    x = [np.asarray(v, dtype=float) / epsilon for v in xi]
    a0 = 2.0 / 3.0 * (a[0] + a[1] + a[2])
    a1 = -2.0 / 3.0 * (x[0] + (x[1] - x[2]) / 2)
    a2 = -(x[1] + x[2]) / SQRT3
    return PotentialTriple(a0, a1, a2)


def continuum_potential(config: FieldConfig, lattice: LatticeSpec, t: float = 0.0) -> PotentialTriple:
    arr = config.angle_arrays(t, lattice)
    return potential_from_angles(arr[:, 0], arr[:, 1], lattice.epsilon)


# --------------------------------------------------------------------------- serialization


def field_to_dict(config: FieldConfig) -> dict:
    head = {"format": FORMAT_TAG, "version": FORMAT_VERSION}
    if isinstance(config, FreeField):
        return {**head, "type": "uniform_electric", "Ex": 0.0, "Ey": 0.0,
                "form": "momentum-shift", "dt": config.dt}
    if isinstance(config, UniformElectricField):
        return {**head, "type": "uniform_electric", "Ex": config.Ex, "Ey": config.Ey,
                "form": config.form, "dt": config.dt}
    if isinstance(config, TabulatedField):
        return {**head, "type": "tabulated", "dt": config.dt,
                "shape": list(config.tables.shape), "tables": config.tables.tolist()}
    raise TypeError(f"cannot serialize {type(config).__name__}")


def field_from_dict(doc: dict) -> FieldConfig:
    if doc.get("format", FORMAT_TAG) != FORMAT_TAG:
        raise ValueError(f"not a field document: format {doc.get('format')!r}")
    if int(doc.get("version", FORMAT_VERSION)) > FORMAT_VERSION:
        raise ValueError(f"unsupported field format version {doc['version']}")
    kind = doc.get("type")
    dt = float(doc.get("dt", DT_EQUILATERAL))
    if kind == "uniform_electric":
        return UniformElectricField(float(doc.get("Ex", 0.0)), float(doc.get("Ey", 0.0)),
                                    form=doc.get("form", "momentum-shift"), dt=dt)
    if kind == "tabulated":
        tables = np.asarray(doc["tables"], dtype=float)
        if "shape" in doc and list(tables.shape) != list(doc["shape"]):
            raise ValueError("tabulated field does not match its declared shape")
        return TabulatedField(tables, dt=dt)
    raise ValueError(f"unknown field type {kind!r}")


def save_field(config: FieldConfig, path: str | Path) -> None:
    Path(path).write_text(json.dumps(field_to_dict(config), indent=2) + "\n", encoding="utf-8")


def load_field(path: str | Path) -> FieldConfig:
    return field_from_dict(json.loads(Path(path).read_text(encoding="utf-8")))
