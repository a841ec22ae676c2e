"""Walk builders and the real-space time stepper.

A walk is an ordered list of sub-steps. Each sub-step applies, in order, a
pointwise rotation, a gather shift (``psi^L`` read from neighbour ``left_dir``,
``psi^R`` from neighbour ``right_dir``), an optional per-site gauge coin, a
fixed coin and the inverse rotation. A mass coin, when present, acts after the
last sub-step.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Callable, Mapping

import numpy as np

from . import kernels
from .coins import IDENTITY, CoinAngles, u2_from_angles
from .lattice import Family, LatticeSpec, SpinorField, neighbor_table, translate_index, wrap_direction

PI = math.pi
SQRT3 = math.sqrt(3.0)


class WalkKind(str, enum.Enum):
    SIX_STEP_EQUILATERAL = "six-step-equilateral"
    THREE_STEP_EQUILATERAL = "three-step-equilateral"
    THREE_STEP_ISOSCELES = "three-step-isosceles"
    THREE_STEP_HONEYCOMB = "three-step-honeycomb"


FAMILY_OF = {
    WalkKind.SIX_STEP_EQUILATERAL: Family.EQUILATERAL,
    WalkKind.THREE_STEP_EQUILATERAL: Family.EQUILATERAL,
    WalkKind.THREE_STEP_ISOSCELES: Family.ISOSCELES,
    WalkKind.THREE_STEP_HONEYCOMB: Family.HONEYCOMB,
}

# Pauli-based gamma matrices of each walk's continuum limit (metadata only).
_S1 = ((0, 1), (1, 0))
_IS2 = ((0, 1), (-1, 0))          # i sigma_2
_MIS2 = ((0, -1), (1, 0))         # -i sigma_2
_IS3 = ((1j, 0), (0, -1j))        # i sigma_3
_MIS3 = ((-1j, 0), (0, 1j))       # -i sigma_3
GAMMAS = {
    WalkKind.SIX_STEP_EQUILATERAL: (_S1, _MIS3, _MIS2),
    WalkKind.THREE_STEP_EQUILATERAL: (_S1, _IS2, _MIS3),
    WalkKind.THREE_STEP_ISOSCELES: (_S1, _IS2, _IS3),
    WalkKind.THREE_STEP_HONEYCOMB: (_S1, _MIS3, _MIS2),
}


class FamilyMismatch(ValueError):
    pass


class UnsupportedGauge(ValueError):
    pass


@dataclass(frozen=True)
class ShiftRule:
    left_dir: int
    right_dir: int


@dataclass(frozen=True)
class SubStep:
    shift: ShiftRule
    pre_rotation: CoinAngles | None = None
    post_rotation: CoinAngles | None = None
    coin: CoinAngles | None = None
    coin_slot: int | None = None

    def pre_matrix(self) -> np.ndarray:
        return IDENTITY if self.pre_rotation is None else u2_from_angles(self.pre_rotation)

    def post_matrix(self) -> np.ndarray:
        """Fixed coin followed by the inverse rotation."""
        m = IDENTITY if self.coin is None else u2_from_angles(self.coin)
        if self.post_rotation is not None:
            m = u2_from_angles(self.post_rotation) @ m
        return m


@dataclass(frozen=True)
class WalkSpec:
    kind: WalkKind
    substeps: tuple[SubStep, ...]
    mass: float
    epsilon: float
    dt: float
    mass_coin: CoinAngles | None = None
    continuum_gammas: tuple = field(default=(), compare=False, repr=False)

    @property
    def family(self) -> Family:
        return FAMILY_OF[self.kind]

    @property
    def supports_gauge(self) -> bool:
        return self.kind is WalkKind.THREE_STEP_EQUILATERAL

    def mass_matrix(self) -> np.ndarray:
        return IDENTITY if self.mass_coin is None else u2_from_angles(self.mass_coin)


def time_step(kind: WalkKind, epsilon: float = 1.0) -> float:
    kind = WalkKind(kind)
    if kind is WalkKind.THREE_STEP_ISOSCELES:
        return epsilon
    if kind is WalkKind.THREE_STEP_HONEYCOMB:
        return 3 * SQRT3 * epsilon / 4
    return 3 * epsilon / 2


def _rot(xi_sign: float, theta: float) -> CoinAngles:
    return CoinAngles(0.0, xi_sign * PI / 2, 0.0, theta)


def build_walk(kind: WalkKind | str, mass: float = 0.0, epsilon: float = 1.0) -> WalkSpec:
    """Build the sub-step sequence of one of the four walks.

    ``mass`` is in inverse length units; the mass coin angle is ``mass * dt``
    (``-pi/4 + mass * epsilon`` inside the first coin for the isosceles walk).
    """
    kind = WalkKind(kind)
    if not epsilon > 0:
        raise ValueError("epsilon must be positive")
    dt = time_step(kind, epsilon)
    mass_coin = CoinAngles(0.0, 0.0, -PI / 2, mass * dt)

    if kind is WalkKind.SIX_STEP_EQUILATERAL:
        subs = []
        for j in range(1, 7):
            theta = PI / 12 + (j - 1) * PI / 6
            subs.append(SubStep(
                shift=ShiftRule(j, wrap_direction(j + 1)),
                pre_rotation=_rot(1, theta),
                post_rotation=_rot(-1, -theta),
                coin=CoinAngles(),
                coin_slot=j,
            ))
    elif kind is WalkKind.THREE_STEP_EQUILATERAL:
        subs = [SubStep(shift=ShiftRule(1, 4), coin_slot=1)]
        for j in (1, 2):
            subs.append(SubStep(
                shift=ShiftRule(j + 1, j + 4),
                pre_rotation=_rot(1, j * PI / 6),
                post_rotation=_rot(-1, -j * PI / 6),
                coin_slot=j + 1,
            ))
    elif kind is WalkKind.THREE_STEP_ISOSCELES:
        subs = []
        for j in (1, 2, 3):
            theta = (j - 2) * PI / 4
            if j == 1:
                theta = -PI / 4 + mass * epsilon
            subs.append(SubStep(shift=ShiftRule(j, j + 3), coin=CoinAngles(0.0, 0.0, -PI / 2, theta)))
        mass_coin = None
    else:
        pairs = ((1, 2), (2, 3), (3, 1))
        subs = []
        for j, (l, r) in enumerate(pairs, start=1):
            theta = PI / 6 + (j - 1) * PI / 3
            subs.append(SubStep(
                shift=ShiftRule(l, r),
                pre_rotation=_rot(1, theta),
                post_rotation=_rot(-1, -theta),
            ))

    return WalkSpec(kind=kind, substeps=tuple(subs), mass=mass, epsilon=epsilon, dt=dt,
                    mass_coin=mass_coin, continuum_gammas=GAMMAS[kind])


# --------------------------------------------------------------------------- stepping

@dataclass(frozen=True)
class _Plan:
    idx_l: tuple
    idx_r: tuple
    pre: tuple
    post: tuple
    slots: tuple


@lru_cache(maxsize=32)
def _plan(walk: WalkSpec, lattice: LatticeSpec) -> _Plan:
    idx_l, idx_r, pre, post, slots = [], [], [], [], []
    last = len(walk.substeps) - 1
    for n, sub in enumerate(walk.substeps):
        idx_l.append(neighbor_table(lattice, sub.shift.left_dir))
        idx_r.append(neighbor_table(lattice, sub.shift.right_dir))
        p = sub.post_matrix()
        if n == last:
            p = walk.mass_matrix() @ p
        pre.append(np.ascontiguousarray(sub.pre_matrix()))
        post.append(np.ascontiguousarray(p))
        slots.append(sub.coin_slot)
    return _Plan(tuple(idx_l), tuple(idx_r), tuple(pre), tuple(post), tuple(slots))


def _check(walk: WalkSpec, field: SpinorField, gauge) -> None:
    if field.lattice.family is not walk.family:
        raise FamilyMismatch(f"{walk.kind.value} walk needs a {walk.family.value} lattice, "
                             f"got {field.lattice.family.value}")
    if gauge is not None and not walk.supports_gauge:
        raise UnsupportedGauge("gauge coins are only implemented for the three-step equilateral walk")


def _gauge_phases(gauge, slot: int, t: float, lattice: LatticeSpec):
    """Per-site phases ``e^{i(alpha+xi)}``, ``e^{i(alpha-xi)}`` or scalars when uniform."""
    alpha, xi, _ = gauge.angles(slot, t, lattice)
    if np.ndim(alpha) == 0 and np.ndim(xi) == 0:
        return complex(np.exp(1j * (alpha + xi))), complex(np.exp(1j * (alpha - xi)))
    alpha = np.broadcast_to(alpha, lattice.shape)
    xi = np.broadcast_to(xi, lattice.shape)
    return (np.ascontiguousarray(np.exp(1j * (alpha + xi))).ravel(),
            np.ascontiguousarray(np.exp(1j * (alpha - xi))).ravel())


def step(walk: WalkSpec, field: SpinorField, t: float = 0.0, gauge=None, backend: str | None = None) -> SpinorField:
    """Return ``W Psi`` for one full time step starting at time ``t``."""
    _check(walk, field, gauge)
    kernel = kernels.get_substep(backend)
    lattice = field.lattice
    plan = _plan(walk, lattice)
    src = field.psi.reshape(2, -1).copy()
    dst = np.empty_like(src)
    for n in range(len(plan.pre)):
        post = plan.post[n]
        ph_l = ph_r = None
        slot = plan.slots[n]
        if gauge is not None and slot is not None:
            ph_l, ph_r = _gauge_phases(gauge, slot, t, lattice)
            if np.ndim(ph_l) == 0:
                post = np.ascontiguousarray(post @ np.diag([ph_l, ph_r]))
                ph_l = ph_r = None
        kernel(src[0], src[1], dst[0], dst[1], plan.idx_l[n], plan.idx_r[n], plan.pre[n], post, ph_l, ph_r)
        src, dst = dst, src
    return SpinorField(lattice, src.reshape((2,) + lattice.shape))


def step_adjoint(walk: WalkSpec, field: SpinorField, t: float = 0.0, gauge=None,
                 backend: str | None = None) -> SpinorField:
    """Apply ``W^dagger`` for the step that started at time ``t`` (sub-steps reversed)."""
    _check(walk, field, gauge)
    kernel = kernels.get_substep(backend)
    lattice = field.lattice
    plan = _plan(walk, lattice)
    src = field.psi.reshape(2, -1).copy()
    dst = np.empty_like(src)
    for n in reversed(range(len(plan.pre))):
        sub = walk.substeps[n]
        inv_l = translate_index(lattice, *(-np.array(lattice.index_step(sub.shift.left_dir))))
        inv_r = translate_index(lattice, *(-np.array(lattice.index_step(sub.shift.right_dir))))
        post = plan.post[n]
        ph_l = ph_r = None
        slot = plan.slots[n]
        if gauge is not None and slot is not None:
            ph_l, ph_r = _gauge_phases(gauge, slot, t, lattice)
            if np.ndim(ph_l) == 0:
                post = post @ np.diag([ph_l, ph_r])
                ph_l = ph_r = None
            else:
                ph_l = np.ascontiguousarray(np.conj(ph_l)[inv_l])
                ph_r = np.ascontiguousarray(np.conj(ph_r)[inv_r])
        kernel(src[0], src[1], dst[0], dst[1], inv_l, inv_r,
               np.ascontiguousarray(np.conj(post.T)), np.ascontiguousarray(np.conj(plan.pre[n].T)), ph_l, ph_r)
        src, dst = dst, src
    return SpinorField(lattice, src.reshape((2,) + lattice.shape))


Observer = Callable[[SpinorField, float], object]


def evolve(walk: WalkSpec, field: SpinorField, steps: int, gauge=None,
           observers: Mapping[str, Observer] | None = None, t0: float = 0.0,
           backend: str | None = None):
    """Apply :func:`step` ``steps`` times, observing before the first step and after each one.

    Returns ``(final_field, records)`` where ``records[name]`` holds ``steps + 1`` values.
    """
    if steps < 0:
        raise ValueError("steps must be non-negative")
    observers = dict(observers or {})
    records = {name: [obs(field, t0)] for name, obs in observers.items()}
    t = t0
    for n in range(steps):
        field = step(walk, field, t, gauge, backend=backend)
        t = t0 + (n + 1) * walk.dt
        for name, obs in observers.items():
            records[name].append(obs(field, t))
    return field, {name: np.asarray(v) for name, v in records.items()}


def norm_observer(field: SpinorField, t: float) -> float:
    return field.norm()
