"""Real-space experiments: initial conditions, projections, Bloch runs and checks."""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
import numpy as np

from .gauge import (ElectricField, FieldConfig, PhaseChange, TabulatedField, TransformedField,
                    UniformElectricField)
from .lattice import LatticeSpec, SiteIndex, SpinorField, column_index, periodic_displacement, positions
from .walks import FAMILY_OF, WalkKind, build_walk, evolve, step


class WrapRiskWarning(UserWarning):
    """A localized packet could reach around the periodic cell within the run."""


class PeriodSeriesTooShort(ValueError):
    pass


# --------------------------------------------------------------------------- configuration


@dataclass(frozen=True)
class InitialCondition:
    """How to build the starting spinor field.

    ``kind`` is ``"localized-symmetric"`` (spinor ``(1, 1)/sqrt2`` on one site),
    ``"localized"`` (custom ``spinor`` on one site) or ``"gaussian"`` (packet of
    width ``width`` centred on ``site`` with carrier wave-vector ``k``).
    ``site=None`` means the centre of the lattice.
    """

    kind: str = "localized-symmetric"
    spinor: tuple[complex, complex] = (1 / math.sqrt(2), 1 / math.sqrt(2))
    site: tuple[int, int] | None = None
    k: tuple[float, float] = (0.0, 0.0)
    width: float = 4.0

    KINDS = ("localized-symmetric", "localized", "gaussian")

    def __post_init__(self):
        if self.kind not in self.KINDS:
            raise ValueError(f"unknown initial condition {self.kind!r}; expected one of {self.KINDS}")
        if self.kind == "gaussian" and not self.width > 0:
            raise ValueError("gaussian width must be positive")

    def origin(self, lattice: LatticeSpec) -> SiteIndex:
        if self.site is None:
            return SiteIndex(lattice.n_x // 2, lattice.n_y // 2)
        return SiteIndex(*self.site)

    def build(self, lattice: LatticeSpec) -> SpinorField:
        site = self.origin(lattice)
        spinor = np.asarray((1, 1) if self.kind == "localized-symmetric" else self.spinor, dtype=complex)
        spinor = spinor / np.linalg.norm(spinor)
        if self.kind != "gaussian":
            return SpinorField.localized(lattice, site, spinor)
        x, y = positions(lattice)
        g = lattice.generators
        x0, y0 = site.a * g[0] + site.b * g[1]
        dx, dy = periodic_displacement(lattice, x, y, (x0, y0))
        env = np.exp(-(dx ** 2 + dy ** 2) / (2 * self.width ** 2) - 1j * (self.k[0] * dx + self.k[1] * dy))
        psi = spinor[:, None, None] * env[None]
        psi /= math.sqrt(np.sum(np.abs(psi) ** 2))
        return SpinorField(lattice, psi)


@dataclass(frozen=True)
class ExperimentConfig:
    kind: WalkKind = WalkKind.THREE_STEP_EQUILATERAL
    mass: float = 0.0
    n_x: int = 1024
    n_y: int = 64
    steps: int = 2000
    initial: InitialCondition = field(default_factory=InitialCondition)
    field: ElectricField | None = None
    field_form: str = "momentum-shift"
    epsilon: float = 1.0
    seed: int = 0

    def __post_init__(self):
        object.__setattr__(self, "kind", WalkKind(self.kind))
        if self.steps < 0:
            raise ValueError("steps must be non-negative")

    @property
    def lattice(self) -> LatticeSpec:
        return LatticeSpec(FAMILY_OF[self.kind], self.n_x, self.n_y, self.epsilon)

    def walk(self):
        return build_walk(self.kind, self.mass, self.epsilon)

    def gauge(self) -> FieldConfig | None:
        if self.field is None:
            return None
        return UniformElectricField(self.field.Ex, self.field.Ey, form=self.field_form,
                                    dt=self.walk().dt)

    def wrap_risk(self) -> bool:
        """True when a packet moving one site per sub-step could wrap halfway."""
        reach = len(self.walk().substeps) * self.steps
        return reach >= min(self.n_x, self.n_y) / 2

    def check(self) -> None:
        if self.wrap_risk():
            warnings.warn(
                f"{len(self.walk().substeps) * self.steps} sub-steps may carry a packet around a "
                f"{self.n_x}x{self.n_y} lattice", WrapRiskWarning, stacklevel=2)


# --------------------------------------------------------------------------- observables


def project_x(field: SpinorField) -> np.ndarray:
    """Density summed over y in half-epsilon columns; column ``c`` sits at ``x = c eps/2``."""
    lat = field.lattice
    return np.bincount(column_index(lat).ravel(), weights=field.density().ravel(),
                       minlength=2 * lat.n_x)


def bin_columns(projection: np.ndarray) -> np.ndarray:
    """Merge pairs of half-epsilon columns into ``n_x`` bins of width epsilon."""
    p = np.asarray(projection)
    return p[..., 0::2] + p[..., 1::2]


@dataclass(frozen=True)
class Moments:
    """Centroid and spread relative to a fixed origin, with periodic wrap."""

    origin: tuple[float, float]

    def __call__(self, field: SpinorField, t: float = 0.0) -> np.ndarray:
        x, y = positions(field.lattice)
        dx, dy = periodic_displacement(field.lattice, x, y, self.origin)
        rho = field.density()
        total = rho.sum()
        cx = float(np.sum(rho * dx) / total)
        cy = float(np.sum(rho * dy) / total)
        sx = math.sqrt(max(float(np.sum(rho * dx ** 2) / total) - cx ** 2, 0.0))
        sy = math.sqrt(max(float(np.sum(rho * dy ** 2) / total) - cy ** 2, 0.0))
        return np.array([cx, cy, sx, sy])


def site_position(lattice: LatticeSpec, site: SiteIndex) -> tuple[float, float]:
    g = lattice.generators
    p = site.a * g[0] + site.b * g[1]
    return float(p[0]), float(p[1])


# --------------------------------------------------------------------------- period estimation


@dataclass(frozen=True)
class PeriodEstimate:
    period: float | None
    peak: float
    lags: np.ndarray = field(repr=False)
    autocorrelation: np.ndarray = field(repr=False)

    @property
    def detected(self) -> bool:
        return self.period is not None


def autocorrelation(series: np.ndarray) -> np.ndarray:
    """Mean-removed autocorrelation of a 1D or ``(n, components)`` series.

    Lag ``L`` averages the ``n - L`` available products; components are pooled,
    so each one contributes in proportion to its variance. Returns ``nan`` when
    the series is constant.
    """
    s = np.asarray(series, dtype=float)
    if s.ndim == 1:
        s = s[:, None]
    scale = float(np.mean(s * s))
    s = s - s.mean(axis=0)
    n = s.shape[0]
    var = np.sum(s * s) / n
    ac = np.empty(n)
    if var == 0.0 or var <= 1e-20 * scale:
        ac[:] = np.nan
        return ac
    for lag in range(n):
        ac[lag] = np.sum(s[: n - lag] * s[lag:]) / (n - lag) / var
    return ac


def estimate_period(series, min_lag: int = 4, threshold: float = 0.5,
                    tie_margin: float = 0.1) -> PeriodEstimate:
    """Period, in samples, of a 1D or multi-component series.

    Candidates are the interior local maxima of :func:`autocorrelation` over
    lags ``[min_lag, n/2]``. The earliest candidate within ``tie_margin`` of
    the highest one wins (so a multiple of the period is not preferred), and
    its position is refined by a parabola through the neighbouring lags. No
    period is reported when the chosen peak is below ``threshold``.
    """
    s = np.asarray(series, dtype=float)
    n = s.shape[0]
    if n < 2 * (min_lag + 2):
        raise PeriodSeriesTooShort(f"need at least {2 * (min_lag + 2)} samples, got {n}")
    ac = autocorrelation(s)
    hi = n // 2
    lags = np.arange(min_lag, hi + 1)
    if np.isnan(ac[0]):
        return PeriodEstimate(None, 0.0, lags, ac[lags])
    cands = [lag for lag in range(min_lag, hi)
             if ac[lag] > ac[lag - 1] and ac[lag] >= ac[lag + 1]]
    if not cands:
        return PeriodEstimate(None, float(np.max(ac[lags])), lags, ac[lags])
    best = max(ac[c] for c in cands)
    lag = next(c for c in cands if ac[c] >= best - tie_margin)
    peak = float(ac[lag])
    if peak < threshold:
        return PeriodEstimate(None, peak, lags, ac[lags])
    y0, y1, y2 = ac[lag - 1], ac[lag], ac[lag + 1]
    denom = y0 - 2 * y1 + y2
    shift = 0.5 * (y0 - y2) / denom if denom < 0 else 0.0
    return PeriodEstimate(float(lag + shift), peak, lags, ac[lags])


# --------------------------------------------------------------------------- runs


@dataclass
class RunResult:
    config: ExperimentConfig
    times: np.ndarray
    projection: np.ndarray          # (steps + 1, 2 n_x), half-epsilon columns
    moments: np.ndarray             # (steps + 1, 4): cx, cy, sx, sy
    norms: np.ndarray
    final: SpinorField = field(repr=False)

    @property
    def centroid(self) -> np.ndarray:
        return self.moments[:, :2]

    @property
    def spread_x(self) -> np.ndarray:
        return self.moments[:, 2]


def run_experiment(config: ExperimentConfig, backend: str | None = None,
                   gauge: FieldConfig | None = None) -> RunResult:
    """Evolve the configured packet, recording projections, moments and norms.

    ``gauge`` replaces the coin fields implied by ``config.field``.
    """
    config.check()
    lattice = config.lattice
    walk = config.walk()
    psi = config.initial.build(lattice)
    origin = site_position(lattice, config.initial.origin(lattice))
    observers = {"projection": lambda f, t: project_x(f), "moments": Moments(origin),
                 "norm": lambda f, t: f.norm()}
    final, rec = evolve(walk, psi, config.steps, gauge=gauge or config.gauge(), observers=observers,
                        backend=backend)
    times = np.arange(config.steps + 1) * walk.dt
    return RunResult(config, times, rec["projection"], rec["moments"], rec["norm"], final)


@dataclass(frozen=True)
class BlochReport:
    period_steps: float | None
    predictions: dict
    relative_error: float | None
    detected: bool
    peak: float = 0.0

    def to_dict(self) -> dict:
        return {"period_steps": self.period_steps, "predictions": dict(self.predictions),
                "relative_error": self.relative_error, "detected": self.detected}


def bloch_predictions(E: ElectricField) -> dict:
    """Candidate periods in steps: ``2pi/E`` and its two ``3/2`` rescalings."""
    mag = E.magnitude
    if mag == 0:
        return {}
    base = 2 * math.pi / mag
    return {"2pi/E": base, "(2/3)2pi/E": 2 * base / 3, "(3/2)2pi/E": 3 * base / 2}


def field_axis(E: ElectricField | None) -> np.ndarray:
    """Unit vector along the field, or the x axis without a field."""
    if E is None or E.magnitude == 0:
        return np.array([1.0, 0.0])
    return np.array([E.Ex, E.Ey]) / E.magnitude


def bloch_report(result: RunResult) -> BlochReport:
    """Period of the centroid component along the field direction."""
    E = result.config.field
    est = estimate_period(result.centroid @ field_axis(E))
    preds = bloch_predictions(E or ElectricField(0.0, 0.0))
    rel = None
    if est.detected and preds:
        rel = min(abs(est.period - p) / p for p in preds.values())
    return BlochReport(est.period, preds, rel, est.detected, est.peak)


def spread_fit(times: np.ndarray, spread: np.ndarray, start_fraction: float = 0.5) -> tuple[float, float]:
    """Least-squares slope and ``R^2`` of ``spread`` against ``times`` over the late part."""
    i0 = int(len(times) * start_fraction)
    t, s = np.asarray(times[i0:], float), np.asarray(spread[i0:], float)
    A = np.vstack([t, np.ones_like(t)]).T
    coef, *_ = np.linalg.lstsq(A, s, rcond=None)
    resid = s - A @ coef
    ss_tot = float(np.sum((s - s.mean()) ** 2))
    r2 = 1.0 - float(np.sum(resid ** 2)) / ss_tot if ss_tot > 0 else 0.0
    return float(coef[0]), r2


# --------------------------------------------------------------------------- gauge check


@dataclass(frozen=True)
class GaugeCheckResult:
    seed: int
    deviation: float
    tolerance: float

    @property
    def passed(self) -> bool:
        return self.deviation < self.tolerance


def gauge_check(seed: int = 0, n: int = 12, steps: int = 10, mass: float | None = None,
                corrupt: bool = False, zero_phase: bool = False,
                tolerance: float = 1e-12, backend: str | None = None) -> GaugeCheckResult:
    """Compare the two sides of a random gauge transformation by double simulation.

    A random field ``psi``, random coin angles and a random phase ``dphi`` on
    the sub-step time grid are drawn from ``seed``. The walk with transformed
    coins applied to ``e^{i dphi(0)} psi`` must equal ``e^{i dphi(t_end)}``
    times the original evolution. ``corrupt`` flips the sign of the first
    ``xi`` correction.
    """
    rng = np.random.default_rng(seed)
    lattice = LatticeSpec("equilateral", n, n if n % 2 == 0 else n + 1)
    if mass is None:
        mass = float(rng.uniform(0, 4 * math.pi / 3))
    walk = build_walk(WalkKind.THREE_STEP_EQUILATERAL, mass)
    base = TabulatedField(rng.uniform(-math.pi, math.pi, size=(steps, 3, 3) + lattice.shape), dt=walk.dt)
    phase = PhaseChange.zero() if zero_phase else PhaseChange.random(rng, lattice, steps, walk.dt)
    shape = (2,) + lattice.shape
    psi = SpinorField(lattice, rng.normal(size=shape) + 1j * rng.normal(size=shape))
    transformed = TransformedField(base, phase, (1,) if corrupt else ())
    original = psi
    primed = SpinorField(lattice, psi.psi * np.exp(1j * phase(0.0, lattice)))
    for n_step in range(steps):
        t = n_step * walk.dt
        original = step(walk, original, t, base, backend=backend)
        primed = step(walk, primed, t, transformed, backend=backend)
    expected = original.psi * np.exp(1j * phase(steps * walk.dt, lattice))
    return GaugeCheckResult(seed, float(np.max(np.abs(primed.psi - expected))), tolerance)
