"""Navigation vector fields for bearing-only homing.

Builds on the landmark geometry: the normalized bearing sum and its home
value, pairwise-cosine residuals and pair selection, the tangential field
(circulates on k-ellipsoids), the normal field (adjusts distance to the
landmarks), smooth gain blending, and the combined navigation field.  Also
the field-of-view margin used to monitor the pairwise view-angle
constraint.

Scenario data (landmark set, home spec, bump parameters) is immutable
after construction; evaluation is pure and thread-safe.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .geometry import (
    AtFocusError,
    CoincidentPointsError,
    LandmarkSet,
    SUM_UNDEFINED_TOL,
    bearings_to_foci,
    theta_hessian,
)

# Desired bearings closer than this angle (radians) form no usable pair.
PAIR_ANGLE_TOL = 1e-9


class UndefinedFieldError(ValueError):
    """Field evaluation where the normalized bearing sum is undefined."""


class NoEligiblePairError(ValueError):
    """All desired bearings coincide; no pair can gauge distance."""


class HomeSpecError(ValueError):
    """Desired-bearing set is degenerate or infeasible for the given FOV."""


def _unit_rows(a: np.ndarray, what: str) -> np.ndarray:
    # Validate without renormalizing: bearings produced by the evaluator
    # must survive bitwise so residuals vanish identically at home.
    norms = np.linalg.norm(a, axis=1)
    if np.any(np.abs(norms - 1.0) > 1e-9):
        raise HomeSpecError(f"{what} must be unit vectors (norms {norms})")
    return a


def _pair_angle(ci: float) -> float:
    return math.acos(min(1.0, max(-1.0, ci)))


@dataclass(frozen=True)
class HomeSpec:
    """Home location encoded purely by its bearing data.

    Holds the desired bearings (aligned with the landmark order), the
    derived normalized bearing sum ``v_star``, the matrix of desired
    pairwise cosines, and the camera cone angle.  Construction fails when
    the bearing sum vanishes, when the FOV is not in (0, pi), or when some
    desired pairwise view angle already violates the FOV (the home point
    itself would sit inside an obstacle set).
    """

    desired_bearings: np.ndarray          # (k, d), unit rows
    fov_angle: float                      # radians, in (0, pi)
    v_star: np.ndarray = field(init=False)
    desired_cosines: np.ndarray = field(init=False)
    eligible_pairs: np.ndarray = field(init=False)   # (m, 2) int, i < j, lexicographic

    def __post_init__(self):
        bearings = np.array(self.desired_bearings, dtype=float)
        if bearings.ndim != 2 or bearings.shape[0] < 2:
            raise HomeSpecError(f"need a (k>=2, d) bearing array, got {bearings.shape}")
        bearings = _unit_rows(bearings, "desired bearings")
        if not (0.0 < self.fov_angle < math.pi):
            raise HomeSpecError(f"fov_angle must be in (0, pi), got {self.fov_angle}")
        total = bearings.sum(axis=0)
        nrm = np.linalg.norm(total)
        if nrm <= SUM_UNDEFINED_TOL:
            raise HomeSpecError("desired bearings sum to zero; home direction undefined")
        cosines = bearings @ bearings.T
        k = bearings.shape[0]
        pairs = []
        worst = 1.0
        for i in range(k):
            for j in range(i + 1, k):
                worst = min(worst, cosines[i, j])
                if _pair_angle(cosines[i, j]) > PAIR_ANGLE_TOL:
                    pairs.append((i, j))
        if _pair_angle(worst) >= self.fov_angle:
            raise HomeSpecError(
                f"infeasible home: desired pairwise view angle {_pair_angle(worst):.4f} rad "
                f"meets or exceeds fov_angle {self.fov_angle:.4f} rad"
            )
        object.__setattr__(self, "desired_bearings", bearings)
        object.__setattr__(self, "v_star", total / nrm)
        object.__setattr__(self, "desired_cosines", cosines)
        object.__setattr__(self, "eligible_pairs",
                           np.asarray(pairs, dtype=int).reshape(-1, 2))

    @classmethod
    def from_home_position(cls, P: LandmarkSet, home_position,
                           fov_angle: float) -> "HomeSpec":
        """Desired bearings observed from a known home position.

        Uses the same vectorized bearing computation as field evaluation,
        so the cosine residuals vanish identically at the home point.
        """
        home = np.asarray(home_position, dtype=float)
        try:
            bearings, _ = bearings_to_foci(home, P)
        except AtFocusError as exc:
            raise CoincidentPointsError(
                "home position coincides with a landmark"
            ) from exc
        return cls(desired_bearings=bearings, fov_angle=fov_angle)

    @property
    def k(self) -> int:
        return self.desired_bearings.shape[0]

    @property
    def d(self) -> int:
        return self.desired_bearings.shape[1]

    def pair_margin(self) -> float:
        """min over eligible pairs of (desired cosine - cos(fov)); bump budget."""
        if self.eligible_pairs.shape[0] == 0:
            raise NoEligiblePairError("all desired bearings coincide")
        cos_fov = math.cos(self.fov_angle)
        c = self.desired_cosines[self.eligible_pairs[:, 0], self.eligible_pairs[:, 1]]
        return float(c.min() - cos_fov)


@dataclass(frozen=True)
class PairSelection:
    """Selected landmark pair and its cosine residual at the query point."""

    i: int
    j: int
    delta: float


@dataclass(frozen=True)
class BumpParams:
    """Width of the cubic blending ramp, in cosine units."""

    epsilon: float

    def __post_init__(self):
        if not (self.epsilon > 0.0):
            raise ValueError(f"epsilon must be positive, got {self.epsilon}")

    @classmethod
    def default_for(cls, home: HomeSpec) -> "BumpParams":
        """Half the pair margin, clamped to [1e-4, 0.5] while staying valid."""
        margin = home.pair_margin()
        eps = min(max(0.5 * margin, 1e-4), 0.5)
        if eps >= margin:
            eps = 0.5 * margin
        return cls(epsilon=eps)


def validate_epsilon(home: HomeSpec, params: BumpParams) -> None:
    """Raise unless the ramp fits strictly inside the pair margin."""
    margin = home.pair_margin()
    if not (params.epsilon < margin):
        raise ValueError(
            f"epsilon {params.epsilon:g} must be below the pair margin {margin:g}"
        )


@dataclass(frozen=True)
class FieldSample:
    """Everything the combined field knows at one query point.

    ``defined`` is False on the measure-zero set where the normalized
    bearing sum does not exist (landmarks, geometric median); there the
    combined field is the zero vector by convention.  ``pair`` and
    ``fov_margin`` stay populated except on a landmark itself.
    """

    defined: bool
    v: np.ndarray | None
    f_t: np.ndarray
    f_n: np.ndarray
    g_t: float
    g_n: float
    f: np.ndarray
    f_unit: np.ndarray
    pair: PairSelection | None
    fov_margin: float

    @property
    def delta(self) -> float:
        return self.pair.delta if self.pair is not None else math.nan


@dataclass(frozen=True)
class FieldContext:
    """Immutable bundle of scenario data needed to evaluate the field."""

    landmarks: LandmarkSet
    home: HomeSpec
    bump: BumpParams

    def sample(self, x) -> FieldSample:
        return combined_field(x, self.landmarks, self.home, self.bump)


def v_field(x, P: LandmarkSet) -> np.ndarray | None:
    """Normalized bearing sum at ``x``; None where it is undefined.

    Undefined at the landmarks and wherever the bearing sum vanishes
    (the geometric median, including the median segment of an even
    collinear set).
    """
    try:
        units, _ = bearings_to_foci(x, P)
    except AtFocusError:
        return None
    eta = units.sum(axis=0)
    nrm = np.linalg.norm(eta)
    if nrm <= SUM_UNDEFINED_TOL:
        return None
    return eta / nrm


def v_jacobian(x, P: LandmarkSet) -> np.ndarray:
    """Jacobian of the normalized bearing sum: -P(v) H / ||sum of bearings||."""
    units, _ = bearings_to_foci(x, P)
    eta = units.sum(axis=0)
    nrm = np.linalg.norm(eta)
    if nrm <= SUM_UNDEFINED_TOL:
        raise UndefinedFieldError("bearing-sum direction undefined here")
    v = eta / nrm
    H = theta_hessian(x, P)
    return -(H - np.outer(v, v @ H)) / nrm


def _select_pair_from_cosines(cosines: np.ndarray, home: HomeSpec) -> PairSelection:
    pairs = home.eligible_pairs
    if pairs.shape[0] == 0:
        raise NoEligiblePairError("all desired bearings coincide; no eligible pair")
    deltas = cosines[pairs[:, 0], pairs[:, 1]] - \
        home.desired_cosines[pairs[:, 0], pairs[:, 1]]
    best = int(np.argmin(deltas))   # first minimum: lexicographic tie-break
    return PairSelection(i=int(pairs[best, 0]), j=int(pairs[best, 1]),
                         delta=float(deltas[best]))


def select_pair(x, P: LandmarkSet, home: HomeSpec) -> PairSelection:
    """The eligible landmark pair with the most negative cosine residual.

    Re-evaluated pointwise; ties break to the lexicographically first pair
    for determinism.
    """
    units, _ = bearings_to_foci(x, P)
    return _select_pair_from_cosines(units @ units.T, home)


def tangential_field(x, P: LandmarkSet, home: HomeSpec) -> np.ndarray:
    """Field tangent to the k-ellipsoid through ``x``: -P(v) v_star.

    Vanishes exactly where v equals plus or minus v_star.
    """
    v = v_field(x, P)
    if v is None:
        raise UndefinedFieldError("bearing-sum direction undefined here")
    return -(home.v_star - v * (v @ home.v_star))


def normal_field(x, P: LandmarkSet, home: HomeSpec) -> np.ndarray:
    """Field along the bearing-sum direction: sign(delta) v, with sign(0) = 0."""
    units, _ = bearings_to_foci(x, P)
    eta = units.sum(axis=0)
    nrm = np.linalg.norm(eta)
    if nrm <= SUM_UNDEFINED_TOL:
        raise UndefinedFieldError("bearing-sum direction undefined here")
    delta = _select_pair_from_cosines(units @ units.T, home).delta
    if delta == 0.0:
        return np.zeros(P.d)
    return math.copysign(1.0, delta) * (eta / nrm)


def bump(value: float, params: BumpParams) -> float:
    """Cubic ramp: 0 below 0, 1 above epsilon, C1 across both joints."""
    eps = params.epsilon
    if value <= 0.0:
        return 0.0
    if value >= eps:
        return 1.0
    t = value / eps
    return t * t * (3.0 - 2.0 * t)


def bump_derivative(value: float, params: BumpParams) -> float:
    """Derivative of the cubic ramp; zero at and beyond both endpoints."""
    eps = params.epsilon
    if value <= 0.0 or value >= eps:
        return 0.0
    return 6.0 * value * (eps - value) / (eps ** 3)


def gains(x, P: LandmarkSet, home: HomeSpec,
          params: BumpParams) -> tuple[float, float]:
    """Tangential and normal blending gains at ``x``.

    The tangential gain saturates at 1 once the bearing-sum direction is at
    least a right angle from its home value; the normal gain pulls inward
    only when aligned and past the ramp, and pushes outward at full
    strength once the residual is below -epsilon.
    """
    units, _ = bearings_to_foci(x, P)
    eta = units.sum(axis=0)
    nrm = np.linalg.norm(eta)
    if nrm <= SUM_UNDEFINED_TOL:
        raise UndefinedFieldError("bearing-sum direction undefined here")
    v = eta / nrm
    delta = _select_pair_from_cosines(units @ units.T, home).delta
    return _gains_from(v @ home.v_star, delta, params)


def _gains_from(vdotv: float, delta: float, params: BumpParams) -> tuple[float, float]:
    g_t = min(1.0, math.sqrt(max(0.0, 1.0 - vdotv)))
    g_n = max(0.0, vdotv) * bump(delta, params) + bump(-delta, params)
    return g_t, g_n


def fov_margin(x, P: LandmarkSet, fov_angle: float) -> float:
    """Camera cone angle minus the widest current pairwise view angle.

    Positive exactly outside the union of the FOV obstacle sets; zero on
    the boundary for the widest pair.
    """
    units, _ = bearings_to_foci(x, P)
    cosines = units @ units.T
    iu = np.triu_indices(P.k, k=1)
    worst = float(cosines[iu].min())
    return fov_angle - _pair_angle(worst)


def desired_set_residual(x, P: LandmarkSet, home: HomeSpec) -> float:
    """Cosine residual of the selected pair; sign classifies against the
    desired-view-angle set (negative inside, positive outside, zero on it)."""
    v = v_field(x, P)
    if v is None:
        raise UndefinedFieldError("bearing-sum direction undefined here")
    return select_pair(x, P, home).delta


def combined_field(x, P: LandmarkSet, home: HomeSpec,
                   params: BumpParams) -> FieldSample:
    """The blended navigation field and all its ingredients at ``x``.

    Total function: on the undefined set the combined field is the zero
    vector and the sample is flagged, never an exception.
    """
    x = np.asarray(x, dtype=float)
    zero = np.zeros(P.d)
    try:
        units, _ = bearings_to_foci(x, P)
    except AtFocusError:
        return FieldSample(defined=False, v=None, f_t=zero, f_n=zero,
                           g_t=0.0, g_n=0.0, f=zero, f_unit=zero,
                           pair=None, fov_margin=math.nan)

    cosines = units @ units.T
    pair = _select_pair_from_cosines(cosines, home)
    iu = np.triu_indices(P.k, k=1)
    margin = home.fov_angle - _pair_angle(float(cosines[iu].min()))

    eta = units.sum(axis=0)
    nrm = np.linalg.norm(eta)
    if nrm <= SUM_UNDEFINED_TOL:
        return FieldSample(defined=False, v=None, f_t=zero, f_n=zero,
                           g_t=0.0, g_n=0.0, f=zero, f_unit=zero,
                           pair=pair, fov_margin=margin)

    v = eta / nrm
    vdotv = float(v @ home.v_star)
    f_t = -(home.v_star - v * vdotv)
    if pair.delta == 0.0:
        f_n = zero
    else:
        f_n = math.copysign(1.0, pair.delta) * v
    g_t, g_n = _gains_from(vdotv, pair.delta, params)

    ft_norm = np.linalg.norm(f_t)
    f = np.zeros(P.d)
    if ft_norm > 0.0:
        f = f + g_t * (f_t / ft_norm)
    fn_norm = np.linalg.norm(f_n)
    if fn_norm > 0.0:
        f = f + g_n * (f_n / fn_norm)
    f_norm = np.linalg.norm(f)
    f_unit = f / f_norm if f_norm > 0.0 else zero
    return FieldSample(defined=True, v=v, f_t=f_t, f_n=f_n, g_t=g_t, g_n=g_n,
                       f=f, f_unit=f_unit, pair=pair, fov_margin=margin)
