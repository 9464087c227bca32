"""Landmark-relative geometry.

Bearings between points, the summed-distance function over a landmark set
and its derivatives, geometric medians, k-ellipsoid membership, and the
tracing of isonormal curves (loci where the normalized bearing sum is a
fixed unit vector).

All positions are meters, all arrays are IEEE-754 doubles, and every
function here is pure: no shared mutable state, safe to call from any
number of threads.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

# Two points closer than this are treated as coincident; bearings between
# them are undefined.  Numerically safe at meter scale in double precision.
COINCIDENT_TOL = 1e-9

# Ratio of singular values below which a landmark set counts as collinear.
COLLINEAR_RTOL = 1e-9

# Bearing sums with norm at or below this leave the normalized sum undefined.
SUM_UNDEFINED_TOL = 1e-9


class CoincidentPointsError(ValueError):
    """Bearing requested between points closer than the coincidence threshold."""


class ZeroVectorError(ValueError):
    """Projection matrix requested for the zero vector."""


class AtFocusError(ValueError):
    """Evaluation at (or numerically on top of) a landmark."""


class ConvergenceError(RuntimeError):
    """Root finding did not reach tolerance; message carries the residuals."""


class SingularHessianError(RuntimeError):
    """Hessian is not invertible where curve tracing requires it."""


@dataclass(frozen=True)
class LandmarkSet:
    """An ordered set of k >= 2 distinct fixed points in R^d, d in {2, 3}.

    Parameters
    ----------
    foci : array_like, shape (k, d)
        Landmark positions in meters.  Points must be pairwise distinct
        (minimum separation ``COINCIDENT_TOL``) and all finite.
    """

    foci: np.ndarray

    def __post_init__(self):
        foci = np.array(self.foci, dtype=float)
        if foci.ndim != 2:
            raise ValueError(f"foci must be a (k, d) array, got shape {foci.shape}")
        k, d = foci.shape
        if k < 2:
            raise ValueError(f"need at least 2 landmarks, got {k}")
        if d not in (2, 3):
            raise ValueError(f"dimension must be 2 or 3, got {d}")
        if not np.all(np.isfinite(foci)):
            raise ValueError("landmark coordinates must be finite")
        diffs = foci[:, None, :] - foci[None, :, :]
        dists = np.linalg.norm(diffs, axis=-1)
        np.fill_diagonal(dists, np.inf)
        if dists.min() <= COINCIDENT_TOL:
            raise ValueError(
                f"landmarks must be pairwise distinct (min separation {dists.min():.3e})"
            )
        object.__setattr__(self, "foci", foci)

    @property
    def k(self) -> int:
        return self.foci.shape[0]

    @property
    def d(self) -> int:
        return self.foci.shape[1]

    @property
    def scale(self) -> float:
        """Largest pairwise distance; used to size perturbations and steps."""
        diffs = self.foci[:, None, :] - self.foci[None, :, :]
        return float(np.linalg.norm(diffs, axis=-1).max())

    def is_collinear(self) -> bool:
        """True when all landmarks lie on one line (scale-aware SVD test)."""
        centered = self.foci - self.foci.mean(axis=0)
        s = np.linalg.svd(centered, compute_uv=False)
        return bool(s[1] < COLLINEAR_RTOL * s[0])


@dataclass(frozen=True)
class MedianResult:
    """Geometric median of a landmark set.

    ``kind`` is ``"unique-point"`` with ``point`` set, or ``"segment"``
    (even number of collinear foci) with ``endpoints`` being the two middle
    foci ordered along the line.
    """

    kind: str
    point: np.ndarray | None = None
    endpoints: tuple[np.ndarray, np.ndarray] | None = None

    def representative(self) -> np.ndarray:
        """A single minimizing point: the point itself, or the segment midpoint."""
        if self.kind == "unique-point":
            return self.point
        return 0.5 * (self.endpoints[0] + self.endpoints[1])


@dataclass(frozen=True)
class IsonormalCurve:
    """Sampled isonormal curve: points where the normalized bearing sum is v0.

    ``r`` is strictly increasing; ``points[n]`` satisfies both
    ``theta_dist(points[n]) == r[n]`` and ``v(points[n]) == v0`` within the
    trace tolerance.
    """

    v0: np.ndarray
    r: np.ndarray        # (n,)
    points: np.ndarray   # (n, d)


def bearing(from_point, to_point) -> np.ndarray:
    """Unit vector pointing from ``from_point`` toward ``to_point``.

    Raises ``CoincidentPointsError`` when the points are closer than
    ``COINCIDENT_TOL``.
    """
    a = np.asarray(from_point, dtype=float)
    b = np.asarray(to_point, dtype=float)
    diff = b - a
    dist = float(np.linalg.norm(diff))
    if dist <= COINCIDENT_TOL:
        raise CoincidentPointsError(
            f"points are coincident within {COINCIDENT_TOL:g} m (distance {dist:.3e})"
        )
    return diff / dist


def projection_matrix(v) -> np.ndarray:
    """Orthogonal projector onto the complement of ``v``: I - v v^T / ||v||^2.

    Symmetric, positive semidefinite, eigenvalues {0, 1, ..., 1}, and
    annihilates ``v``.
    """
    v = np.asarray(v, dtype=float)
    n2 = float(v @ v)
    if n2 == 0.0:
        raise ZeroVectorError("projection matrix undefined for the zero vector")
    return np.eye(v.shape[0]) - np.outer(v, v) / n2


def bearings_to_foci(x, P: LandmarkSet) -> tuple[np.ndarray, np.ndarray]:
    """Bearings from ``x`` to every focus and the corresponding distances.

    Returns ``(units, dists)`` with shapes (k, d) and (k,).  Raises
    ``AtFocusError`` if ``x`` sits on a landmark.
    """
    x = np.asarray(x, dtype=float)
    diffs = P.foci - x
    dists = np.linalg.norm(diffs, axis=1)
    if dists.min() <= COINCIDENT_TOL:
        raise AtFocusError(
            f"point coincides with landmark {int(dists.argmin())} "
            f"(distance {dists.min():.3e} m)"
        )
    return diffs / dists[:, None], dists


def theta_dist(x, P: LandmarkSet) -> float:
    """Sum of distances from ``x`` to all landmarks.  Defined everywhere."""
    x = np.asarray(x, dtype=float)
    return float(np.linalg.norm(P.foci - x, axis=1).sum())


def theta_gradient(x, P: LandmarkSet) -> np.ndarray:
    """Gradient of the summed distance: minus the sum of bearings to the foci."""
    units, _ = bearings_to_foci(x, P)
    return -units.sum(axis=0)


def theta_hessian(x, P: LandmarkSet) -> np.ndarray:
    """Hessian of the summed distance: sum of per-focus projectors over distance.

    Positive semidefinite everywhere it is defined; positive definite unless
    all foci and ``x`` lie on a single line.
    """
    units, dists = bearings_to_foci(x, P)
    d = P.d
    H = np.zeros((d, d))
    for u, dist in zip(units, dists):
        H += (np.eye(d) - np.outer(u, u)) / dist
    return H


def kellipsoid_contains(x, P: LandmarkSet, r: float) -> bool:
    """True when the summed distance at ``x`` is at most ``r``."""
    return theta_dist(x, P) <= r


def _focus_pull(P: LandmarkSet, i: int) -> np.ndarray:
    """Sum of bearings from focus i to all other foci."""
    others = np.delete(P.foci, i, axis=0)
    diffs = others - P.foci[i]
    return (diffs / np.linalg.norm(diffs, axis=1)[:, None]).sum(axis=0)


def geometric_median(P: LandmarkSet, step_tol: float = 1e-12,
                     max_iter: int = 10000) -> MedianResult:
    """Minimizer of the summed distance to the landmarks.

    Unique except for an even number of collinear foci, where the whole
    segment between the two middle foci minimizes; that case returns a
    segment result.  The unique case uses Weiszfeld iteration with a
    focus-optimality check, polished by Newton steps so the gradient norm
    at the result is below 1e-8 (unless the median is a focus).
    """
    foci = P.foci
    k = P.k
    scale = P.scale

    if P.is_collinear():
        center = foci.mean(axis=0)
        centered = foci - center
        _, _, vt = np.linalg.svd(centered)
        direction = vt[0]
        order = np.argsort(centered @ direction)
        ordered = foci[order]
        if k % 2 == 0:
            lo, hi = ordered[k // 2 - 1], ordered[k // 2]
            return MedianResult(kind="segment", endpoints=(lo.copy(), hi.copy()))
        return MedianResult(kind="unique-point", point=ordered[k // 2].copy())

    x = foci.mean(axis=0)
    for _ in range(max_iter):
        dists = np.linalg.norm(foci - x, axis=1)
        i_near = int(dists.argmin())
        if dists[i_near] <= COINCIDENT_TOL:
            pull = _focus_pull(P, i_near)
            if np.linalg.norm(pull) <= 1.0:
                # Subgradient condition: the focus itself is the median.
                return MedianResult(kind="unique-point", point=foci[i_near].copy())
            x = foci[i_near] + (1e-6 * scale) * pull / np.linalg.norm(pull)
            continue
        w = 1.0 / dists
        x_new = (foci * w[:, None]).sum(axis=0) / w.sum()
        if np.linalg.norm(x_new - x) < step_tol * (1.0 + scale):
            x = x_new
            break
        x = x_new

    # Newton polish: cheap, and guarantees the 1e-8 gradient invariant on
    # configurations where Weiszfeld's linear rate stalls early.
    for _ in range(50):
        if np.linalg.norm(foci - x, axis=1).min() <= 10 * COINCIDENT_TOL:
            break
        g = theta_gradient(x, P)
        if np.linalg.norm(g) <= 1e-10:
            break
        H = theta_hessian(x, P)
        try:
            step = np.linalg.solve(H, g)
        except np.linalg.LinAlgError:
            break
        if not np.all(np.isfinite(step)):
            break
        x = x - step
    return MedianResult(kind="unique-point", point=x)


def _v_of(x, P: LandmarkSet) -> np.ndarray:
    """Normalized bearing sum; raises if undefined (landmark or vanishing sum)."""
    units, _ = bearings_to_foci(x, P)
    eta = units.sum(axis=0)
    nrm = np.linalg.norm(eta)
    if nrm <= SUM_UNDEFINED_TOL:
        raise ConvergenceError("bearing sum vanished during root finding")
    return eta / nrm


def _curve_residual(x, P: LandmarkSet, v0: np.ndarray, r: float) -> np.ndarray:
    """Residual [theta - r; P(v0) v(x)] whose root is the curve point at level r."""
    v = _v_of(x, P)
    ang = v - v0 * (v0 @ v)       # P(v0) @ v without building the matrix
    return np.concatenate(([theta_dist(x, P) - r], ang))


def _curve_jacobian(x, P: LandmarkSet, v0: np.ndarray) -> np.ndarray:
    units, _ = bearings_to_foci(x, P)
    eta = units.sum(axis=0)
    nrm = np.linalg.norm(eta)
    v = eta / nrm
    H = theta_hessian(x, P)
    # d(v)/dx = -P(v) H / ||eta||  (Jacobian of a normalized vector field)
    Jv = -(H - np.outer(v, v @ H)) / nrm
    Jang = Jv - np.outer(v0, v0 @ Jv)
    return np.vstack([-eta, Jang])


def _newton_refine(x, P: LandmarkSet, v0: np.ndarray, r: float,
                   tol: float = 1e-12, max_iter: int = 30) -> tuple[np.ndarray, float]:
    """Damped Gauss-Newton on the curve residual.  Returns (x, residual_norm)."""
    F = _curve_residual(x, P, v0, r)
    fn = np.linalg.norm(F)
    for _ in range(max_iter):
        if fn <= tol:
            break
        J = _curve_jacobian(x, P, v0)
        dx = np.linalg.lstsq(J, -F, rcond=None)[0]
        alpha = 1.0
        for _ in range(12):
            x_try = x + alpha * dx
            try:
                F_try = _curve_residual(x_try, P, v0, r)
            except (AtFocusError, ConvergenceError):
                alpha *= 0.5
                continue
            fn_try = np.linalg.norm(F_try)
            if fn_try < fn:
                x, F, fn = x_try, F_try, fn_try
                break
            alpha *= 0.5
        else:
            break
    return x, fn


def _check_unit(v0) -> np.ndarray:
    v0 = np.asarray(v0, dtype=float)
    nrm = float(np.linalg.norm(v0))
    if abs(nrm - 1.0) > 1e-9:
        raise ValueError(f"v0 must be a unit vector (norm {nrm:.12g})")
    return v0 / nrm


def gauss_map_inverse(P: LandmarkSet, v0, r: float, tol: float = 1e-8,
                      max_iter: int = 30) -> np.ndarray:
    """The unique point x with summed distance r and normalized bearing sum v0.

    Requires ``r`` above the minimum of the summed distance.  The seed walks
    from the median against ``v0`` (bisecting the ray until the summed
    distance matches r), then damped Gauss-Newton drives the residuals below
    ``tol``.  Raises ``ConvergenceError`` with the residuals on failure.
    """
    v0 = _check_unit(v0)
    if v0.shape[0] != P.d:
        raise ValueError(f"v0 has dimension {v0.shape[0]}, landmarks have {P.d}")
    med = geometric_median(P).representative()
    r_min = theta_dist(med, P)
    if r <= r_min:
        raise ValueError(f"r={r:g} must exceed the minimum summed distance {r_min:g}")

    # Far behind the median (against v0) every bearing points back along v0,
    # so med - c*v0 is both a good angular seed and monotone in summed distance.
    c_hi = max(P.scale, 1.0)
    for _ in range(200):
        if theta_dist(med - c_hi * v0, P) >= r:
            break
        c_hi *= 2.0
    c_lo = 0.0
    for _ in range(80):
        c_mid = 0.5 * (c_lo + c_hi)
        if theta_dist(med - c_mid * v0, P) < r:
            c_lo = c_mid
        else:
            c_hi = c_mid
    x0 = med - 0.5 * (c_lo + c_hi) * v0

    x, fn = _newton_refine(x0, P, v0, r, tol=1e-12, max_iter=max_iter)
    try:
        v = _v_of(x, P)
    except (AtFocusError, ConvergenceError):
        raise ConvergenceError(f"gauss map inversion landed on the undefined set, residual {fn:.3e}")
    v_resid = float(np.linalg.norm(v - v0))
    t_resid = abs(theta_dist(x, P) - r)
    if v_resid > tol or t_resid > tol or (v @ v0) <= 0.0:
        raise ConvergenceError(
            f"gauss map inversion did not converge: |v - v0|={v_resid:.3e}, "
            f"|theta - r|={t_resid:.3e}"
        )
    return x


def _curve_velocity(x, P: LandmarkSet, v0: np.ndarray) -> np.ndarray:
    """d(point)/d(level) along the isonormal curve through x."""
    units, _ = bearings_to_foci(x, P)
    eta = units.sum(axis=0)
    H = theta_hessian(x, P)
    try:
        w = np.linalg.solve(H, v0)
    except np.linalg.LinAlgError as e:
        raise SingularHessianError(f"Hessian singular at {x}") from e
    denom = float(eta @ w)
    if not np.isfinite(denom) or abs(denom) < 1e-14:
        raise SingularHessianError(
            f"curve ODE denominator vanished at {x} (value {denom:.3e})"
        )
    return -w / denom


def trace_isonormal(P: LandmarkSet, v0, r_start: float, r_end: float,
                    step: float, tol: float = 1e-6) -> IsonormalCurve:
    """Trace the isonormal curve for direction v0 from level r_start to r_end.

    Seeds with ``gauss_map_inverse`` at ``r_start``, then integrates the
    curve ODE in the level parameter with fixed-step RK4.  After each step a
    short Newton projection re-satisfies {summed distance = r, bearing sum
    parallel to v0}, which keeps both residuals below ``tol`` over long
    traces.
    """
    v0 = _check_unit(v0)
    if not (r_end > r_start):
        raise ValueError(f"need r_end > r_start, got [{r_start:g}, {r_end:g}]")
    if step <= 0:
        raise ValueError(f"step must be positive, got {step:g}")
    try:
        x = gauss_map_inverse(P, v0, r_start)
    except (ConvergenceError, ValueError) as e:
        raise ConvergenceError(f"failed to seed trace at r={r_start:g}: {e}") from e

    rs = [r_start]
    points = [x]
    r = r_start
    while r < r_end - 1e-12:
        h = min(step, r_end - r)
        k1 = _curve_velocity(x, P, v0)
        k2 = _curve_velocity(x + 0.5 * h * k1, P, v0)
        k3 = _curve_velocity(x + 0.5 * h * k2, P, v0)
        k4 = _curve_velocity(x + h * k3, P, v0)
        x = x + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        r = r + h
        x, fn = _newton_refine(x, P, v0, r, tol=1e-10, max_iter=4)
        if fn > tol:
            raise ConvergenceError(
                f"drift correction failed at r={r:g} (residual {fn:.3e})"
            )
        rs.append(r)
        points.append(x)
    return IsonormalCurve(v0=v0, r=np.asarray(rs), points=np.asarray(points))


def focus_direction_set_contains(P: LandmarkSet, i: int, v0) -> bool:
    """Whether direction v0 is a limiting bearing-sum direction at focus i.

    With s the sum of bearings from focus i to the other foci, membership
    means some positive multiple of v0 lands on the unit sphere centered at
    s, i.e. the quadratic ||t v0 - s||^2 = 1 has a positive root.
    """
    if not (0 <= i < P.k):
        raise IndexError(f"focus index {i} out of range for k={P.k}")
    v0 = _check_unit(v0)
    s = _focus_pull(P, i)
    b = float(v0 @ s)
    disc = b * b - float(s @ s) + 1.0
    if disc < 0.0:
        return False
    root = np.sqrt(disc)
    return bool(max(b + root, b - root) > 0.0)
