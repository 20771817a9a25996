"""Analytic crossing limit and the interface driving diffusion.

The limiting crossing probability for the rectangle (0, L) x (0, 1) is a
cross-ratio of the four corner images under any conformal map onto the upper
half-plane.  The canonical map is elliptic: with modulus k solving
K(sqrt(1-k^2))/K(k) = 2/L, the corners (a, b, c, d) land on
(-1/k, -1, 1, 1/k) and the cross-ratio collapses to ((1-k)/(1+k))^2.

The interface's driving process, after normalizing the force points to +-1
and a deterministic time change, is the diffusion dW = sqrt(2(1-W^2)) dB on
[-1, 1], absorbed at the endpoints.  Because the absorbed process is a
bounded martingale, it hits +1 with probability (1+x0)/2; the explicit
coordinate change back to physical time is provided for round-trip checks.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.integrate import cumulative_trapezoid
from scipy.special import erfc

ABSORB_EPS = 1e-6
_MAX_DIFFUSION_STEPS = 10_000_000


# -- conformal limit -----------------------------------------------------------


def _agm(a: float, b: float) -> float:
    """Arithmetic-geometric mean; quadratic convergence to the ulp floor."""
    for _ in range(64):
        if abs(a - b) <= 4e-16 * a:
            break
        a, b = 0.5 * (a + b), math.sqrt(a * b)
    return 0.5 * (a + b)


def elliptic_k_complete(k: float) -> float:
    """Complete elliptic integral K(k) by the arithmetic-geometric mean."""
    if not 0.0 <= k < 1.0:
        raise ValueError("modulus must lie in [0, 1)")
    return math.pi / (2.0 * _agm(1.0, math.sqrt((1.0 - k) * (1.0 + k))))


def modulus_for_aspect(L: float) -> float:
    """The unique k in (0, 1) with K(k')/K(k) = 2/L, k' the complement.

    The ratio is evaluated as agm(1, k')/agm(1, k) so that k enters each
    mean exactly once; computing K at sqrt(1-k^2) instead would double-round
    k and spoil the last couple of digits for thin rectangles.
    """
    if not L > 0.0:
        raise ValueError("aspect must be positive")
    target = 2.0 / L

    def ratio(k: float) -> float:
        return _agm(1.0, math.sqrt((1.0 - k) * (1.0 + k))) / _agm(1.0, k)

    lo, hi = 1e-300, math.nextafter(1.0, 0.0)
    # ratio decreases from +inf to ~0 on (0, 1); plain bisection suffices.
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if mid in (lo, hi):
            break
        if ratio(mid) > target:
            lo = mid
        else:
            hi = mid
    k = 0.5 * (lo + hi)
    assert abs(ratio(k) - target) < 1e-12 * max(1.0, target), "modulus residual too large"
    return k


@dataclass(frozen=True)
class ConformalImages:
    """Real-line images of the rectangle corners, in increasing order."""

    ya: float
    yb: float
    yc: float
    yd: float
    k: float


def conformal_images(L: float) -> ConformalImages:
    k = modulus_for_aspect(L)
    return ConformalImages(ya=-1.0 / k, yb=-1.0, yc=1.0, yd=1.0 / k, k=k)


def cross_ratio(ya: float, yb: float, yc: float, yd: float) -> float:
    return ((yb - ya) * (yd - yc)) / ((yc - ya) * (yd - yb))


def crossing_limit(L: float) -> float:
    """Limiting left-right crossing probability for the aspect-L rectangle."""
    images = conformal_images(L)
    return cross_ratio(images.ya, images.yb, images.yc, images.yd)


def sle_hitting_probability(yL: float, yR: float) -> float:
    """Probability that the interface terminates at the right force point.

    With force points yL < 0 < yR this is -yL/(yR - yL), by optional stopping
    of the normalized driving martingale.
    """
    if not (yL < 0.0 < yR):
        raise ValueError("need yL < 0 < yR")
    return -yL / (yR - yL)


# -- driving diffusion -----------------------------------------------------------


@dataclass
class DiffusionPath:
    """One trajectory of the normalized driving diffusion.

    ``w`` holds the path including the initial value on the uniform grid
    ``s = dt * arange(len(w))``; ``absorbed_at`` is +-1.
    """

    x0: float
    dt: float
    w: np.ndarray
    absorbed_at: int
    n_steps: int

    @property
    def s(self) -> np.ndarray:
        return self.dt * np.arange(len(self.w))


def simulate_sle_diffusion(
    x0: float, dt: float, rng_seed, eps_abs: float = ABSORB_EPS
) -> DiffusionPath:
    """Euler scheme for dW = sqrt(2(1-W^2)) dB with absorption at +-1.

    Each increment is clamped into [-1, 1]; the path absorbs when it comes
    within ``eps_abs`` of an endpoint and snaps to that endpoint.
    """
    if not dt <= 1e-3:
        raise ValueError("step size must satisfy dt <= 1e-3")
    if not -1.0 < x0 < 1.0:
        raise ValueError("start point must lie in (-1, 1)")
    rng = np.random.default_rng(rng_seed)
    w = float(x0)
    path = [w]
    sqdt = math.sqrt(dt)
    steps = 0
    while abs(w) < 1.0 - eps_abs:
        w += math.sqrt(2.0 * (1.0 - w * w)) * sqdt * rng.standard_normal()
        w = min(1.0, max(-1.0, w))
        path.append(w)
        steps += 1
        if steps >= _MAX_DIFFUSION_STEPS:
            raise AssertionError("diffusion failed to absorb within the step budget")
    absorbed_at = 1 if w > 0 else -1
    path[-1] = float(absorbed_at)
    return DiffusionPath(
        x0=x0, dt=dt, w=np.array(path), absorbed_at=absorbed_at, n_steps=steps
    )


def sle_hitting_mc(
    x0: float, n_paths: int, dt: float, rng_seed, eps_abs: float = ABSORB_EPS
) -> int:
    """Number of paths absorbed at +1 out of ``n_paths`` independent runs.

    Vectorized version of ``simulate_sle_diffusion`` that only tracks the
    absorption side; the per-path scheme is identical.
    """
    if not dt <= 1e-3:
        raise ValueError("step size must satisfy dt <= 1e-3")
    rng = np.random.default_rng(rng_seed)
    w = np.full(n_paths, float(x0))
    hits = 0
    sqdt = math.sqrt(dt)
    steps = 0
    while w.size:
        w += np.sqrt(2.0 * np.maximum(1.0 - w * w, 0.0)) * sqdt * rng.standard_normal(w.size)
        np.clip(w, -1.0, 1.0, out=w)
        done = np.abs(w) >= 1.0 - eps_abs
        if done.any():
            hits += int(np.count_nonzero(w[done] > 0.0))
            w = w[~done]
        steps += 1
        if steps >= _MAX_DIFFUSION_STEPS:
            raise AssertionError("diffusion failed to absorb within the step budget")
    return hits


@dataclass
class CoordinateChangedPath:
    """Driving path mapped back to physical time.

    Arrays share the simulation grid: ``t`` is the physical clock, ``y`` the
    driving process and ``v_left``/``v_right`` the force-point processes.
    """

    t: np.ndarray
    y: np.ndarray
    v_left: np.ndarray
    v_right: np.ndarray
    s: np.ndarray
    w_tilde: np.ndarray

    def recovered_driver(self) -> np.ndarray:
        """Invert the normalization; equals ``w_tilde`` up to quadrature error."""
        return (2.0 * self.y - self.v_left - self.v_right) / (self.v_right - self.v_left)


def coordinate_change_path(path: DiffusionPath) -> CoordinateChangedPath:
    """Map a normalized trajectory to physical time via the explicit change
    of variables.

    The physical clock is t(s) = (1/8) * int_0^s e^{2u} (1 - W(u)^2) du; the
    driving process and force points follow by integrating e^u against W,
    1 - W and 1 + W.  All integrals use the trapezoid rule on the path grid,
    whose inversion t <-> s is the identity on grid indices because t(s) is
    nondecreasing.
    """
    if len(path.w) == 0:
        raise ValueError("empty diffusion path")
    s = path.s
    y_tilde = path.w
    y0 = y_tilde[0]
    e = np.exp(s)
    int_e_y = cumulative_trapezoid(e * y_tilde, s, initial=0.0)
    int_e_minus = cumulative_trapezoid(e * (1.0 - y_tilde), s, initial=0.0)
    int_e_plus = cumulative_trapezoid(e * (1.0 + y_tilde), s, initial=0.0)
    t = 0.125 * cumulative_trapezoid(e * e * (1.0 - y_tilde * y_tilde), s, initial=0.0)
    y = 0.5 * e * y_tilde + 0.5 * int_e_y - 0.5 * y0
    v_left = -0.5 * (1.0 + y0) - 0.5 * int_e_minus
    v_right = 0.5 * (1.0 - y0) + 0.5 * int_e_plus
    return CoordinateChangedPath(
        t=t, y=y, v_left=v_left, v_right=v_right, s=s, w_tilde=y_tilde
    )


# -- line hitting ------------------------------------------------------------------


def _norm_tail(x: float) -> float:
    return 0.5 * erfc(x / math.sqrt(2.0))


def bm_line_hitting_cdf(m: float, b: float, T: float) -> float:
    """P(tau <= T) for tau the first time a standard Brownian motion drops to
    the moving line m*t - b, with b > 0.

    Evaluates Phi_bar(b/sqrt(T) - m*sqrt(T)) + e^{2bm} Phi_bar(b/sqrt(T) +
    m*sqrt(T)); for m < 0 the T -> infinity limit is e^{2bm}.
    """
    if not (b > 0.0 and T > 0.0):
        raise ValueError("need b > 0 and T > 0")
    rt = math.sqrt(T)
    return float(
        _norm_tail(b / rt - m * rt) + math.exp(2.0 * b * m) * _norm_tail(b / rt + m * rt)
    )
