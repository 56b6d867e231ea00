"""Transcendental systems: branch-tracked logarithms, residuals, Newton corrector.

Residual conventions
--------------------
Real branch (k1 <= k2 <= k3, gaps d1, d2 >= 0): with
theta(dk, c) = -2*atan2(dk, c) in (-2*pi, 0], the quantization system reads

    r1 = d1 - 2*pi*(n1+1) - 2*theta(d1,c) - theta(d1+d2,c) + theta(d2,c)
    r2 = d2 - 2*pi*(n2+1) - 2*theta(d2,c) - theta(d1+d2,c) + theta(d1,c)

which is globally continuous in c and equals the tracked-log form
r_j = d_j - i*log(z_j) - 2*pi*n_j when the log is continued from the c = 0
root (z_j = 1, winding 0).  Both forms are implemented; the theta-sum is the
default evaluation path and the winding form is the independent cross-check.

Complex branch, family n1 = 1 (valid below C(1, n2), 0 < alpha < -c/2):

    r_alpha = 2*alpha + log[ ((-c-2a)/(-c+2a))^2 * ((-c-a)^2+9g^2)/((-c+a)^2+9g^2) ]
    r_gamma = -3*gamma + 3*arg(-c+a + 3ig) + 3*arg(-c-a + 3ig) - 2*pi*(n2-1)

Family n1 = 0 (valid for c < 0, 2*alpha + c > 0):

    r_alpha = 2*alpha + log[ ((2a+c)/(2a-c))^2 * ((a+c)^2+9g^2)/((a-c)^2+9g^2) ]
    r_gamma = -3*gamma + 3*arg(-3g + i(a-c)) - 3*arg(-3g + i(a+c)) - 2*pi*n2

The factor -3g + i(a-c) stays in the upper half plane, so its argument is
principal; -3g + i(a+c) may wander and is winding-tracked along a trajectory.

Internally the solvers work in shifted correction variables
(beta = alpha + c/2, eta = alpha + c) to avoid the catastrophic cancellation
of -c - 2*alpha (or alpha + c) deep in the attractive regime; the public
functions accept plain (alpha, gamma).
"""
from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field

import numpy as np

from .model import TWO_PI, QuantumLabel
from .tolerances import (
    FD_STEP,
    IMAG_TOL,
    NEWTON_MAX_HALVINGS,
    NEWTON_MAX_ITER,
    residual_tolerance,
)


class SingularArgumentError(ValueError):
    """A tracked-log argument hit zero (root collision / invalid region)."""


class ConstraintViolationError(ValueError):
    """A sign constraint of the current branch would be crossed."""


class NoConvergenceError(RuntimeError):
    """Newton failed to reach tolerance."""

    def __init__(self, message: str, root, residual, iterations: int):
        super().__init__(message)
        self.root = root
        self.residual = residual
        self.iterations = iterations


class FoldPointError(ValueError):
    """Implicit-derivative denominator vanished (fold point)."""


def theta(dk: float, c: float) -> float:
    """Two-body phase shift branch in (-2*pi, 0] for ordered momenta (dk >= 0).

    Continuous in c for fixed dk > 0: 0 at c -> +inf, -pi at c = 0, -2*pi at
    c -> -inf.  The doubly-degenerate point dk = c = 0 returns -pi (reference
    state convention).
    """
    if dk == 0.0 and c == 0.0:
        return -math.pi
    return -2.0 * math.atan2(dk, c)


# ---------------------------------------------------------------------------
# Winding-tracked logarithm
# ---------------------------------------------------------------------------


@dataclass
class WindingState:
    """Accumulated branch bookkeeping for a set of tracked log arguments.

    For each key the previous argument value and the winding count are kept;
    the count steps by +/-1 exactly when the segment between successive
    arguments crosses the negative real axis.  Single-owner mutable: fork()
    before speculative evaluations (e.g. Newton trials) and keep the original
    for accepted points.
    """

    prev: dict = field(default_factory=dict)
    wind: dict = field(default_factory=dict)

    def fork(self) -> "WindingState":
        return WindingState(prev=dict(self.prev), wind=dict(self.wind))

    def windings(self) -> dict:
        return dict(self.wind)

    def _update(self, key, z: complex) -> int:
        if abs(z) == 0.0:
            raise SingularArgumentError(f"tracked argument {key!r} hit zero")
        if key not in self.prev:
            self.prev[key] = complex(z)
            self.wind[key] = 0
            return 0
        a_prev = cmath.phase(self.prev[key])
        a_new = cmath.phase(z)
        delta = a_new - a_prev
        if delta > math.pi:
            self.wind[key] -= 1
        elif delta < -math.pi:
            self.wind[key] += 1
        self.prev[key] = complex(z)
        return self.wind[key]

    def arg(self, key, z: complex) -> float:
        """Continuously tracked argument of z."""
        w = self._update(key, z)
        return cmath.phase(z) + TWO_PI * w


def tracked_log(z: complex, state: WindingState, key="log") -> complex:
    """Analytically continued logarithm: principal log plus 2*pi*i*winding."""
    w = state._update(key, z)
    return cmath.log(z) + TWO_PI * 1j * w


# ---------------------------------------------------------------------------
# Real branch
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ResidualPoint:
    """Residual evaluation at a trial point of a 2-unknown system."""

    unknowns: tuple[float, float]
    residual: tuple[float, float]
    imag_defect: float = 0.0


def _real_log_arguments(d1: float, d2: float, c: float) -> tuple[complex, complex]:
    f1 = complex(c, d1)
    f1c = complex(c, -d1)
    f2 = complex(c, d2)
    f2c = complex(c, -d2)
    f3 = complex(c, d1 + d2)
    f3c = complex(c, -(d1 + d2))
    z1 = (f1 / f1c) ** 2 * (f2c / f2) * (f3 / f3c)
    z2 = (f2 / f2c) ** 2 * (f1c / f1) * (f3 / f3c)
    return z1, z2


def residual_real_thetasum(d1: float, d2: float, c: float, n1: int, n2: int) -> tuple[float, float]:
    """Theta-sum form of the coupled real-branch equations (stateless)."""
    t1 = theta(d1, c)
    t2 = theta(d2, c)
    t3 = theta(d1 + d2, c)
    r1 = d1 - TWO_PI * (n1 + 1) - 2.0 * t1 - t3 + t2
    r2 = d2 - TWO_PI * (n2 + 1) - 2.0 * t2 - t3 + t1
    return r1, r2


def residual_real(
    d1: float,
    d2: float,
    c: float,
    label: QuantumLabel,
    winding: WindingState | None = None,
) -> ResidualPoint:
    """Coupled residuals for (delta1, delta2) at coupling c under a label.

    With a WindingState the tracked-log form r_j = d_j - i*log(z_j) - 2*pi*n_j
    is evaluated (winding initialized at the c = 0 root); without one the
    equivalent theta-sum form is used.  Imaginary parts must cancel and are
    asserted below IMAG_TOL.
    """
    if winding is None:
        r1, r2 = residual_real_thetasum(d1, d2, c, label.n1, label.n2)
        return ResidualPoint(unknowns=(d1, d2), residual=(r1, r2))
    z1, z2 = _real_log_arguments(d1, d2, c)
    l1 = tracked_log(z1, winding, key="z1")
    l2 = tracked_log(z2, winding, key="z2")
    r1 = d1 - (1j * l1).real - TWO_PI * label.n1
    r2 = d2 - (1j * l2).real - TWO_PI * label.n2
    defect = max(abs((1j * l1).imag), abs((1j * l2).imag))
    if defect > IMAG_TOL:
        raise ValueError(f"residual imaginary defect {defect} exceeds {IMAG_TOL}")
    return ResidualPoint(unknowns=(d1, d2), residual=(r1, r2), imag_defect=defect)


def residual_equal_delta(d: float, c: float, n0: int) -> float:
    """Scalar residual for the common delta when n1 = n2 = n0 (real branch)."""
    if d < 0:
        raise ConstraintViolationError(f"delta must be >= 0, got {d}")
    return d - theta(d, c) - theta(2.0 * d, c) - TWO_PI * (n0 + 1)


def ddelta_dc(delta: float, c: float) -> float:
    """Implicit derivative d(delta)/dc on the equal-delta root curve."""
    d2 = delta * delta
    num = 6.0 * delta * (c * c + 2.0 * d2)
    den = c * c * (c * c + 5.0 * d2) + 4.0 * d2 * d2 + 6.0 * c * (2.0 * d2 + c * c)
    if abs(den) < 1e-14 * max(1.0, abs(num)):
        raise FoldPointError(f"implicit-derivative denominator vanished at delta={delta}, c={c}")
    return num / den


# ---------------------------------------------------------------------------
# Complex branch: stable internal forms
# ---------------------------------------------------------------------------


def family1_residual_beta(b: float, g: float, c: float, n2: int) -> tuple[float, float]:
    """n1 = 1 family in beta = alpha + c/2 (c/2 < beta < 0), gamma.

    Pieces: -c-2a = -2b, -c+2a = -2c+2b, -c-a = -c/2-b, -c+a = -3c/2+b.
    """
    if not (c / 2.0 < b < 0.0):
        raise ConstraintViolationError(f"beta out of range ({c/2}, 0): {b}")
    xm = -c / 2.0 - b       # -c - alpha > 0
    xp = -1.5 * c + b       # -c + alpha > 0
    ra = (-c + 2.0 * b) + 2.0 * (math.log(-2.0 * b) - math.log(-2.0 * c + 2.0 * b)) \
        + math.log(xm * xm + 9.0 * g * g) - math.log(xp * xp + 9.0 * g * g)
    rg = -3.0 * g + 3.0 * math.atan2(3.0 * g, xp) + 3.0 * math.atan2(3.0 * g, xm) \
        - TWO_PI * (n2 - 1)
    return ra, rg


def family0_residual_beta(
    b: float, g: float, c: float, n2: int, winding: WindingState | None = None
) -> tuple[float, float]:
    """n1 = 0 family in beta = alpha + c/2 (> 0), gamma.

    Pieces: 2a+c = 2b, 2a-c = -2c+2b, a+c = c/2+b, a-c = -3c/2+b.
    """
    if b <= 0.0:
        raise ConstraintViolationError(f"2*alpha + c must stay positive, beta={b}")
    eta = c / 2.0 + b       # alpha + c
    am = -1.5 * c + b       # alpha - c > 0
    ra = (-c + 2.0 * b) + 2.0 * (math.log(2.0 * b) - math.log(-2.0 * c + 2.0 * b)) \
        + math.log(eta * eta + 9.0 * g * g) - math.log(am * am + 9.0 * g * g)
    arg_a = math.atan2(am, -3.0 * g)
    if winding is None:
        arg_b = math.atan2(eta, -3.0 * g)
    else:
        arg_b = winding.arg("B", complex(-3.0 * g, eta))
    rg = -3.0 * g + 3.0 * arg_a - 3.0 * arg_b - TWO_PI * n2
    return ra, rg


def family0_residual_eta(
    e: float, g: float, c: float, n2: int, winding: WindingState | None = None
) -> tuple[float, float]:
    """n1 = 0 family in eta = alpha + c, gamma (trimer-side parameterization).

    Pieces: 2a+c = -c+2e, 2a-c = -3c+2e, a+c = e, a-c = -2c+e.
    """
    if -c + 2.0 * e <= 0.0:
        raise ConstraintViolationError(f"2*alpha + c must stay positive, eta={e}, c={c}")
    am = -2.0 * c + e
    ra = (-2.0 * c + 2.0 * e) + 2.0 * (math.log(-c + 2.0 * e) - math.log(-3.0 * c + 2.0 * e)) \
        + math.log(e * e + 9.0 * g * g) - math.log(am * am + 9.0 * g * g)
    arg_a = math.atan2(am, -3.0 * g)
    if winding is None:
        arg_b = math.atan2(e, -3.0 * g)
    else:
        arg_b = winding.arg("B", complex(-3.0 * g, e))
    rg = -3.0 * g + 3.0 * arg_a - 3.0 * arg_b - TWO_PI * n2
    return ra, rg


def pair_residual_beta(b: float, c: float) -> float:
    """Scalar gamma = 0 equation for the (1,1) branch in beta = alpha + c/2 < 0.

    alpha = ln[(alpha-c)(2alpha-c) / ((alpha+c)(2alpha+c))] with 2*alpha < -c.
    """
    if not (c / 2.0 < b < 0.0):
        raise ConstraintViolationError(f"beta out of range ({c/2}, 0): {b}")
    return (-c / 2.0 + b) - math.log(
        (-1.5 * c + b) * (-2.0 * c + 2.0 * b) / ((-c / 2.0 - b) * (-2.0 * b))
    )


def trimer_residual_eta(e: float, c: float) -> float:
    """Scalar gamma = 0 equation for the (0,0) branch in eta = alpha + c > 0."""
    if e <= 0.0:
        raise ConstraintViolationError(f"alpha + c must stay positive, eta={e}")
    return (-c + e) - math.log((-2.0 * c + e) * (-3.0 * c + 2.0 * e)) \
        + math.log(e) + math.log(-c + 2.0 * e)


def residual_complex(
    alpha: float,
    gamma: float,
    c: float,
    label: QuantumLabel,
    winding: WindingState | None = None,
) -> ResidualPoint:
    """Two real residuals for the complex branch at (alpha, gamma).

    Dispatches to the n1 = 0 or n1 = 1 family of equations; raises
    ConstraintViolationError when a log factor would change sign.

    Conditioning: the equations depend on the exponentially small parts
    eta = alpha + c (trimers) or beta = alpha + c/2 (dimers), recovered here
    by subtraction from alpha; once those drop toward eps*|alpha| the
    evaluation loses accuracy like eps*|c|/eta.  The continuation solvers
    avoid this by working in the shifted unknowns directly.
    """
    if c >= 0:
        raise ConstraintViolationError(f"complex branch requires c < 0, got {c}")
    if alpha <= 0:
        raise ConstraintViolationError(f"alpha must be > 0, got {alpha}")
    lab = label.canonical()
    if lab.n1 == 1:
        ra, rg = family1_residual_beta(alpha + c / 2.0, gamma, c, lab.n2)
    elif lab.n1 == 0:
        if alpha > -0.75 * c:
            ra, rg = family0_residual_eta(alpha + c, gamma, c, lab.n2, winding)
        else:
            ra, rg = family0_residual_beta(alpha + c / 2.0, gamma, c, lab.n2, winding)
    else:
        raise ConstraintViolationError(
            f"label {label} has no complex branch (both n_j >= 2)"
        )
    return ResidualPoint(unknowns=(alpha, gamma), residual=(ra, rg))


def gamma_squared_from_alpha(alpha: float, c: float) -> float:
    """Closed-form gamma^2(alpha, c) from the n1 = 1 family alpha equation.

    At alpha = 0 this reduces to c^2*(6+c)/(-9*(4+c)), the critical-point
    relation.  Uses an odd-part series below |alpha| = 1e-3 to avoid the 0/0
    cancellation at alpha -> 0.
    """
    if c >= 0:
        raise ValueError(f"requires c < 0, got {c}")
    if alpha < 0:
        raise ValueError(f"requires alpha >= 0, got {alpha}")
    if alpha < 1e-3:
        # num ~ -(f'(0) + f'''(0) a^2/6), den ~ 9(h'(0) + h'''(0) a^2/6)
        a2 = alpha * alpha
        fp = c ** 3 * (c + 6.0)
        fppp = c ** 4 + 18.0 * c ** 3 + 78.0 * c * c + 72.0 * c
        hp = c * (c + 4.0)
        hppp = c * c + 12.0 * c + 24.0
        den = hp + hppp * a2 / 6.0
        if abs(den) < 1e-13 * max(1.0, abs(hp)):
            raise ZeroDivisionError(f"gamma^2 pole at alpha={alpha}, c={c}")
        return -(fp + fppp * a2 / 6.0) / (9.0 * den)
    ea = math.exp(alpha)
    f_m = (c - 2 * alpha) ** 2 * (c - alpha) ** 2 / ea
    f_p = (c + 2 * alpha) ** 2 * (c + alpha) ** 2 * ea
    h_m = (c - 2 * alpha) ** 2 / ea
    h_p = (c + 2 * alpha) ** 2 * ea
    den = 9.0 * (h_p - h_m)
    if abs(den) < 1e-13 * max(1.0, abs(h_p) + abs(h_m)):
        raise ZeroDivisionError(f"gamma^2 pole at alpha={alpha}, c={c}")
    return (f_m - f_p) / den


# ---------------------------------------------------------------------------
# Damped Newton corrector
# ---------------------------------------------------------------------------


@dataclass
class NewtonResult:
    root: np.ndarray
    residual: np.ndarray
    iterations: int


def newton_solve(
    residual,
    guess,
    tol: float | None = None,
    max_iter: int = NEWTON_MAX_ITER,
    guard=None,
    scale=None,
) -> NewtonResult:
    """Damped Newton with central-difference Jacobian.

    residual maps an n-vector to an n-vector; guard(x) -> bool marks the valid
    sheet (steps never cross it); scale is an optional per-unknown magnitude
    so the FD step 1e-7*max(1,|y|) is taken in scaled space (y = x/scale).
    Raises NoConvergenceError / ConstraintViolationError.
    """
    tol = residual_tolerance(tol)
    x = np.atleast_1d(np.asarray(guess, dtype=float)).copy()
    n = x.size
    s = np.ones(n) if scale is None else np.broadcast_to(np.asarray(scale, float), (n,)).copy()
    if np.any(s <= 0):
        raise ValueError("scale entries must be positive")

    def f(y: np.ndarray) -> np.ndarray:
        return np.atleast_1d(np.asarray(residual(y * s), dtype=float))

    if guard is not None and not guard(x):
        raise ConstraintViolationError(f"initial guess {x} violates constraints")
    y = x / s
    r = f(y)
    it = 0
    for it in range(1, max_iter + 1):
        rmax = np.max(np.abs(r))
        if rmax < tol:
            return NewtonResult(root=y * s, residual=r, iterations=it - 1)
        jac = np.empty((n, n))
        for j in range(n):
            h = FD_STEP * max(1.0, abs(y[j]))
            yp = y.copy(); yp[j] += h
            ym = y.copy(); ym[j] -= h
            ok_p = guard is None or guard(yp * s)
            ok_m = guard is None or guard(ym * s)
            try:
                if ok_p and ok_m:
                    jac[:, j] = (f(yp) - f(ym)) / (2.0 * h)
                elif ok_p:
                    jac[:, j] = (f(yp) - r) / h
                elif ok_m:
                    jac[:, j] = (r - f(ym)) / h
                else:
                    raise ConstraintViolationError("FD probes blocked on both sides")
            except (SingularArgumentError, ValueError) as exc:
                raise NoConvergenceError(
                    f"Jacobian evaluation failed: {exc}", y * s, r, it
                ) from exc
        try:
            step = np.linalg.solve(jac, -r)
        except np.linalg.LinAlgError as exc:
            raise NoConvergenceError(f"singular Jacobian: {exc}", y * s, r, it) from exc
        lam = 1.0
        accepted = False
        for _ in range(NEWTON_MAX_HALVINGS):
            y_new = y + lam * step
            if guard is None or guard(y_new * s):
                try:
                    r_new = f(y_new)
                except (SingularArgumentError, ConstraintViolationError):
                    lam *= 0.5
                    continue
                if np.all(np.isfinite(r_new)) and (
                    np.max(np.abs(r_new)) <= rmax or np.max(np.abs(r_new)) < tol
                ):
                    accepted = True
                    break
            lam *= 0.5
        if not accepted:
            # keep the last guarded candidate if any; otherwise the step is blocked
            y_new = y + lam * step
            if guard is not None and not guard(y_new * s):
                raise ConstraintViolationError(
                    f"Newton step blocked by sign constraints near x={y * s}"
                )
            try:
                r_new = f(y_new)
            except (SingularArgumentError, ConstraintViolationError) as exc:
                raise NoConvergenceError(str(exc), y * s, r, it) from exc
        y, r = y_new, r_new
    raise NoConvergenceError(
        f"no convergence after {max_iter} iterations (|r|={np.max(np.abs(r)):.3e})",
        y * s, r, max_iter,
    )
