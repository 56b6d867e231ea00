"""Root continuation over the coupling grid: tracing, critical points, spectra.

Every trajectory starts from the exact non-interacting solution
delta_j(0) = 2*pi*n_j and marches outward with a secant predictor and the
damped-Newton corrector.  Labels with min(n1,n2) = 1 turn complex at the
critical coupling C(1,n2) in [-6,-4); labels with min = 0 turn complex at
C = 0; labels with both n_j >= 2 stay real for all c.  Near a critical point
the square-root local models seed the corrector and the step is refined
geometrically.

Partner labels (n1 > n2) are never re-solved: the canonical trajectory is
traced and mapped through the conjugation symmetry sample by sample.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum

import numpy as np
from scipy.optimize import brentq

from . import equations as eq
from .model import (
    TWO_PI,
    ComplexCoords,
    QuantumLabel,
    RealCoords,
    StateSolution,
    build_state,
    partner_state,
)
from .tolerances import (
    BASE_STEP,
    FOLD_ALPHA_SMALL,
    FOLD_MIN_SPAN,
    IDENTITY_TOL,
    residual_tolerance,
)


class BoundsViolationError(RuntimeError):
    """A trajectory sample broke a branch-sheet bound."""


class CriticalClass(Enum):
    AT_ZERO = "at_zero"    # min(n1,n2) = 0: complex immediately below c = 0
    WINDOW = "window"      # min(n1,n2) = 1: critical point in [-6, -4)
    NONE = "none"          # both n_j >= 2: real for all c


@dataclass(frozen=True)
class CriticalPoint:
    """Critical coupling record; u0 is the critical delta2/c ratio (0.0 for
    the n1 = 0 family, whose common critical point sits at C = 0)."""

    C: float
    u0: float


def critical_class(label: QuantumLabel) -> CriticalClass:
    lab = label.canonical()
    if lab.n1 == 0:
        return CriticalClass.AT_ZERO
    if lab.n1 == 1:
        return CriticalClass.WINDOW
    return CriticalClass.NONE


def u0_equation(u: float, n2: int) -> float:
    """Transcendental equation fixing u0 = delta2/c at the critical point."""
    return -6.0 * math.atan(u) + 4.0 * u + 2.0 * u / (1.0 + u * u) + TWO_PI * (n2 - 1)


def find_critical(label: QuantumLabel) -> CriticalPoint:
    """Critical coupling C(1, n2) in (-6, -4) for n2 >= 2; exactly -6 for (1,1)."""
    lab = label.canonical()
    if lab.n1 != 1:
        raise ValueError(f"critical coupling is defined for n1 = 1 labels, got {label}")
    n2 = lab.n2
    if n2 == 1:
        return CriticalPoint(C=-6.0, u0=0.0)
    lo = -TWO_PI * n2 - 10.0
    u0 = brentq(u0_equation, lo, 0.0, args=(n2,), xtol=1e-14, rtol=8.9e-16)
    return CriticalPoint(C=-4.0 - 2.0 / (1.0 + u0 * u0), u0=u0)


def fold_coefficients(u0: float) -> tuple[float, float]:
    """Local fold constants at C(1,n2>=2): c = C + Kc*u1^2, u2 = u0 - u1/2 + Ku*u1^2."""
    if u0 == 0.0:
        raise ValueError("fold coefficients apply to n2 >= 2 (u0 < 0); (1,1) uses c = -6 + delta^2/6")
    q = 1.0 + u0 * u0
    kc = (21.0 + 24.0 * u0 ** 2 + 8.0 * u0 ** 4) / (6.0 * q * q)
    ku = (3.0 + 6.0 * u0 ** 2 + 2.0 * u0 ** 4) / (6.0 * u0 * q)
    return kc, ku


def delta1_fold_model(label: QuantumLabel, c: float, critical: CriticalPoint) -> tuple[float, float]:
    """Real-branch (delta1, delta2) from the local model just above C."""
    lab = label.canonical()
    if lab.n2 == 1:
        d = math.sqrt(max(6.0 * (c + 6.0), 0.0))
        return d, d
    kc, ku = fold_coefficients(critical.u0)
    u1 = -math.sqrt(max(c - critical.C, 0.0) / kc)
    u2 = critical.u0 - 0.5 * u1 + ku * u1 * u1
    return c * u1, c * u2


def branch_switch(
    label: QuantumLabel, c: float, critical: CriticalPoint | None = None
) -> ComplexCoords:
    """Square-root local-model seed (alpha, gamma) for c slightly below C."""
    lab = label.canonical()
    p = TWO_PI * lab.np
    cls = critical_class(lab)
    if cls is CriticalClass.NONE:
        raise ValueError(f"label {label} has no complex branch")
    if cls is CriticalClass.AT_ZERO:
        if c >= 0:
            raise ValueError(f"seed requires c < 0, got {c}")
        if lab.n2 == 0:
            return ComplexCoords(alpha=math.sqrt(-3.0 * c), gamma=0.0, p=p)
        alpha = math.sqrt(-c)
        gamma = -(2.0 / 3.0) * math.pi * lab.n2 + alpha * alpha / (math.pi * lab.n2)
        return ComplexCoords(alpha=alpha, gamma=gamma, p=p)
    crit = critical or find_critical(lab)
    if c >= crit.C:
        raise ValueError(f"seed requires c < C = {crit.C}, got {c}")
    if lab.n2 == 1:
        return ComplexCoords(alpha=math.sqrt(6.0 * (-6.0 - c)), gamma=0.0, p=p)
    kc, ku = fold_coefficients(crit.u0)
    alpha = 0.5 * abs(c) * math.sqrt((crit.C - c) / kc)
    gamma = -c * (crit.u0 + ku * (-4.0 * alpha * alpha / (c * c))) / 3.0
    return ComplexCoords(alpha=alpha, gamma=gamma, p=p)


# ---------------------------------------------------------------------------
# Marching engine
# ---------------------------------------------------------------------------


def _real_guard(lab: QuantumLabel):
    """Loose sheet guard for the real-branch Newton; the published delta windows
    are enforced exactly on accepted samples."""
    hi1 = TWO_PI * (lab.n1 + 1) + math.pi
    hi2 = TWO_PI * (lab.n2 + 1) + math.pi

    def guard(x):
        return 0.0 <= x[0] < hi1 and 0.0 <= x[1] < hi2

    return guard


def _check_real_bounds(lab: QuantumLabel, c: float, d1: float, d2: float) -> None:
    slack = 1e-9
    for d, n in ((d1, lab.n1), (d2, lab.n2)):
        if c > 0:
            lo, hi = TWO_PI * n - math.pi, TWO_PI * (n + 1)
        elif c < 0:
            lo, hi = TWO_PI * (n - 1), TWO_PI * n + math.pi
        else:
            lo = hi = TWO_PI * n
        if not (lo - slack <= d <= hi + slack):
            raise BoundsViolationError(
                f"delta bound broken for {lab} at c={c}: delta={d}, window=({lo}, {hi})"
            )


class _Marcher:
    """Marches one canonical label outward on both sides of c = 0."""

    def __init__(self, label: QuantumLabel, tol: float):
        self.lab = label.canonical()
        self.p = TWO_PI * self.lab.np
        self.tol = tol
        self.cls = critical_class(self.lab)
        self.critical = find_critical(self.lab) if self.cls is CriticalClass.WINDOW else None
        self.winding = eq.WindingState()      # real-branch tracked-log cross-check
        self.winding_b = eq.WindingState()    # family-0 gamma-argument tracker

    # -- real branch ---------------------------------------------------------

    def _solve_real(self, c: float, guess: np.ndarray) -> np.ndarray:
        lab = self.lab
        if lab.is_diagonal:
            res = eq.newton_solve(
                lambda x: np.array([eq.residual_equal_delta(x[0], c, lab.n1)]),
                guess[:1],
                tol=self.tol,
                guard=lambda x: x[0] >= 0.0,
                scale=[max(abs(guess[0]), 1e-6)],
            )
            return np.array([res.root[0], res.root[0]])
        res = eq.newton_solve(
            lambda x: np.array(eq.residual_real_thetasum(x[0], x[1], c, lab.n1, lab.n2)),
            guess,
            tol=self.tol,
            guard=_real_guard(lab),
        )
        return res.root

    def _winding_crosscheck(self, c: float, d: np.ndarray) -> None:
        """Tracked-log residual must agree with the theta-sum at every accept."""
        if d[0] <= 0.0 or d[1] <= 0.0:
            return  # z_j degenerates to 0/0 at the reference / critical ends
        point = eq.residual_real(d[0], d[1], c, self.lab, winding=self.winding)
        if max(abs(point.residual[0]), abs(point.residual[1])) > 1e-9:
            raise BoundsViolationError(
                f"winding-tracked residual diverged from theta-sum at c={c}: {point.residual}"
            )

    def _guess_real(self, c, x, cprev, xprev, cn) -> np.ndarray:
        lab = self.lab
        if lab.n1 == 0 and 0.0 < cn <= 0.05:
            from .asymptotics import delta_small_c

            return np.array(delta_small_c(lab, cn))
        if self.cls is CriticalClass.WINDOW and cn < 0:
            crit = self.critical
            if x[0] < FOLD_ALPHA_SMALL or cn - crit.C < 0.1:
                return np.array(delta1_fold_model(lab, cn, crit))
        if xprev is None or cprev is None or cprev == c:
            return x.copy()
        return x + (x - xprev) * (cn - c) / (c - cprev)

    def march_real(self, targets: list[float]) -> list[StateSolution]:
        """Real-branch march from c = 0 through targets (ascending |c|)."""
        lab = self.lab
        out = []
        self.winding = eq.WindingState()
        descending = bool(targets) and targets[-1] < 0
        fold_c = self.critical.C if (descending and self.cls is CriticalClass.WINDOW) else None
        c = 0.0
        x = np.array([TWO_PI * lab.n1, TWO_PI * lab.n2], float)
        if lab.n1 >= 1:
            self._winding_crosscheck(c, x)
        xprev = cprev = None
        for tgt in targets:
            if tgt == 0.0:
                out.append(build_state(lab, 0.0, RealCoords(x[0], x[1], self.p)))
                continue
            sign = 1.0 if tgt > 0 else -1.0
            while c != tgt:
                base = BASE_STEP * max(1.0, abs(c) / 10.0)  # roots flatten like 1/c far out
                step = min(base, abs(tgt - c))
                if fold_c is not None:
                    step = min(step, max(0.5 * (c - fold_c), FOLD_MIN_SPAN / 4.0))
                cn = c + sign * step
                if sign * (tgt - cn) < 1e-12 * max(1.0, abs(tgt)):
                    cn = tgt
                guess = self._guess_real(c, x, cprev, xprev, cn)
                try:
                    xn = self._solve_real(cn, guess)
                except eq.NoConvergenceError as exc:
                    raise eq.NoConvergenceError(
                        f"real-branch corrector failed at c={cn} "
                        f"(last good c={c}): {exc}",
                        exc.root, exc.residual, exc.iterations,
                    ) from exc
                xprev, cprev = x, c
                x, c = xn, cn
                self._winding_crosscheck(c, x)
            _check_real_bounds(lab, c, x[0], x[1])
            out.append(build_state(lab, c, RealCoords(x[0], x[1], self.p)))
        return out

    # -- complex branch --------------------------------------------------------

    def _complex_forms(self):
        """Stable per-label parameterization: converters, residual, guard, scale."""
        lab = self.lab
        p = self.p
        if lab.n1 == 1 and lab.n2 == 1:
            return (
                lambda coords, c: np.array([coords.alpha + c / 2.0]),
                lambda x, c: ComplexCoords(-c / 2.0 + x[0], 0.0, p),
                lambda c: (lambda x: np.array([eq.pair_residual_beta(x[0], c)])),
                lambda c: (lambda x: c / 2.0 < x[0] < 0.0),
                lambda g: [max(abs(g[0]), 1e-280)],
            )
        if lab.n1 == 1:
            return (
                lambda coords, c: np.array([coords.alpha + c / 2.0, coords.gamma]),
                lambda x, c: ComplexCoords(-c / 2.0 + x[0], x[1], p),
                lambda c: (lambda x: np.array(eq.family1_residual_beta(x[0], x[1], c, lab.n2))),
                lambda c: (lambda x: c / 2.0 < x[0] < 0.0),
                lambda g: [max(abs(g[0]), 1e-280), max(abs(g[1]), 1.0)],
            )
        if lab.n2 == 0:
            return (
                lambda coords, c: np.array([coords.alpha + c]),
                lambda x, c: ComplexCoords(-c + x[0], 0.0, p),
                lambda c: (lambda x: np.array([eq.trimer_residual_eta(x[0], c)])),
                lambda c: (lambda x: x[0] > 0.0),
                lambda g: [max(abs(g[0]), 1e-280)],
            )
        if lab.n2 == 1:
            return (
                lambda coords, c: np.array([coords.alpha + c, coords.gamma]),
                lambda x, c: ComplexCoords(-c + x[0], x[1], p),
                lambda c: (
                    lambda x: np.array(
                        eq.family0_residual_eta(x[0], x[1], c, 1, self.winding_b.fork())
                    )
                ),
                lambda c: (lambda x: -c + 2.0 * x[0] > 0.0 and (x[0] != 0.0 or x[1] != 0.0)),
                lambda g: [max(abs(g[0]), 1e-280), max(abs(g[1]), 1e-280)],
            )
        return (
            lambda coords, c: np.array([coords.alpha + c / 2.0, coords.gamma]),
            lambda x, c: ComplexCoords(-c / 2.0 + x[0], x[1], p),
            lambda c: (
                lambda x: np.array(
                    eq.family0_residual_beta(x[0], x[1], c, lab.n2, self.winding_b.fork())
                )
            ),
            lambda c: (lambda x: x[0] > 0.0),
            lambda g: [max(abs(g[0]), 1e-280), max(abs(g[1]), 1.0)],
        )

    def _accept_tracker(self, x: np.ndarray, c: float) -> None:
        """Advance the shared family-0 argument tracker to an accepted point."""
        lab = self.lab
        if lab.n1 != 0 or lab.n2 == 0:
            return
        if lab.n2 == 1:
            z = complex(-3.0 * x[1], x[0])            # eta coordinates
        else:
            z = complex(-3.0 * x[1], c / 2.0 + x[0])  # beta coordinates
        self.winding_b.arg("B", z)

    def _check_complex_sheet(self, coords: ComplexCoords, c: float) -> None:
        # the internal beta/eta guards are strict; the public alpha view may
        # saturate at the sheet edge once |beta| drops below eps*|c|
        a = coords.alpha
        if self.lab.n1 == 1 and not (0.0 < a <= -c / 2.0):
            raise BoundsViolationError(f"(1,n2) sheet broken at c={c}: alpha={a}")
        if self.lab.n1 == 0 and not (2.0 * a + c >= 0.0):
            raise BoundsViolationError(f"(0,n2) sheet broken at c={c}: alpha={a}")

    def march_complex(self, targets: list[float], c_crit: float) -> list[StateSolution]:
        """Complex-branch march for c below the critical coupling."""
        to_x, to_coords, make_residual, guard_at, scale_at = self._complex_forms()
        out = []
        c = max(c_crit - FOLD_MIN_SPAN, targets[0])
        seed = branch_switch(self.lab, c, self.critical)
        x = to_x(seed, c)
        x = self._solve_complex(make_residual, guard_at, scale_at, c, x)
        xprev = cprev = None
        for tgt in targets:
            while c != tgt:
                alpha = to_coords(x, c).alpha
                base = BASE_STEP * max(1.0, abs(c) / 25.0)
                step = min(base, c - tgt)
                if alpha < FOLD_ALPHA_SMALL:
                    step = min(step, max(0.5 * (c_crit - c), FOLD_MIN_SPAN / 4.0))
                cn = c - step
                if cn - tgt < 1e-12 * max(1.0, abs(tgt)):
                    cn = tgt
                guess = self._guess_complex(to_x, c, x, cprev, xprev, cn)
                try:
                    xn = self._solve_complex(make_residual, guard_at, scale_at, cn, guess)
                except eq.NoConvergenceError as exc:
                    raise eq.NoConvergenceError(
                        f"complex-branch corrector failed at c={cn} "
                        f"(last good c={c}): {exc}",
                        exc.root, exc.residual, exc.iterations,
                    ) from exc
                xprev, cprev = x, c
                x, c = xn, cn
            coords = to_coords(x, c)
            self._check_complex_sheet(coords, c)
            out.append(build_state(self.lab, c, coords))
        return out

    def _guess_complex(self, to_x, c, x, cprev, xprev, cn) -> np.ndarray:
        seed = branch_switch(self.lab, cn, self.critical)
        if seed.alpha < FOLD_ALPHA_SMALL:
            return to_x(seed, cn)
        if xprev is None or cprev is None or cprev == c:
            return x.copy()
        frac = (cn - c) / (c - cprev)
        guess = x + (x - xprev) * frac
        # the leading unknown (beta or eta) decays exponentially deep in the
        # attractive regime; predict it multiplicatively there
        if abs(x[0]) < 1e-2 and xprev[0] != 0.0 and x[0] * xprev[0] > 0.0:
            ratio = x[0] / xprev[0]
            if ratio > 0.0:
                guess[0] = x[0] * ratio ** frac
        return guess

    def _solve_complex(self, make_residual, guard_at, scale_at, c, guess) -> np.ndarray:
        res = eq.newton_solve(
            make_residual(c),
            guess,
            tol=self.tol,
            guard=guard_at(c),
            scale=scale_at(guess),
        )
        self._accept_tracker(res.root, c)
        return res.root

    # -- orchestration ---------------------------------------------------------

    def solve_targets(self, targets: list[float]) -> list[StateSolution]:
        """Solve at every requested c (any order); returns states in input order."""
        pos = sorted(t for t in targets if t >= 0.0)
        neg = sorted((t for t in targets if t < 0.0), reverse=True)
        states: dict[float, StateSolution] = {}
        for st in self.march_real(pos):
            states[st.c] = st
        if neg:
            c_crit = {
                CriticalClass.NONE: -math.inf,
                CriticalClass.WINDOW: self.critical.C if self.critical else -math.inf,
                CriticalClass.AT_ZERO: 0.0,
            }[self.cls]
            if any(abs(t - c_crit) < 1e-13 for t in neg):
                raise ValueError(f"cannot solve exactly at the critical point C={c_crit}")
            neg_real = [t for t in neg if t > c_crit]
            neg_complex = [t for t in neg if t < c_crit]
            for st in self.march_real(neg_real):
                states[st.c] = st
            if neg_complex:
                for st in self.march_complex(neg_complex, c_crit):
                    states[st.c] = st
        return [states[float(t)] for t in targets]


# ---------------------------------------------------------------------------
# Public operations
# ---------------------------------------------------------------------------


@dataclass
class Trajectory:
    """A labeled root followed over a c grid (samples ascending in c)."""

    label: QuantumLabel
    samples: list[StateSolution]
    critical: CriticalPoint | None = None
    windings: dict = field(default_factory=dict)

    def energies(self) -> np.ndarray:
        return np.array([s.energy for s in self.samples])

    def couplings(self) -> np.ndarray:
        return np.array([s.c for s in self.samples])

    def sample_at(self, c: float, atol: float = 1e-12) -> StateSolution:
        for s in self.samples:
            if abs(s.c - c) <= atol:
                return s
        raise KeyError(f"no sample at c={c}")

    def branch_changes(self) -> int:
        return sum(
            1 for a, b in zip(self.samples, self.samples[1:]) if a.branch is not b.branch
        )


def _grid(label: QuantumLabel, c_min: float, c_max: float, step: float) -> list[float]:
    if not (step > 0):
        raise ValueError(f"step must be positive, got {step}")
    if c_min > c_max:
        raise ValueError(f"empty range [{c_min}, {c_max}]")
    k_lo = math.ceil(c_min / step - 1e-9)
    k_hi = math.floor(c_max / step + 1e-9)
    pts = {round(k * step, 12) for k in range(k_lo, k_hi + 1)}
    pts.update((c_min, c_max))
    if c_min <= 0.0 <= c_max:
        pts.add(0.0)
    cls = critical_class(label)
    c_crit = None
    if cls is CriticalClass.WINDOW:
        c_crit = find_critical(label).C
    elif cls is CriticalClass.AT_ZERO:
        c_crit = 0.0
    if c_crit is not None:
        h = step / 2.0
        while h >= FOLD_MIN_SPAN:
            for side in (c_crit - h, c_crit + h):
                if c_min <= side <= c_max:
                    pts.add(side)
            h /= 2.0
    # exclude grid points inside the fold window, but never the exact
    # reference point c = 0 (the free solution is exact there)
    return sorted(
        t
        for t in pts
        if c_crit is None or t == 0.0 or abs(t - c_crit) >= FOLD_MIN_SPAN
    )


def trace_root(
    label: QuantumLabel,
    c_min: float,
    c_max: float,
    step: float = BASE_STEP,
    tol: float | None = None,
) -> Trajectory:
    """Trace a labeled root over [c_min, c_max] on a step grid.

    The grid is refined geometrically near the critical coupling so the
    square-root fold is resolved down to FOLD_MIN_SPAN.  Non-canonical labels
    are traced through their canonical partner and mapped by symmetry.
    """
    tol = residual_tolerance(tol)
    lab = label.canonical()
    targets = _grid(lab, c_min, c_max, step)
    marcher = _Marcher(lab, tol)
    samples = marcher.solve_targets(targets)
    if lab != label:
        samples = [partner_state(s) for s in samples]
    if marcher.cls is CriticalClass.WINDOW:
        critical = marcher.critical
    elif marcher.cls is CriticalClass.AT_ZERO:
        critical = CriticalPoint(C=0.0, u0=0.0)
    else:
        critical = None
    traj = Trajectory(
        label=label,
        samples=samples,
        critical=critical,
        windings={
            **marcher.winding.windings(),
            **{f"B:{k}": v for k, v in marcher.winding_b.windings().items()},
        },
    )
    _validate_trajectory(traj)
    return traj


def _validate_trajectory(traj: Trajectory) -> None:
    cs = traj.couplings()
    if np.any(np.diff(cs) <= 0):
        raise BoundsViolationError("trajectory samples are not strictly monotone in c")
    if traj.branch_changes() > 1:
        raise BoundsViolationError("branch tag changed more than once")
    p = TWO_PI * traj.label.np
    for s in traj.samples:
        if abs(s.momenta.total - p) > IDENTITY_TOL:
            raise BoundsViolationError(f"momentum drift at c={s.c}")


def solve_state(label: QuantumLabel, c: float, tol: float | None = None) -> StateSolution:
    """Solve a single labeled state at coupling c (continuation from c = 0)."""
    tol = residual_tolerance(tol)
    lab = label.canonical()
    marcher = _Marcher(lab, tol)
    state = marcher.solve_targets([float(c)])[0]
    if lab != label:
        state = partner_state(state)
    return state


@dataclass
class SpectrumResult:
    states: list[StateSolution]
    failures: dict[QuantumLabel, str]


def spectrum(
    labels: list[QuantumLabel],
    c: float,
    include_partners: bool = False,
    tol: float | None = None,
) -> SpectrumResult:
    """Solve every label at fixed c; states sorted by energy, errors collected."""
    states: list[StateSolution] = []
    failures: dict[QuantumLabel, str] = {}
    for label in labels:
        try:
            st = solve_state(label, c, tol=tol)
        except Exception as exc:  # propagate per label without aborting the batch
            failures[label] = f"{type(exc).__name__}: {exc}"
            continue
        states.append(st)
        if include_partners and not label.is_diagonal:
            states.append(partner_state(st))
    states.sort(key=lambda s: s.energy)
    return SpectrumResult(states=states, failures=failures)
