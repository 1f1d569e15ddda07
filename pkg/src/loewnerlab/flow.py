"""Forward and time-reversed Loewner flows with swallow-time detection."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import solve_ivp

from .driver import Driver
from .errors import InputError

# gap threshold at which the integrator hands over to the quadratic endgame
_EVENT_GAP = 1e-6
_RTOL = 1e-10
_ATOL = 1e-12


def forward_flow(d: Driver, z: complex, t_max: float | None = None, t_eval=None):
    """Integrate dg/dt = 2 / (g - d(t)) from g(0) = z.

    Returns (times, trajectory, T_z) where T_z is the detected swallow time,
    or t_max if the point survives.  The trajectory is sampled at the
    requested times (default: the driver's knots) up to the swallow time.
    """
    z = complex(z)
    if z == 0:
        raise InputError("z = 0 is swallowed immediately; start elsewhere")
    if z.imag < 0:
        raise InputError("z must lie in the closed upper half-plane")
    if t_max is None:
        t_max = d.t_end
    if t_max > d.t_end + 1e-12:
        raise InputError("t_max exceeds the driver horizon")
    if t_eval is None:
        t_eval = d.grid.times[d.grid.times <= t_max]

    def rhs(t, y):
        w = complex(y[0], y[1]) - d(min(t, d.t_end))
        v = 2.0 / w
        return [v.real, v.imag]

    def near_driver(t, y):
        return abs(complex(y[0], y[1]) - d(min(t, d.t_end))) - _EVENT_GAP

    near_driver.terminal = True
    near_driver.direction = -1

    sol = solve_ivp(rhs, (0.0, t_max), [z.real, z.imag], method="RK45",
                    rtol=_RTOL, atol=_ATOL, events=near_driver,
                    t_eval=np.asarray(t_eval, dtype=float), dense_output=False)
    traj = sol.y[0] + 1j * sol.y[1]
    if sol.t_events[0].size:
        t_ev = float(sol.t_events[0][0])
        y_ev = sol.y_events[0][0]
        gap = abs(complex(y_ev[0], y_ev[1]) - d(min(t_ev, d.t_end)))
        t_swallow = min(t_max, t_ev + 0.25 * gap * gap)
        return sol.t, traj, t_swallow
    return sol.t, traj, float(t_max)


def swallow_time_ode(driver_fn, x: float, t_max: float) -> float:
    """First hitting time of dh/dt = -2 / (h - V(t)), h(0) = x, onto V.

    driver_fn is any callable V with V(0) = 0.  Returns the hitting time,
    or +inf if the point survives to t_max.  Near the hit the gap obeys
    g*g' ~ -2, so the tail beyond the event threshold is g^2/4.
    """
    if x == 0:
        raise InputError("x = 0 is swallowed immediately")
    if abs(x) <= _EVENT_GAP:
        return 0.25 * x * x

    sign = 1.0 if x > 0 else -1.0

    def rhs(t, y):
        return [-2.0 / (y[0] - driver_fn(t))]

    def gap(t, y):
        return sign * (y[0] - driver_fn(t)) - _EVENT_GAP

    gap.terminal = True
    gap.direction = -1

    sol = solve_ivp(rhs, (0.0, t_max), [float(x)], method="RK45",
                    rtol=_RTOL, atol=_ATOL, events=gap)
    if sol.t_events[0].size:
        t_ev = float(sol.t_events[0][0])
        g = sign * (sol.y_events[0][0][0] - driver_fn(t_ev))
        return t_ev + 0.25 * g * g
    if not sol.success:
        # step-size underflow right at the singularity: report the bracket end
        return float(sol.t[-1])
    return np.inf


def reversed_driver(d: Driver, s0: float):
    """The reversed recentred driver W(t) = d(s0 - t) - d(s0) as a callable."""
    if s0 <= 0 or s0 > d.t_end + 1e-12:
        raise InputError("horizon must lie in (0, t_end]")
    base = d(s0)

    def W(t):
        return d(min(max(s0 - t, 0.0), d.t_end)) - base

    return W


def reverse_swallow_time(d: Driver, s0: float, x: float) -> float:
    """Swallow time T(x) of the reversed flow at horizon s0 (inf if not swallowed).

    A real x with T(x) <= s0 is exactly a point of the swallowed interval I:
    its image under the centred map at time s0 lies in the hull.  Interval
    boundary points (T equal to s0 up to integration accuracy) count as
    swallowed.
    """
    slack = 1e-6 * s0 + 1e-12
    T = swallow_time_ode(reversed_driver(d, s0), x, s0 + slack)
    return T if T <= s0 + slack else np.inf


@dataclass
class SwallowReport:
    """Endpoints of the swallowed interval I at a horizon, with probe samples."""

    s0: float
    interval_left: float
    interval_right: float
    samples: list = field(default_factory=list)  # (x, T(x)) probe pairs

    @property
    def interval(self):
        return (self.interval_left, self.interval_right)


def swallowed_interval(d: Driver, s0: float, tol: float = 1e-5) -> SwallowReport:
    """Bisection for the largest |x| on each side of 0 with T(x) <= s0."""
    if s0 <= 0 or s0 > d.t_end + 1e-12:
        raise InputError("horizon must lie in (0, t_end]")
    W = reversed_driver(d, s0)
    sup_w = max(abs(W(t)) for t in np.linspace(0.0, s0, 65))
    samples = []

    def swallowed(x):
        T = swallow_time_ode(W, x, s0)
        samples.append((float(x), float(T)))
        return T <= s0

    def side(sign):
        lo = sign * min(1e-4 * np.sqrt(s0), 1e-4)
        if not swallowed(lo):
            return 0.0
        hi = sign * (2.0 * np.sqrt(s0) + 2.0 * sup_w + 0.5)
        for _ in range(8):
            if swallowed(hi):
                hi *= 2.0
            else:
                break
        while abs(hi - lo) > tol:
            mid = 0.5 * (lo + hi)
            if swallowed(mid):
                lo = mid
            else:
                hi = mid
        return 0.5 * (lo + hi)

    right = side(+1.0)
    left = side(-1.0)
    return SwallowReport(float(s0), float(left), float(right), samples)


def map_compare_bound(dt: float, y: float, driver_gap: float, c0: float | None = None) -> float:
    """Bound on |f1_t(z) - f2_t(z)| from the sup gap of the driving terms.

    The default form is gap * (sqrt(4*dt + y^2)/y - 1); passing c0 selects
    the alternative exponential form gap * (exp(c0*dt/y^2) - 1).
    """
    if y <= 0:
        raise InputError("y must be positive")
    if driver_gap < 0:
        raise InputError("driver gap must be nonnegative")
    if c0 is not None:
        return driver_gap * np.expm1(c0 * dt / (y * y))
    return driver_gap * (np.sqrt(4.0 * dt + y * y) / y - 1.0)


def calibrate_interval_constant(n_trials: int = 40, seed: int = 1234,
                                holder_bound: float = 3.0) -> float:
    """Largest c such that |x| <= c*sqrt(t) is always swallowed by time t.

    Stress test over drivers V with 1/2-Hoelder norm at most holder_bound
    and adversarial perturbations W with ||W - V|| <= c*sqrt(t).  Used once
    to freeze the module constant consumed by the boundary-touching check.
    """
    rng = np.random.default_rng(seed)
    horizons = [0.04, 0.25, 1.0]

    def families(c, t):
        # ramps keep W(0) = 0 as the comparison setup requires
        def ramp(s, sgn):
            return sgn * c * np.sqrt(t) * np.minimum(1.0, 4.0 * s / t)

        for sgn in (+1.0, -1.0):
            yield (lambda s: holder_bound * np.sqrt(s),
                   lambda s, sg=sgn: holder_bound * np.sqrt(s) + ramp(s, sg))
            yield (lambda s: -holder_bound * np.sqrt(s),
                   lambda s, sg=sgn: -holder_bound * np.sqrt(s) + ramp(s, sg))
        for _ in range(n_trials):
            m = 16
            incr = rng.standard_normal(m) * np.sqrt(t / m)
            vals = np.concatenate([[0.0], np.cumsum(incr)])
            knots = np.linspace(0.0, t, m + 1)
            ratios = np.abs(vals[1:] - vals[:-1]) / np.sqrt(np.diff(knots))
            scale = 0.95 * holder_bound / max(ratios.max(), 1e-12)
            vals = vals * min(scale, holder_bound)
            V = lambda s, k=knots, v=vals: np.interp(s, k, v)
            sgn = rng.choice([-1.0, 1.0])
            yield V, lambda s, V=V, sg=sgn: V(s) + ramp(s, sg)

    def passes(c):
        for t in horizons:
            for V, W in families(c, t):
                for x in (c * np.sqrt(t), -c * np.sqrt(t)):
                    if swallow_time_ode(W, x, t) > t:
                        return False
        return True

    c = 1.0
    while c > 1e-3 and not passes(c):
        c *= 0.9
    return c
