"""Profile curves of rotational CMC surfaces in M^2(c) x R.

A rotational surface is generated by a curve ``s -> (rho(s), t(s))`` in the
orbit space, ``rho`` being the distance to the rotation axis in the factor
M^2(c) and ``s`` the arc length.  With ``sigma`` the angle of the profile
against the horizontal, constant mean curvature ``H`` reads::

    rho' = cos(sigma),  t' = sin(sigma),  sigma' = 2H - sin(sigma) ct(rho)

where ``ct = cot`` for ``c = +1`` and ``coth`` for ``c = -1``.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import solve_ivp

from . import jets
from .jets import Jet

AXIS_EPS = 1e-4
MAX_RK4_STEP = 1e-3


class ProfileError(RuntimeError):
    pass


def _ct(rho, c):
    return 1.0 / np.tan(rho) if c == 1 else 1.0 / np.tanh(rho)


def rhs(state, c, H):
    rho, _, sigma = state
    return np.array([np.cos(sigma), np.sin(sigma), 2.0 * H - np.sin(sigma) * _ct(rho, c)])


def _rk4_step(y, h, c, H):
    k1 = rhs(y, c, H)
    k2 = rhs(y + 0.5 * h * k1, c, H)
    k3 = rhs(y + 0.5 * h * k2, c, H)
    k4 = rhs(y + h * k3, c, H)
    return y + h / 6.0 * (k1 + 2 * k2 + 2 * k3 + k4)


def rk4_march(y0, s0, s1, c, H, max_step=MAX_RK4_STEP):
    """Classical fixed-step RK4 from ``s0`` to ``s1`` (either direction)."""
    span = s1 - s0
    if span == 0:
        return np.array(y0, dtype=float)
    n = max(1, int(np.ceil(abs(span) / max_step)))
    h = span / n
    y = np.array(y0, dtype=float)
    for _ in range(n):
        y = _rk4_step(y, h, c, H)
    return y


@dataclass
class ProfileCurve:
    """A profile known exactly at one reference state; other states by RK4 marching."""

    c: int
    H: float
    s_ref: float
    state_ref: np.ndarray
    length: float | None = None
    closure_state: np.ndarray | None = None
    _cache: dict = field(default_factory=dict, repr=False)

    def states(self, s) -> np.ndarray:
        """Profile states ``(rho, t, sigma)`` at arc lengths ``s`` (any shape)."""
        s = np.asarray(s, dtype=float)
        uniq = np.unique(s)
        out = {}
        for direction in (1, -1):
            pts = uniq[uniq >= self.s_ref] if direction == 1 else uniq[uniq < self.s_ref][::-1]
            y, s_prev = self.state_ref, self.s_ref
            for sv in pts:
                key = float(sv)
                if key in self._cache:
                    y = self._cache[key]
                else:
                    y = rk4_march(y, s_prev, sv, self.c, self.H)
                    self._cache[key] = y
                out[key] = y
                s_prev = sv
        flat = np.array([out[float(v)] for v in s.ravel()])
        return flat.reshape(s.shape + (3,))

    def local_jets(self, xj: Jet) -> tuple[Jet, Jet, Jet]:
        """Jets of ``rho, t, sigma`` in the arc-length parameter carried by ``xj``.

        Taylor coefficients come from Picard iteration of the ODE on jets, so
        they are exact for the trajectory through each node state.
        """
        state = self.states(xj.value)
        k = xj.order
        y = [Jet.constant(state[..., i], k) for i in range(3)]
        for _ in range(k + 1):
            rho, _t, sigma = y
            ct = jets.cot(rho) if self.c == 1 else jets.coth(rho)
            f = [jets.cos(sigma), jets.sin(sigma), 2.0 * self.H - jets.sin(sigma) * ct]
            y = [fi.integrate_x(state[..., i]) for i, fi in enumerate(f)]
        return tuple(comp.compose(xj) for comp in y)

    def chart_map(self):
        """Rotational immersion ``(s, theta) -> (u, v, t)`` in the conformal chart."""
        c = self.c

        def F(xj, yj):
            rho, t, _ = self.local_jets(xj)
            r = jets.tan(0.5 * rho) if c == 1 else jets.tanh(0.5 * rho)
            return r * jets.cos(yj), r * jets.sin(yj), t

        return F

    def table(self, n: int = 65) -> list[list[float]]:
        """Sampled ``(s, rho, t, sigma)`` rows over the known extent."""
        if self.length is None:
            raise ProfileError("profile has no closed extent to tabulate")
        lo, hi = 0.02 * self.length, 0.98 * self.length
        s = np.linspace(lo, hi, n)
        st = self.states(s)
        return [[float(a), *map(float, b)] for a, b in zip(s, st)]


def sphere_profile(c: int, H: float, eps: float = AXIS_EPS, rtol: float = 1e-10,
                   atol: float = 1e-12, max_length: float = 100.0) -> ProfileCurve:
    """Shoot the Hsiang-Pedrosa profile from the axis until it returns to it.

    Near the axis ``sigma ~ H rho`` and ``t ~ H rho^2 / 2``; integration starts
    at ``rho = eps`` and stops when ``rho`` falls back below ``eps``.
    """
    if H <= 0 or (c == -1 and H <= 0.5):
        raise ValueError("rotational CMC spheres need H > 0 (c=+1) or H > 1/2 (c=-1)")
    y0 = np.array([eps, 0.5 * H * eps**2, H * eps])

    def back_at_axis(s, y):
        return y[0] - eps

    back_at_axis.terminal = True
    back_at_axis.direction = -1

    sol = solve_ivp(
        lambda s, y: rhs(y, c, H),
        (eps, max_length),
        y0,
        method="RK45",
        rtol=rtol,
        atol=atol,
        events=back_at_axis,
    )
    if sol.status == -1:
        raise ProfileError(f"integration failed: {sol.message}; final state {sol.y[:, -1]}")
    if sol.status != 1 or len(sol.t_events[0]) == 0:
        raise ProfileError(f"profile did not close within arc length {max_length}; final state {sol.y[:, -1]}")
    length = float(sol.t_events[0][0])
    # Reference state at mid-length, away from the stiff axis regions; grid
    # nodes are reached from here by fixed-step RK4.
    mid = solve_ivp(lambda s, y: rhs(y, c, H), (eps, 0.5 * length), y0, method="RK45", rtol=rtol, atol=atol)
    return ProfileCurve(
        c=c,
        H=H,
        s_ref=0.5 * length,
        state_ref=mid.y[:, -1].copy(),
        length=length,
        closure_state=np.asarray(sol.y_events[0][0]),
    )


def neck_profile(c: int, H: float, neck_radius: float) -> ProfileCurve:
    """Rotational CMC profile through a vertical tangent at distance ``neck_radius``."""
    if neck_radius <= 0:
        raise ValueError("neck radius must be positive")
    return ProfileCurve(c=c, H=H, s_ref=0.0, state_ref=np.array([neck_radius, 0.0, 0.5 * np.pi]))
