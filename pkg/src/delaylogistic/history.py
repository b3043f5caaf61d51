"""Dense, continuously evaluable trajectories.

A :class:`DenseSolution` owns the prescribed initial history on
``[t_start - tau_max, t_start]`` plus every completed integration step, stored
as knots ``(t_k, y_k, y'_k)``.  Between knots the trajectory is the cubic
Hermite interpolant; before ``t_start`` it is the (piecewise-linear) history.
Delayed lookups made by the integrator go through this one object.
"""
from __future__ import annotations

import bisect
import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import DomainError

__all__ = ["InitialHistory", "Segment", "DenseSolution"]


def _as_state(value) -> tuple[float, ...]:
    if np.isscalar(value):
        return (float(value),)
    return tuple(float(v) for v in value)


class InitialHistory:
    """Initial data on ``[-tau_max, 0]``: a constant or piecewise-linear samples."""

    def __init__(self, kind: str, tau_max: float, constant_value=None,
                 times: Sequence[float] | None = None, values=None):
        if kind not in ("constant", "sampled"):
            raise ValueError(f"unknown history kind {kind!r}")
        if not (tau_max >= 0 and math.isfinite(tau_max)):
            raise ValueError(f"tau_max must be finite and >= 0, got {tau_max!r}")
        self.kind = kind
        self.tau_max = float(tau_max)
        if kind == "constant":
            self.constant_value = _as_state(constant_value)
            if any(v < 0 or not math.isfinite(v) for v in self.constant_value):
                raise ValueError("history values must be finite and >= 0")
            self.times = (-self.tau_max, 0.0) if self.tau_max > 0 else (0.0,)
            self.values = tuple(self.constant_value for _ in self.times)
        else:
            ts = [float(t) for t in times]
            vs = [_as_state(v) for v in values]
            if len(ts) != len(vs) or not ts:
                raise ValueError("times and values must be non-empty and equally long")
            if any(b <= a for a, b in zip(ts, ts[1:])):
                raise ValueError("sample times must be strictly increasing")
            if ts[-1] != 0.0 or abs(ts[0] + self.tau_max) > 1e-12 * max(1.0, self.tau_max):
                raise ValueError(
                    f"samples must cover [-tau_max, 0] = [{-self.tau_max}, 0] exactly, "
                    f"got [{ts[0]}, {ts[-1]}]")
            if len({len(v) for v in vs}) != 1:
                raise ValueError("all samples must have the same dimension")
            if any(c < 0 or not math.isfinite(c) for v in vs for c in v):
                raise ValueError("history values must be finite and >= 0")
            ts[0] = -self.tau_max
            self.constant_value = None
            self.times = tuple(ts)
            self.values = tuple(vs)
        self.dim = len(self.values[0])

    @classmethod
    def constant(cls, value, tau_max: float) -> "InitialHistory":
        return cls("constant", tau_max, constant_value=value)

    @classmethod
    def sampled(cls, times, values) -> "InitialHistory":
        times = list(times)
        return cls("sampled", -float(times[0]), times=times, values=values)

    def __repr__(self):
        if self.kind == "constant":
            return f"InitialHistory.constant({self.constant_value}, tau_max={self.tau_max})"
        return f"InitialHistory.sampled(<{len(self.times)} samples on [{-self.tau_max}, 0]>)"

    def _check(self, s):
        if not (-self.tau_max <= s <= 0.0):
            raise DomainError(s, -self.tau_max, 0.0)

    def value(self, s: float) -> tuple[float, ...]:
        """History at relative time ``s`` in ``[-tau_max, 0]``."""
        self._check(s)
        if self.kind == "constant":
            return self.constant_value
        ts, vs = self.times, self.values
        i = bisect.bisect_right(ts, s) - 1
        if i >= len(ts) - 1:
            return vs[-1]
        a, b = ts[i], ts[i + 1]
        w = (s - a) / (b - a)
        return tuple(u + w * (v - u) for u, v in zip(vs[i], vs[i + 1]))

    def _primitive(self, s: float) -> tuple[float, ...]:
        # exact integral of the piecewise-linear history from -tau_max to s
        if self.kind == "constant":
            return tuple(c * (s + self.tau_max) for c in self.constant_value)
        ts, vs = self.times, self.values
        acc = [0.0] * self.dim
        for k in range(len(ts) - 1):
            a, b = ts[k], ts[k + 1]
            if s <= a:
                break
            hi = min(s, b)
            w = (hi - a) / (b - a)
            for j in range(self.dim):
                ya, yb = vs[k][j], vs[k + 1][j]
                acc[j] += (hi - a) * (ya + 0.5 * w * (yb - ya))
        return tuple(acc)

    def integral(self, a: float, b: float) -> tuple[float, ...]:
        """Exact integral of each component over ``[a, b]`` (relative times)."""
        self._check(a)
        self._check(b)
        pa, pb = self._primitive(a), self._primitive(b)
        return tuple(y - x for x, y in zip(pa, pb))


@dataclass(frozen=True)
class Segment:
    a: float
    b: float
    y0: tuple
    y1: tuple
    d0: tuple
    d1: tuple

    def coefficients(self) -> np.ndarray:
        """Monomial coefficients ``c0 + c1*th + c2*th**2 + c3*th**3`` per component, ``th = (t-a)/(b-a)``."""
        h = self.b - self.a
        y0, y1 = np.array(self.y0), np.array(self.y1)
        m0, m1 = h * np.array(self.d0), h * np.array(self.d1)
        return np.stack([y0, m0, 3 * (y1 - y0) - 2 * m0 - m1, 2 * (y0 - y1) + m0 + m1])


# Antiderivatives of the cubic Hermite basis on [0, th].
def _hermite_primitives(th):
    t2 = th * th
    t3 = t2 * th
    t4 = t3 * th
    return (th - t3 + 0.5 * t4,
            0.5 * t2 - 2.0 * t3 / 3.0 + 0.25 * t4,
            t3 - 0.5 * t4,
            -t3 / 3.0 + 0.25 * t4)


class DenseSolution:
    """Piecewise-cubic Hermite trajectory with its initial history attached.

    Knot states hold ``dim`` population components followed by ``n_aux``
    auxiliary components (the running window integrals).  The auxiliary
    channel has no history; querying it before ``t_start`` is a domain error.
    """

    def __init__(self, history: InitialHistory, t_start: float = 0.0, n_aux: int = 0):
        self.history = history
        self.t_start = float(t_start)
        self.dim = history.dim
        self.n_aux = int(n_aux)
        self._t: list[float] = []
        self._y: list[tuple] = []
        self._d: list[tuple] = []
        self._cum: list[tuple] = []

    # -- construction ---------------------------------------------------------
    def append(self, t: float, y, dy) -> None:
        """Add a knot; the first knot must sit at ``t_start``."""
        y, dy = _as_state(y), _as_state(dy)
        width = self.dim + self.n_aux
        if len(y) != width or len(dy) != width:
            raise ValueError(f"knot must have {width} components")
        if not math.isfinite(float(t)):
            raise ValueError("knot time must be finite")
        self._push(float(t), y, dy)

    def _push(self, t: float, y: tuple, dy: tuple) -> None:
        # unchecked append of float tuples; used by the integrator
        width = self.dim + self.n_aux
        if not self._t:
            if t != self.t_start:
                raise ValueError("first knot must be at t_start")
            self._cum.append((0.0,) * width)
        else:
            a = self._t[-1]
            h = t - a
            if not h > 0:
                raise ValueError(f"degenerate or backward segment [{a}, {t}]")
            y0, d0 = self._y[-1], self._d[-1]
            prev = self._cum[-1]
            hh = h * h / 12.0
            self._cum.append(tuple(c + 0.5 * h * (u + v) + hh * (p - q)
                                   for c, u, v, p, q in zip(prev, y0, y, d0, dy)))
        self._t.append(t)
        self._y.append(y)
        self._d.append(dy)

    # -- inspection -----------------------------------------------------------
    @property
    def t_end(self) -> float:
        return self._t[-1] if self._t else self.t_start

    @property
    def t_min(self) -> float:
        return self.t_start - self.history.tau_max

    @property
    def knot_times(self) -> np.ndarray:
        return np.array(self._t)

    @property
    def knot_states(self) -> np.ndarray:
        """Knot values, shape ``(n_knots, dim + n_aux)``."""
        return np.array(self._y).reshape(len(self._y), self.dim + self.n_aux)

    @property
    def knot_derivatives(self) -> np.ndarray:
        return np.array(self._d).reshape(len(self._d), self.dim + self.n_aux)

    @property
    def segments(self) -> list[Segment]:
        t, y, d = self._t, self._y, self._d
        return [Segment(t[k], t[k + 1], y[k], y[k + 1], d[k], d[k + 1])
                for k in range(len(t) - 1)]

    def __len__(self):
        return max(len(self._t) - 1, 0)

    # -- evaluation -----------------------------------------------------------
    def _full(self, t: float) -> tuple:
        # knot-stored channel (population + aux) for t >= t_start
        ts = self._t
        k = bisect.bisect_right(ts, t) - 1
        if k < 0 or t > ts[-1]:
            raise DomainError(t, self.t_start, self.t_end)
        if ts[k] == t:
            return self._y[k]
        a, b = ts[k], ts[k + 1]
        h = b - a
        th = (t - a) / h
        s = 1.0 - th
        h00 = (1.0 + 2.0 * th) * s * s
        h10 = th * s * s * h
        h01 = th * th * (3.0 - 2.0 * th)
        h11 = -th * th * s * h
        return tuple(h00 * y0 + h10 * d0 + h01 * y1 + h11 * d1
                     for y0, d0, y1, d1 in zip(self._y[k], self._d[k], self._y[k + 1], self._d[k + 1]))

    def value(self, t: float) -> tuple:
        """Population state at ``t`` as a tuple (fast path for the integrator)."""
        if t < self.t_start:
            if t < self.t_min:
                raise DomainError(t, self.t_min, self.t_end)
            return self.history.value(t - self.t_start)
        if not self._t:
            raise DomainError(t, self.t_min, self.t_start)
        y = self._full(t)
        return y[:self.dim] if self.n_aux else y

    def eval(self, t: float) -> np.ndarray:
        """Population state at ``t``; history before ``t_start``, Hermite cubic after."""
        return np.array(self.value(float(t)))

    def eval_aux(self, t: float) -> np.ndarray:
        """Auxiliary (window-integral) components at ``t >= t_start``."""
        if not self.n_aux:
            raise ValueError("solution carries no auxiliary components")
        t = float(t)
        if t < self.t_start or not self._t:
            raise DomainError(t, self.t_start, self.t_end)
        return np.array(self._full(t)[self.dim:])

    def sample(self, times) -> np.ndarray:
        """Population states at several times, shape ``(len(times), dim)``."""
        return np.array([self.value(float(t)) for t in times]).reshape(-1, self.dim)

    # -- integration ----------------------------------------------------------
    def _primitive(self, t: float) -> tuple:
        # integral of the stored channel from t_start to t
        ts = self._t
        k = bisect.bisect_right(ts, t) - 1
        if k < 0 or t > ts[-1]:
            raise DomainError(t, self.t_start, self.t_end)
        base = self._cum[k]
        if ts[k] == t:
            return base
        a, b = ts[k], ts[k + 1]
        h = b - a
        p00, p10, p01, p11 = _hermite_primitives((t - a) / h)
        return tuple(c + h * (p00 * y0 + h * p10 * d0 + p01 * y1 + h * p11 * d1)
                     for c, y0, d0, y1, d1 in zip(base, self._y[k], self._d[k],
                                                  self._y[k + 1], self._d[k + 1]))

    def _integral_components(self, a: float, b: float) -> tuple:
        for t in (a, b):
            if t < self.t_min or t > self.t_end:
                raise DomainError(t, self.t_min, self.t_end)
        if b < a:
            return tuple(-v for v in self._integral_components(b, a))
        acc = [0.0] * self.dim
        if a < self.t_start:
            hist = self.history.integral(a - self.t_start, min(b, self.t_start) - self.t_start)
            acc = [u + v for u, v in zip(acc, hist)]
        lo = max(a, self.t_start)
        if b > lo:
            pa, pb = self._primitive(lo), self._primitive(b)
            acc = [u + (y - x) for u, x, y in zip(acc, pa[:self.dim], pb[:self.dim])]
        return tuple(acc)

    def integral_over(self, a: float, b: float, weights=None) -> float:
        """Exact integral of ``weights . x`` over ``[a, b]``.

        ``weights`` defaults to all ones.  The Hermite pieces are integrated in
        closed form, the history part as a piecewise-linear function.
        """
        comps = self._integral_components(float(a), float(b))
        if weights is None:
            return math.fsum(comps)
        w = _as_state(weights)
        if len(w) != self.dim:
            raise ValueError(f"expected {self.dim} weights, got {len(w)}")
        return math.fsum(wi * c for wi, c in zip(w, comps))
