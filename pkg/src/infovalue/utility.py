"""Utility curves over the certain-equivalent (value) scale."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import CurveRangeError

# slope used to extend a tabulated curve beyond its outermost breakpoints
EXTENSION_SLOPE = 1e-12


class UtilityCurve:
    """Monotone non-decreasing map from value scale to utility.

    Subclasses accept scalars or numpy arrays in both directions.
    """

    kind: str = ""
    delta_property: bool = False

    def __call__(self, ce):
        raise NotImplementedError

    def inverse(self, u):
        raise NotImplementedError

    def to_dict(self) -> dict:
        return {"type": self.kind, "parameters": self._parameters()}

    def _parameters(self) -> dict:
        return {}


@dataclass(frozen=True)
class Linear(UtilityCurve):
    """Risk-neutral curve, u(ce) = ce."""

    kind = "linear"
    delta_property = True

    def __call__(self, ce):
        return ce * 1.0

    def inverse(self, u):
        return u * 1.0


@dataclass(frozen=True)
class Exponential(UtilityCurve):
    """Constant risk aversion: u(ce) = 1 - exp(-ce / risk_tolerance)."""

    risk_tolerance: float

    kind = "exponential"
    delta_property = True

    def __post_init__(self):
        if not (self.risk_tolerance > 0 and math.isfinite(self.risk_tolerance)):
            raise ValueError(f"risk_tolerance must be positive and finite, got {self.risk_tolerance}")

    def __call__(self, ce):
        return -np.expm1(-np.asarray(ce, dtype=float) / self.risk_tolerance)[()]

    def inverse(self, u):
        u = np.asarray(u, dtype=float)
        if np.any(u >= 1.0) or not np.all(np.isfinite(u)):
            raise CurveRangeError(f"utility {u} outside the range (-inf, 1) of the exponential curve")
        return (-self.risk_tolerance * np.log1p(-u))[()]

    def _parameters(self):
        return {"risk_tolerance": self.risk_tolerance}


@dataclass(frozen=True)
class TabulatedMonotone(UtilityCurve):
    """Piecewise-linear curve through assessed ``(ce, u)`` breakpoints.

    Outside the breakpoints the curve continues with a tiny positive slope so
    it stays strictly increasing, hence invertible, on the whole real line.
    """

    breakpoints: tuple[tuple[float, float], ...]

    kind = "tabulated"
    delta_property = False

    def __post_init__(self):
        pts = tuple((float(c), float(u)) for c, u in self.breakpoints)
        if len(pts) < 2:
            raise ValueError("a tabulated curve needs at least two breakpoints")
        arr = np.array(pts)
        if not np.all(np.isfinite(arr)):
            raise ValueError("breakpoints must be finite")
        if np.any(np.diff(arr[:, 0]) <= 0) or np.any(np.diff(arr[:, 1]) <= 0):
            raise ValueError("breakpoints must be strictly increasing in both ce and u")
        object.__setattr__(self, "breakpoints", pts)

    @property
    def _xs(self):
        return np.array([c for c, _ in self.breakpoints])

    @property
    def _ys(self):
        return np.array([u for _, u in self.breakpoints])

    def __call__(self, ce):
        xs, ys = self._xs, self._ys
        ce = np.asarray(ce, dtype=float)
        out = np.interp(ce, xs, ys)
        out = np.where(ce < xs[0], ys[0] + EXTENSION_SLOPE * (ce - xs[0]), out)
        out = np.where(ce > xs[-1], ys[-1] + EXTENSION_SLOPE * (ce - xs[-1]), out)
        return out[()]

    def inverse(self, u):
        xs, ys = self._xs, self._ys
        u = np.asarray(u, dtype=float)
        if not np.all(np.isfinite(u)):
            raise CurveRangeError(f"utility {u} is not finite")
        out = np.interp(u, ys, xs)
        out = np.where(u < ys[0], xs[0] + (u - ys[0]) / EXTENSION_SLOPE, out)
        out = np.where(u > ys[-1], xs[-1] + (u - ys[-1]) / EXTENSION_SLOPE, out)
        return out[()]

    def _parameters(self):
        return {"breakpoints": [list(p) for p in self.breakpoints]}


def satisfies_delta_property(curve: UtilityCurve) -> bool:
    """Whether shifting every outcome by d shifts the certain equivalent by d.

    Linear and exponential curves qualify. Tabulated curves are reported as
    not qualifying even when they happen to be linear.
    """
    return curve.delta_property


def curve_from_dict(data: dict) -> UtilityCurve:
    kind = data.get("type")
    params = data.get("parameters") or {}
    if kind == "linear":
        return Linear()
    if kind == "exponential":
        return Exponential(float(params["risk_tolerance"]))
    if kind == "tabulated":
        return TabulatedMonotone(tuple(tuple(p) for p in params["breakpoints"]))
    raise ValueError(f"unknown utility curve type {kind!r}")
