"""Closed-form and numeric optima of the teleportation fidelity."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .channel import ChannelParams, channel_moments
from .gaussian import two_mode_squeezed_vacuum
from .teleport import ProtocolConfig, analytic_average_fidelity, protocol_log_fidelity

INV_PHI = (math.sqrt(5) - 1) / 2
DEFAULT_TOL = 1e-10
N_STARTS = 8
# Scalar gains only matter through |alpha|; a large ring makes any gain
# mismatch dominate the outcome noise, as it does for the full coherent ensemble.
GAIN_PROBE_AMPLITUDE = 1e4
GAIN_PROBES = tuple(GAIN_PROBE_AMPLITUDE * np.exp(1j * k * np.pi / 2) for k in range(4))


@dataclass(frozen=True)
class OptimumResult:
    """``argument`` is ``math.inf`` for the unbounded (monotone) case."""

    argument: float
    value: float
    method: str
    bracket: tuple[float, float] | None = None

    @property
    def unbounded(self) -> bool:
        return math.isinf(self.argument)


def _golden(f: Callable[[float], float], lo: float, hi: float, tol: float) -> tuple[float, float]:
    a, b = lo, hi
    c = b - INV_PHI * (b - a)
    d = a + INV_PHI * (b - a)
    fc, fd = f(c), f(d)
    while b - a > tol:
        if fc >= fd:
            b, d, fd = d, c, fc
            c = b - INV_PHI * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + INV_PHI * (b - a)
            fd = f(d)
    x = 0.5 * (a + b)
    candidates = [(f(x), x), (fc, c), (fd, d)]
    best = max(candidates, key=lambda t: (t[0], -t[1]))
    return best[1], best[0]


def maximize_scalar(
    f: Callable[[float], float], lo: float, hi: float, tol: float = DEFAULT_TOL
) -> tuple[float, float]:
    """Golden-section maximization of ``f`` on ``[lo, hi]``.

    A grid probe checks the bracket for unimodality first; if the interior
    looks non-unimodal the bracket is split into ``N_STARTS`` pieces, each is
    searched, and the best value wins (lowest argument on ties). The bracket
    endpoints are candidates too, so boundary maxima are returned exactly.
    """
    if not lo < hi:
        raise ValueError(f"need lo < hi, got [{lo}, {hi}]")
    xs = np.linspace(lo, hi, 2 * N_STARTS + 1)
    ys = np.array([f(x) for x in xs])
    rises = np.diff(ys)
    # unimodal on the grid: once it starts falling it never rises again
    falling = np.flatnonzero(rises < 0)
    unimodal = falling.size == 0 or not np.any(rises[falling[0] :] > 0)
    if unimodal:
        k = int(np.argmax(ys))
        results = [_golden(f, xs[max(k - 1, 0)], xs[min(k + 1, xs.size - 1)], tol)]
    else:
        edges = np.linspace(lo, hi, N_STARTS + 1)
        results = [_golden(f, edges[i], edges[i + 1], tol) for i in range(N_STARTS)]
    results += [(float(xs[0]), float(ys[0])), (float(xs[-1]), float(ys[-1]))]
    return max(results, key=lambda t: (t[1], -t[0]))


def _fidelity_vs_s(T_a: float, T_b: float, n_bar_a: float, n_bar_b: float) -> Callable[[float], float]:
    def f(s: float) -> float:
        return analytic_average_fidelity(channel_moments(ChannelParams(s, 1 - T_a, 1 - T_b, n_bar_a, n_bar_b)))

    return f


def optimal_squeezing(T_a: float, T_b: float, n_bar_a: float = 0.0, n_bar_b: float = 0.0) -> OptimumResult:
    """Squeezing maximizing the unit-gain fidelity: ``e^{-2s} = |t_a - t_b| / (t_a + t_b)``.

    The argmax does not depend on the bath temperatures; the value does.
    """
    for name, T in (("T_a", T_a), ("T_b", T_b)):
        if not 0.0 < T <= 1.0:
            raise ValueError(f"{name} must lie in (0, 1], got {T}")
    f = _fidelity_vs_s(T_a, T_b, n_bar_a, n_bar_b)
    ta, tb = math.sqrt(T_a), math.sqrt(T_b)
    if ta == tb:
        # the denominator decreases to (R_a(1+2n_a) + R_b(1+2n_b))/2 + 1 as s grows
        limit = 1.0 / (1.0 + 0.5 * ((1 - T_a) * (1 + 2 * n_bar_a) + (1 - T_b) * (1 + 2 * n_bar_b)))
        return OptimumResult(math.inf, limit, "closed-form")
    s_star = -0.5 * math.log(abs(ta - tb) / (ta + tb))
    return OptimumResult(s_star, f(s_star), "closed-form")


def numeric_optimal_squeezing(
    T_a: float, T_b: float, n_bar_a: float = 0.0, n_bar_b: float = 0.0, s_max: float = 10.0
) -> OptimumResult:
    f = _fidelity_vs_s(T_a, T_b, n_bar_a, n_bar_b)
    x, y = maximize_scalar(f, 0.0, s_max)
    return OptimumResult(x, y, "numeric", (0.0, s_max))


def _fidelity_vs_T_b(s: float, T_a: float, n_bar_a: float, n_bar_b: float) -> Callable[[float], float]:
    def f(T_b: float) -> float:
        return analytic_average_fidelity(channel_moments(ChannelParams(s, 1 - T_a, 1 - T_b, n_bar_a, n_bar_b)))

    return f


def optimal_receiver_transmittance(s: float, T_a: float, n_bar_a: float, n_bar_b: float = 0.0) -> OptimumResult:
    """Receiver-arm transmittance maximizing the fidelity with a vacuum bath on arm ``b``.

    Interior optimum ``T_b = coth^2(s) T_a`` with value
    ``1 / (1 + (1 + n_bar_a)(1 - T_a))``; when that exceeds 1 the optimum sits
    on the boundary and is located numerically.
    """
    if s <= 0:
        raise ValueError("s must be positive")
    if not 0.0 < T_a <= 1.0:
        raise ValueError(f"T_a must lie in (0, 1], got {T_a}")
    if n_bar_a < 0:
        raise ValueError("n_bar_a must be non-negative")
    if n_bar_b != 0:
        raise ValueError("the receiver-transmittance optimum assumes a vacuum bath on arm b")
    T_b = T_a / math.tanh(s) ** 2
    if T_b <= 1.0:
        return OptimumResult(T_b, 1.0 / (1.0 + (1.0 + n_bar_a) * (1.0 - T_a)), "closed-form")
    x, y = maximize_scalar(_fidelity_vs_T_b(s, T_a, n_bar_a, n_bar_b), 0.0, 1.0)
    return OptimumResult(x, y, "numeric", (0.0, 1.0))


def numeric_optimal_receiver_transmittance(s: float, T_a: float, n_bar_a: float) -> OptimumResult:
    x, y = maximize_scalar(_fidelity_vs_T_b(s, T_a, n_bar_a, 0.0), 0.0, 1.0)
    return OptimumResult(x, y, "numeric", (0.0, 1.0))


def optimal_gain(s: float, T_a: float, lo: float = 0.0, hi: float = 4.0) -> OptimumResult:
    """Feed-forward gain maximizing the fidelity with detector loss ``T_a`` at the sender.

    The channel is a pure two-mode squeezed vacuum.  The objective is the
    log of the mean fidelity over a ring of large-amplitude probe inputs.
    """
    if not 0.0 < T_a <= 1.0:
        raise ValueError(f"T_a must lie in (0, 1], got {T_a}")
    if s < 0:
        raise ValueError("s must be non-negative")
    channel = two_mode_squeezed_vacuum(s)

    def objective(gain: float) -> float:
        config = ProtocolConfig(gain=gain, sender_transmittance=T_a)
        logs = np.array([protocol_log_fidelity(channel, a, config) for a in GAIN_PROBES])
        top = logs.max()
        return float(top + math.log(np.mean(np.exp(logs - top))))

    x, y = maximize_scalar(objective, lo, hi)
    return OptimumResult(x, math.exp(y), "numeric", (lo, hi))
