"""The asymmetrically decohered two-mode squeezed channel.

Mode ``a`` goes to the sender and mode ``b`` to the receiver.  Each arm is
coupled to its own thermal bath for a normalized interaction time ``R_i``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .gaussian import (
    VACUUM_VARIANCE,
    GaussianState,
    apply_loss,
    quadrature_form_variance,
    two_mode_squeezed_vacuum,
)

MODE_A, MODE_B = 0, 1
BISECTION_TOL = 1e-9


@dataclass(frozen=True)
class ChannelParams:
    s: float
    R_a: float = 0.0
    R_b: float = 0.0
    n_bar_a: float = 0.0
    n_bar_b: float = 0.0

    def __post_init__(self):
        for name in ("s", "R_a", "R_b", "n_bar_a", "n_bar_b"):
            value = getattr(self, name)
            if not math.isfinite(value):
                raise ValueError(f"{name} must be finite, got {value}")
        if self.s < 0:
            raise ValueError(f"s must be non-negative, got {self.s}")
        for name in ("R_a", "R_b"):
            if not 0.0 <= getattr(self, name) <= 1.0:
                raise ValueError(f"{name} must lie in [0, 1], got {getattr(self, name)}")
        for name in ("n_bar_a", "n_bar_b"):
            if getattr(self, name) < 0:
                raise ValueError(f"{name} must be non-negative, got {getattr(self, name)}")

    @property
    def T_a(self) -> float:
        return 1.0 - self.R_a

    @property
    def T_b(self) -> float:
        return 1.0 - self.R_b

    @property
    def t_a(self) -> float:
        return math.sqrt(self.T_a)

    @property
    def t_b(self) -> float:
        return math.sqrt(self.T_b)


@dataclass(frozen=True)
class ChannelMoments:
    """Dimensionless moments of the channel: ``m_i = 4 Var(q_i)`` and the
    correlation factors with ``sqrt(c_a c_b) = 4 |Cov(q_a, q_b)|``."""

    m_a: float
    m_b: float
    c_a: float
    c_b: float

    @property
    def c(self) -> float:
        return math.sqrt(self.c_a * self.c_b)

    @property
    def determinant(self) -> float:
        return self.m_a * self.m_b - self.c_a * self.c_b


@dataclass(frozen=True)
class SeparabilityVerdict:
    separable: bool
    margin: float


def normalized_interaction_time(kappa: float, tau: float) -> float:
    """``R = 1 - exp(-kappa tau)`` for coupling rate ``kappa`` and exposure ``tau``."""
    if kappa < 0 or tau < 0:
        raise ValueError("kappa and tau must be non-negative")
    return -math.expm1(-kappa * tau)


def channel_moments(params: ChannelParams) -> ChannelMoments:
    ch, sh = math.cosh(2 * params.s), math.sinh(2 * params.s)
    return ChannelMoments(
        m_a=params.R_a * (1 + 2 * params.n_bar_a) + params.T_a * ch,
        m_b=params.R_b * (1 + 2 * params.n_bar_b) + params.T_b * ch,
        c_a=params.T_a * sh,
        c_b=params.T_b * sh,
    )


def channel_state(params: ChannelParams) -> GaussianState:
    """Two-mode squeezed vacuum sent through the two thermal loss arms."""
    state = two_mode_squeezed_vacuum(params.s)
    state = apply_loss(state, MODE_A, params.R_a, params.n_bar_a)
    return apply_loss(state, MODE_B, params.R_b, params.n_bar_b)


def state_from_moments(moments: ChannelMoments) -> GaussianState:
    """Zero-mean two-mode state with the given moments.

    Only the product ``c_a c_b`` is recoverable from such a state.
    """
    z = np.diag([1.0, -1.0])
    eye = np.eye(2)
    c = moments.c
    cov = VACUUM_VARIANCE * np.block([[moments.m_a * eye, -c * z], [-c * z, moments.m_b * eye]])
    return GaussianState(np.zeros(4), cov)


def moments_from_state(state: GaussianState) -> tuple[float, float, float]:
    """Read ``(m_a, m_b, sqrt(c_a c_b))`` off a two-mode covariance."""
    if state.n_modes != 2:
        raise ValueError("expected a two-mode state")
    v = state.cov / VACUUM_VARIANCE
    return float(v[0, 0]), float(v[2, 2]), float(abs(v[0, 2]))


def separability_margin(moments: ChannelMoments) -> float:
    return (moments.m_a - 1) * (moments.m_b - 1) - moments.c_a * moments.c_b


def is_separable(moments: ChannelMoments) -> SeparabilityVerdict:
    margin = separability_margin(moments)
    return SeparabilityVerdict(separable=margin >= 0, margin=margin)


def separability_threshold(params: ChannelParams, closed_form: bool = True) -> float | None:
    """Smallest ``R_a`` in [0, 1] at which the channel becomes separable.

    ``params.R_a`` is ignored.  With a vacuum bath on arm ``b`` (and an
    entangled starting point) the answer is ``1 / (1 + n_bar_a)``; otherwise
    the margin, which is non-decreasing in ``R_a``, is bisected.
    Returns ``None`` if no ``R_a`` works.
    """

    def margin(r_a: float) -> float:
        p = ChannelParams(params.s, r_a, params.R_b, params.n_bar_a, params.n_bar_b)
        return separability_margin(channel_moments(p))

    if margin(0.0) >= 0:
        return 0.0
    if closed_form and params.n_bar_b == 0:
        return 1.0 / (1.0 + params.n_bar_a)
    if margin(1.0) < 0:
        return None
    lo, hi = 0.0, 1.0
    while hi - lo > BISECTION_TOL / 4:
        mid = 0.5 * (lo + hi)
        if margin(mid) >= 0:
            hi = mid
        else:
            lo = mid
    return hi


@dataclass(frozen=True)
class EPRVariances:
    """Variances of the scaled EPR combinations.

    ``q_sum = t_b q_a + t_a q_b`` and ``p_diff = t_b p_a - t_a p_b`` are the
    combinations pinned by strong squeezing; the other two are anti-squeezed.
    """

    q_sum: float
    p_diff: float
    q_diff: float
    p_sum: float


def epr_coefficients(params: ChannelParams) -> dict[str, np.ndarray]:
    ta, tb = params.t_a, params.t_b
    return {
        "q_sum": np.array([tb, 0.0, ta, 0.0]),
        "p_diff": np.array([0.0, tb, 0.0, -ta]),
        "q_diff": np.array([tb, 0.0, -ta, 0.0]),
        "p_sum": np.array([0.0, tb, 0.0, ta]),
    }


def epr_scaled_variances(params: ChannelParams) -> EPRVariances:
    state = channel_state(params)
    coeffs = epr_coefficients(params)
    return EPRVariances(**{k: quadrature_form_variance(state, v) for k, v in coeffs.items()})


def short_time_covariance(params: ChannelParams) -> np.ndarray:
    """Covariance implied by the short-time EPR form of the channel Wigner function.

    The exponent keeps the exact normalization ``m_a m_b - c_a c_b`` but drops
    the bath contributions from the quadratic form, which becomes
    ``e^{2s}(q_sum^2 + p_diff^2) + e^{-2s}(q_diff^2 + p_sum^2)`` up to units.
    Valid for ``R_i << T_i / n_bar_i``.
    """
    mom = channel_moments(params)
    ta, tb = params.t_a, params.t_b
    ch, sh = math.cosh(2 * params.s), math.sinh(2 * params.s)
    z = np.diag([1.0, -1.0])
    eye = np.eye(2)
    precision = (4.0 / mom.determinant) * np.block(
        [[tb**2 * ch * eye, ta * tb * sh * z], [ta * tb * sh * z, ta**2 * ch * eye]]
    )
    return np.linalg.inv(precision)
