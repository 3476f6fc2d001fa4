"""Coherent-state teleportation through a two-mode Gaussian channel.

Protocol layout (three modes): ``0`` is the unknown input, ``1`` and ``2``
are the channel arms ``a`` (sender) and ``b`` (receiver).  The input and arm
``a`` meet on a 50/50 beam splitter; ``p`` is measured on the port leaving
along arm ``a`` (port 1) and ``q`` on the port leaving along the input
(port 2).  The receiver displaces arm ``b`` by ``gain * g`` with
``g = sqrt(2) (q2 - i p1)``.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .channel import ChannelMoments, state_from_moments
from .gaussian import (
    VACUUM_VARIANCE,
    GaussianState,
    _homodyne_moments,
    apply_beam_splitter,
    apply_displacement,
    apply_loss,
    coherent_state,
    displacement_via_beam_splitter,
    gaussian_overlap_fidelity,
    homodyne_sample,
    log_overlap,
    tensor,
)

IN, A, B = 0, 1, 2
P_ANGLE, Q_ANGLE = math.pi / 2, 0.0
MIN_SAMPLES = 1000
CHUNK_SIZE = 8192


class UnphysicalMomentsError(ValueError):
    pass


@dataclass(frozen=True)
class ProtocolConfig:
    """Receiver gain plus the two imperfections that fold into the channel.

    ``sender_transmittance`` puts a beam splitter in front of both homodyne
    detectors; ``displacement_transmittance`` < 1 performs the receiver's
    displacement by mixing with a strong coherent drive.
    """

    gain: float = 1.0
    sender_transmittance: float = 1.0
    displacement_transmittance: float = 1.0

    def __post_init__(self):
        if not (math.isfinite(self.gain) and self.gain >= 0):
            raise ValueError(f"gain must be a finite non-negative number, got {self.gain}")
        for name in ("sender_transmittance", "displacement_transmittance"):
            value = getattr(self, name)
            if not 0.0 < value <= 1.0:
                raise ValueError(f"{name} must lie in (0, 1], got {value}")


@dataclass(frozen=True)
class FidelityReport:
    analytic: float
    mc_estimate: float
    mc_stderr: float
    n_samples: int
    seed: int


def analytic_average_fidelity(moments: ChannelMoments) -> float:
    """Unit-gain average fidelity over coherent inputs:
    ``1 / (1 + (m_a + m_b)/2 - sqrt(c_a c_b))``."""
    denom = 1.0 + 0.5 * (moments.m_a + moments.m_b) - moments.c
    if not denom > 0:
        raise UnphysicalMomentsError(f"non-positive fidelity denominator {denom}")
    return 1.0 / denom


def average_output_state(moments: ChannelMoments, alpha: complex, gain: float = 1.0) -> GaussianState:
    """Outcome-averaged teleported state at unit gain.

    The input comes out with mean ``alpha`` and isotropic added noise
    ``(m_a + m_b - 2 sqrt(c_a c_b)) / 4`` per quadrature.
    """
    if gain != 1.0:
        raise ValueError("closed form only covers unit gain; use fidelity_for_gain or mc_fidelity")
    var = VACUUM_VARIANCE * (1.0 + moments.m_a + moments.m_b - 2.0 * moments.c)
    return GaussianState([complex(alpha).real, complex(alpha).imag], var * np.eye(2))


def _sender_side(channel: GaussianState, alpha: complex, config: ProtocolConfig) -> GaussianState:
    """Input x channel after detector losses and the 50/50 beam splitter."""
    if channel.n_modes != 2:
        raise ValueError("channel must be a two-mode state")
    state = tensor(coherent_state(alpha), channel)
    if config.sender_transmittance < 1.0:
        loss = 1.0 - config.sender_transmittance
        state = apply_loss(state, IN, loss)
        state = apply_loss(state, A, loss)
    # port A carries (a - in)/sqrt2, port IN carries (a + in)/sqrt2
    return apply_beam_splitter(state, A, IN, 0.5)


def _receiver_output(state: GaussianState, config: ProtocolConfig) -> GaussianState:
    """Outcome-averaged output: x_b plus gain times the measured record."""
    if config.displacement_transmittance < 1.0:
        state = apply_loss(state, B, 1.0 - config.displacement_transmittance)
    lam = config.gain * math.sqrt(2.0)
    # rows: q_out = q_b + lam * q(port IN); p_out = p_b - lam * p(port A)
    L = np.zeros((2, 6))
    L[0, 4], L[0, 0] = 1.0, lam
    L[1, 5], L[1, 3] = 1.0, -lam
    return GaussianState(L @ state.mean, L @ state.cov @ L.T)


def protocol_output_state(channel: GaussianState, alpha: complex, config: ProtocolConfig) -> GaussianState:
    """Teleported state averaged over all measurement outcomes."""
    return _receiver_output(_sender_side(channel, alpha, config), config)


def protocol_log_fidelity(channel: GaussianState, alpha: complex, config: ProtocolConfig) -> float:
    return log_overlap(coherent_state(alpha), protocol_output_state(channel, alpha, config))


def protocol_fidelity(channel: GaussianState, alpha: complex, config: ProtocolConfig) -> float:
    return math.exp(protocol_log_fidelity(channel, alpha, config))


def fidelity_for_gain(
    moments: ChannelMoments,
    alpha: complex,
    gain: float,
    sender_transmittance: float = 1.0,
    displacement_transmittance: float = 1.0,
) -> float:
    """Fidelity for input ``alpha`` averaged over outcomes, with ``g' = gain * g``.

    Fidelity is linear in the output state, so the outcome average equals
    the overlap with the outcome-averaged output, a Gaussian computed exactly.
    """
    config = ProtocolConfig(gain, sender_transmittance, displacement_transmittance)
    return protocol_fidelity(state_from_moments(moments), alpha, config)


def lossy_sender_fidelity(s: float, T_a: float) -> float:
    """Best fidelity with detector transmittance ``T_a`` at the sender, gain ``1/sqrt(T_a)``."""
    if not 0.0 < T_a <= 1.0:
        raise ValueError(f"T_a must lie in (0, 1], got {T_a}")
    if s < 0:
        raise ValueError("s must be non-negative")
    return 1.0 / (math.exp(-2.0 * s) + 1.0 / T_a)


def teleport_coherent_once(channel: GaussianState, alpha: complex, config: ProtocolConfig, rng: np.random.Generator):
    """Run the protocol once; returns ``(g, output_state)``.

    Draws two standard normals from ``rng``: the ``p`` outcome, then ``q``.
    """
    state = _sender_side(channel, alpha, config)
    p1, state = homodyne_sample(state, A, P_ANGLE, rng)  # modes left: IN, B
    q2, state = homodyne_sample(state, 0, Q_ANGLE, rng)  # mode left: B
    g = math.sqrt(2.0) * complex(q2, -p1)
    beta = config.gain * g
    if config.displacement_transmittance < 1.0:
        out = displacement_via_beam_splitter(state, 0, beta, config.displacement_transmittance)
    else:
        out = apply_displacement(state, 0, beta)
    return g, out


def _chunk_rng(seed: int, chunk: int) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(seed, spawn_key=(chunk,))))


class _BatchProtocol:
    """Vectorized ``teleport_coherent_once``.

    Conditional covariances do not depend on outcomes, so each run differs
    only in its output mean, which is affine in the two normal draws.
    """

    def __init__(self, channel: GaussianState, alpha: complex, config: ProtocolConfig):
        state = _sender_side(channel, alpha, config)
        mu1, var1, rest1, k1, cov1 = _homodyne_moments(state, A, P_ANGLE)
        mean1 = state.mean[rest1]
        after1 = GaussianState(mean1, cov1)  # means replaced per run below
        mu2, var2, _, k2, cov2 = _homodyne_moments(after1, 0, Q_ANGLE)
        self.alpha = np.array([complex(alpha).real, complex(alpha).imag])
        self.sd1, self.sd2 = math.sqrt(var1), math.sqrt(var2)
        self.mu1, self.k1, self.mean1 = mu1, k1, mean1
        self.k2 = k2
        self.config = config
        T = config.displacement_transmittance
        out_cov = T * cov2 + (1.0 - T) * VACUUM_VARIANCE * np.eye(2)
        sigma = out_cov + VACUUM_VARIANCE * np.eye(2)
        self.sigma_inv = np.linalg.inv(sigma)
        self.prefactor = 1.0 / (2.0 * math.sqrt(np.linalg.det(sigma)))

    def fidelities(self, z: np.ndarray) -> np.ndarray:
        p1 = self.mu1 + self.sd1 * z[:, 0]
        m1 = self.mean1 + np.outer(p1 - self.mu1, self.k1)  # (IN q, IN p, B q, B p)
        mu2 = m1[:, 0]
        q2 = mu2 + self.sd2 * z[:, 1]
        mb = m1[:, 2:] + np.outer(q2 - mu2, self.k2)
        lam = self.config.gain * math.sqrt(2.0)
        t = math.sqrt(self.config.displacement_transmittance)
        out = t * mb + lam * np.column_stack([q2, -p1])
        d = out - self.alpha
        quad = np.einsum("ni,ij,nj->n", d, self.sigma_inv, d)
        return self.prefactor * np.exp(-0.5 * quad)


def mc_fidelity(
    channel: GaussianState,
    alpha: complex,
    config: ProtocolConfig,
    n_samples: int,
    seed: int,
    workers: int = 1,
) -> FidelityReport:
    """Monte-Carlo estimate of the outcome-averaged fidelity.

    Samples are grouped in fixed chunks of ``CHUNK_SIZE``; chunk ``k`` draws
    from a stream keyed by ``(seed, k)``, so sample ``i`` always sees the
    same randomness however many workers run.  The mean is an exactly
    rounded sum, independent of evaluation order.
    """
    if n_samples < MIN_SAMPLES:
        raise ValueError(f"n_samples must be at least {MIN_SAMPLES}")
    batch = _BatchProtocol(channel, alpha, config)
    n_chunks = -(-n_samples // CHUNK_SIZE)

    def run(k: int) -> np.ndarray:
        size = min(CHUNK_SIZE, n_samples - k * CHUNK_SIZE)
        return batch.fidelities(_chunk_rng(seed, k).standard_normal((size, 2)))

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(run, range(n_chunks)))
    else:
        parts = [run(k) for k in range(n_chunks)]
    values = np.concatenate(parts)
    mean = math.fsum(values) / n_samples
    var = math.fsum((values - mean) ** 2) / (n_samples - 1)
    return FidelityReport(
        analytic=protocol_fidelity(channel, alpha, config),
        mc_estimate=mean,
        mc_stderr=math.sqrt(var / n_samples),
        n_samples=n_samples,
        seed=seed,
    )


def single_run_fidelity(channel: GaussianState, alpha: complex, config: ProtocolConfig, rng) -> float:
    _, out = teleport_coherent_once(channel, alpha, config, rng)
    return gaussian_overlap_fidelity(coherent_state(alpha), out)
