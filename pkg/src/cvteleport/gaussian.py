"""Phase-space algebra for multimode Gaussian states.

Conventions
-----------
A mode amplitude is ``alpha = q + 1j * p``.  The vacuum has quadrature
variance 1/4, so ``W_vac(alpha) = (2/pi) exp(-2 |alpha|^2)``.  Phase-space
vectors are ordered ``(q1, p1, q2, p2, ...)`` and the symplectic form is
block diagonal with 2x2 blocks ``[[0, 1], [-1, 0]]``.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

VACUUM_VARIANCE = 0.25
SYMMETRY_TOL = 1e-12
UNCERTAINTY_TOL = 1e-10


class DegenerateMeasurementError(ValueError):
    """Raised when a homodyne marginal has zero variance."""


def symplectic_form(n_modes: int) -> np.ndarray:
    return np.kron(np.eye(n_modes), np.array([[0.0, 1.0], [-1.0, 0.0]]))


@dataclass(frozen=True, eq=False)
class GaussianState:
    """An n-mode Gaussian Wigner function given by its first two moments.

    ``mean`` has length ``2n`` and ``cov`` is the symmetric ``2n x 2n``
    covariance matrix in the ``(q1, p1, ..., qn, pn)`` ordering.
    """

    mean: np.ndarray
    cov: np.ndarray

    def __post_init__(self):
        mean = np.array(self.mean, dtype=float).reshape(-1)
        cov = np.array(self.cov, dtype=float)
        if mean.size == 0 or mean.size % 2:
            raise ValueError("mean must have even, non-zero length")
        if cov.shape != (mean.size, mean.size):
            raise ValueError(f"cov shape {cov.shape} does not match mean length {mean.size}")
        if not (np.all(np.isfinite(mean)) and np.all(np.isfinite(cov))):
            raise ValueError("state moments must be finite")
        scale = max(1.0, float(np.max(np.abs(cov))))
        if np.max(np.abs(cov - cov.T)) > SYMMETRY_TOL * scale:
            raise ValueError("cov is not symmetric")
        cov = 0.5 * (cov + cov.T)
        mean.setflags(write=False)
        cov.setflags(write=False)
        object.__setattr__(self, "mean", mean)
        object.__setattr__(self, "cov", cov)

    @property
    def n_modes(self) -> int:
        return self.mean.size // 2

    def purity(self) -> float:
        return float(1.0 / (4.0**self.n_modes * np.sqrt(np.linalg.det(self.cov))))

    def symplectic_eigenvalues(self) -> np.ndarray:
        """Williamson spectrum, sorted ascending (each value listed once)."""
        omega = symplectic_form(self.n_modes)
        ev = np.abs(np.linalg.eigvals(1j * omega @ self.cov))
        return np.sort(ev)[::2]

    def is_physical(self, tol: float = UNCERTAINTY_TOL) -> bool:
        return bool(np.all(self.symplectic_eigenvalues() >= VACUUM_VARIANCE - tol))

    def mode_indices(self, mode: int) -> list[int]:
        _check_mode(self, mode)
        return [2 * mode, 2 * mode + 1]

    def reduced(self, modes: Sequence[int]) -> "GaussianState":
        """Marginal state on ``modes`` (in the given order)."""
        idx = [i for m in modes for i in self.mode_indices(m)]
        return GaussianState(self.mean[idx], self.cov[np.ix_(idx, idx)])

    def allclose(self, other: "GaussianState", atol: float = 1e-12) -> bool:
        return (
            self.n_modes == other.n_modes
            and np.allclose(self.mean, other.mean, rtol=0.0, atol=atol)
            and np.allclose(self.cov, other.cov, rtol=0.0, atol=atol)
        )


def _check_mode(state: GaussianState, mode: int) -> None:
    if not isinstance(mode, (int, np.integer)) or not 0 <= mode < state.n_modes:
        raise ValueError(f"mode {mode!r} out of range for a {state.n_modes}-mode state")


def _check_fraction(name: str, value: float) -> None:
    if not 0.0 <= value <= 1.0:
        raise ValueError(f"{name} must lie in [0, 1], got {value}")


def _xy(alpha: complex) -> np.ndarray:
    alpha = complex(alpha)
    return np.array([alpha.real, alpha.imag])


# -- constructors -----------------------------------------------------------


def vacuum_state(n_modes: int = 1) -> GaussianState:
    if n_modes < 1:
        raise ValueError("n_modes must be at least 1")
    return GaussianState(np.zeros(2 * n_modes), VACUUM_VARIANCE * np.eye(2 * n_modes))


def coherent_state(alpha: complex) -> GaussianState:
    return GaussianState(_xy(alpha), VACUUM_VARIANCE * np.eye(2))


def thermal_state(n_bar: float) -> GaussianState:
    if n_bar < 0:
        raise ValueError("n_bar must be non-negative")
    return GaussianState(np.zeros(2), (1 + 2 * n_bar) * VACUUM_VARIANCE * np.eye(2))


def two_mode_squeezed_vacuum(s: float) -> GaussianState:
    """Two-mode squeezed vacuum with ``q_a + q_b`` and ``p_a - p_b`` squeezed.

    Var(q_a) = cosh(2s)/4 and Cov(q_a, q_b) = -sinh(2s)/4,
    Cov(p_a, p_b) = +sinh(2s)/4.
    """
    if not np.isfinite(s):
        raise ValueError("s must be finite")
    ch, sh = np.cosh(2 * s), np.sinh(2 * s)
    z = np.diag([1.0, -1.0])
    cov = VACUUM_VARIANCE * np.block([[ch * np.eye(2), -sh * z], [-sh * z, ch * np.eye(2)]])
    return GaussianState(np.zeros(4), cov)


def tensor(*states: GaussianState) -> GaussianState:
    """Product state; modes are numbered in argument order."""
    mean = np.concatenate([st.mean for st in states])
    cov = np.zeros((mean.size, mean.size))
    k = 0
    for st in states:
        d = st.mean.size
        cov[k : k + d, k : k + d] = st.cov
        k += d
    return GaussianState(mean, cov)


# -- transformations ----------------------------------------------------------


def apply_symplectic(state: GaussianState, matrix: np.ndarray, modes: Sequence[int]) -> GaussianState:
    """Apply a linear map acting on ``modes`` (2k x 2k matrix) and identity elsewhere."""
    idx = [i for m in modes for i in state.mode_indices(m)]
    full = np.eye(state.mean.size)
    full[np.ix_(idx, idx)] = matrix
    return GaussianState(full @ state.mean, full @ state.cov @ full.T)


def apply_squeezing(state: GaussianState, mode: int, r: float) -> GaussianState:
    """Squeeze ``q`` of ``mode`` by ``exp(-r)`` (anti-squeeze ``p``)."""
    return apply_symplectic(state, np.diag([np.exp(-r), np.exp(r)]), [mode])


def apply_beam_splitter(state: GaussianState, mode_i: int, mode_j: int, T: float) -> GaussianState:
    """Mix two modes on a beam splitter of transmittance ``T``.

    With ``t = sqrt(T)`` and ``r = sqrt(1 - T)`` the outputs are
    ``x_i' = t x_i - r x_j`` and ``x_j' = r x_i + t x_j`` for both quadratures.
    """
    _check_mode(state, mode_i)
    _check_mode(state, mode_j)
    if mode_i == mode_j:
        raise ValueError("beam splitter needs two distinct modes")
    _check_fraction("T", T)
    t, r = np.sqrt(T), np.sqrt(1.0 - T)
    eye = np.eye(2)
    bs = np.block([[t * eye, -r * eye], [r * eye, t * eye]])
    return apply_symplectic(state, bs, [mode_i, mode_j])


def apply_displacement(state: GaussianState, mode: int, beta: complex) -> GaussianState:
    idx = state.mode_indices(mode)
    mean = state.mean.copy()
    mean[idx] += _xy(beta)
    return GaussianState(mean, state.cov)


def apply_loss(state: GaussianState, mode: int, R: float, n_bar: float = 0.0) -> GaussianState:
    """Couple ``mode`` to a thermal bath for normalized interaction time ``R``.

    Same as mixing the mode with a thermal state of ``n_bar`` photons on a
    beam splitter of transmittance ``1 - R`` and discarding the bath port.
    """
    _check_fraction("R", R)
    if n_bar < 0:
        raise ValueError(f"n_bar must be non-negative, got {n_bar}")
    idx = state.mode_indices(mode)
    scale = np.ones(state.mean.size)
    scale[idx] = np.sqrt(1.0 - R)
    cov = state.cov * np.outer(scale, scale)
    cov[idx, idx] += R * (1 + 2 * n_bar) * VACUUM_VARIANCE
    return GaussianState(state.mean * scale, cov)


def displacement_via_beam_splitter(state: GaussianState, mode: int, beta: complex, T: float) -> GaussianState:
    """Displace ``mode`` by ``beta`` using a beam splitter of transmittance ``T``.

    A coherent drive of amplitude ``beta / sqrt(1 - T)`` enters the other
    port; only the transmitted port of ``mode`` is kept.
    """
    if not 0.0 < T <= 1.0:
        raise ValueError(f"T must lie in (0, 1], got {T}")
    if T == 1.0:
        return apply_displacement(state, mode, beta)
    drive = coherent_state(complex(beta) / np.sqrt(1.0 - T))
    n = state.n_modes
    mixed = apply_beam_splitter(tensor(state, drive), mode, n, 1.0 - T)
    # port n now carries sqrt(T) * mode + sqrt(1 - T) * drive
    order = list(range(n))
    order[mode] = n
    return mixed.reduced(order)


# -- homodyne detection -------------------------------------------------------


def _quadrature_vector(state: GaussianState, mode: int, angle: float) -> np.ndarray:
    v = np.zeros(state.mean.size)
    i, j = state.mode_indices(mode)
    v[i], v[j] = np.cos(angle), np.sin(angle)
    return v


def _homodyne_moments(state: GaussianState, mode: int, angle: float):
    """Marginal moments of ``x_theta`` plus the Schur-complement pieces.

    Returns ``(mu, var, rest, gain, cond_cov)`` where the conditional mean
    of the remaining modes is ``state.mean[rest] + gain * (x - mu)``.
    """
    v = _quadrature_vector(state, mode, angle)
    mu = float(v @ state.mean)
    var = float(v @ state.cov @ v)
    if not var > 0.0:
        raise DegenerateMeasurementError(f"measured quadrature of mode {mode} has variance {var}")
    measured = state.mode_indices(mode)
    rest = [i for i in range(state.mean.size) if i not in measured]
    cross = state.cov[rest] @ v
    gain = cross / var
    cond_cov = state.cov[np.ix_(rest, rest)] - np.outer(cross, cross) / var
    return mu, var, rest, gain, cond_cov


def homodyne_condition(state: GaussianState, mode: int, angle: float, outcome: float):
    """Condition on measuring ``q cos(angle) + p sin(angle)`` of ``mode``.

    Returns the state of the remaining modes and the probability density of
    ``outcome``.  The conditional covariance does not depend on ``outcome``.
    """
    if state.n_modes < 2:
        raise ValueError("homodyne conditioning needs at least two modes")
    mu, var, rest, gain, cond_cov = _homodyne_moments(state, mode, angle)
    density = np.exp(-0.5 * (outcome - mu) ** 2 / var) / np.sqrt(2 * np.pi * var)
    cond_mean = state.mean[rest] + gain * (outcome - mu)
    return GaussianState(cond_mean, cond_cov), float(density)


def homodyne_sample(state: GaussianState, mode: int, angle: float, rng: np.random.Generator):
    """Draw one homodyne outcome and return ``(outcome, conditioned_state)``.

    Consumes exactly one ``rng.standard_normal()`` draw.
    """
    if state.n_modes < 2:
        raise ValueError("homodyne conditioning needs at least two modes")
    mu, var, rest, gain, cond_cov = _homodyne_moments(state, mode, angle)
    outcome = mu + np.sqrt(var) * rng.standard_normal()
    return float(outcome), GaussianState(state.mean[rest] + gain * (outcome - mu), cond_cov)


# -- phase-space functions ----------------------------------------------------


def _point_vector(state: GaussianState, points) -> np.ndarray:
    if np.isscalar(points):
        points = [points]
    points = list(points)
    if len(points) != state.n_modes:
        raise ValueError(f"expected {state.n_modes} phase points, got {len(points)}")
    return np.concatenate([_xy(a) for a in points])


def wigner(state: GaussianState, point) -> float:
    """Normalized Wigner function at one phase-space point (one amplitude per mode)."""
    x = _point_vector(state, point) - state.mean
    n = state.n_modes
    quad = x @ np.linalg.solve(state.cov, x)
    return float(np.exp(-0.5 * quad) / ((2 * np.pi) ** n * np.sqrt(np.linalg.det(state.cov))))


def characteristic_function(state: GaussianState, eta) -> complex:
    """``Tr[rho D(eta)]`` with ``D(eta) = exp(eta a^dag - eta^* a)``.

    Per mode ``eta a^dag - eta^* a = i k.x`` with ``k = 2 (Im eta, -Re eta)``.
    """
    e = _point_vector(state, eta)
    k = 2.0 * np.column_stack([e[1::2], -e[0::2]]).reshape(-1)
    return complex(np.exp(1j * (k @ state.mean) - 0.5 * (k @ state.cov @ k)))


def log_overlap(a: GaussianState, b: GaussianState) -> float:
    if a.n_modes != b.n_modes:
        raise ValueError(f"mode count mismatch: {a.n_modes} vs {b.n_modes}")
    sigma = a.cov + b.cov
    d = a.mean - b.mean
    _, logdet = np.linalg.slogdet(sigma)
    return float(-a.n_modes * np.log(2.0) - 0.5 * logdet - 0.5 * d @ np.linalg.solve(sigma, d))


def gaussian_overlap_fidelity(a: GaussianState, b: GaussianState) -> float:
    """``pi^n * integral(W_a W_b)``, i.e. ``Tr(rho_a rho_b)``.

    This is the fidelity whenever one of the two states is pure.
    """
    return float(np.exp(log_overlap(a, b)))


def quadrature_form_variance(state: GaussianState, coeffs) -> float:
    """Variance of the linear combination ``coeffs . x`` of quadratures."""
    c = np.asarray(coeffs, dtype=float)
    if c.shape != state.mean.shape:
        raise ValueError(f"coeffs must have length {state.mean.size}")
    return float(c @ state.cov @ c)
