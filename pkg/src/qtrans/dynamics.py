"""Exact propagation on truncated spaces and the closed-form solutions."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .algebra import (
    NORM_TOL,
    FockConfig,
    excitation_indices,
    hermiticity_error,
    jordan_schwinger,
)
from .model import EffectiveParams, so3_angle, so3_coefficients


@dataclass(frozen=True)
class TimeGrid:
    t_start: float
    t_end: float
    n_points: int

    def __post_init__(self):
        if not self.t_end > self.t_start:
            raise ValueError(f"t_end ({self.t_end}) must exceed t_start ({self.t_start})")
        if int(self.n_points) != self.n_points or self.n_points < 2:
            raise ValueError(f"n_points must be an integer >= 2, got {self.n_points}")

    def times(self) -> np.ndarray:
        return np.linspace(self.t_start, self.t_end, int(self.n_points))


def _as_times(grid) -> np.ndarray:
    if isinstance(grid, TimeGrid):
        return grid.times()
    t = np.atleast_1d(np.asarray(grid, dtype=float))
    if t.ndim != 1:
        raise ValueError("times must be one-dimensional")
    return t


@dataclass
class EvolutionResult:
    times: np.ndarray
    states: np.ndarray  # (n_times, dim)
    norms: np.ndarray
    energies: np.ndarray
    leakage: np.ndarray  # (n_times, n_modes), population of each mode's top level
    leakage_tol: float

    @property
    def flagged(self) -> bool:
        return bool(self.leakage.size and self.leakage.max() > self.leakage_tol)

    @property
    def max_norm_error(self) -> float:
        return float(np.max(np.abs(self.norms - 1.0)))

    @property
    def max_energy_drift(self) -> float:
        return float(np.max(np.abs(self.energies - self.energies[0])))

    def expect(self, op: np.ndarray) -> np.ndarray:
        return np.real(np.einsum("ti,ij,tj->t", self.states.conj(), op, self.states))


class Propagator:
    """Eigendecomposition of a Hermitian matrix, reused for every time point."""

    def __init__(self, H: np.ndarray, tol: float = 1e-12):
        H = np.asarray(H, dtype=complex)
        if H.ndim != 2 or H.shape[0] != H.shape[1]:
            raise ValueError(f"Hamiltonian must be square, got shape {H.shape}")
        err = hermiticity_error(H)
        if err >= tol * max(1.0, float(np.max(np.abs(H)))):
            raise ValueError(f"Hamiltonian is not Hermitian (max |H - H^dag| = {err:.3e})")
        self.H = H
        self.energies, self.vectors = np.linalg.eigh(0.5 * (H + H.conj().T))

    @property
    def dim(self) -> int:
        return self.H.shape[0]

    def coefficients(self, psi0: np.ndarray) -> np.ndarray:
        return self.vectors.conj().T @ psi0

    def states(self, psi0: np.ndarray, times) -> np.ndarray:
        t = _as_times(times)
        c = self.coefficients(psi0)
        phases = np.exp(-1j * np.outer(t, self.energies))
        return (phases * c) @ self.vectors.T

    def unitary(self, t: float) -> np.ndarray:
        return (self.vectors * np.exp(-1j * self.energies * t)) @ self.vectors.conj().T

    def support(self, psi0: np.ndarray, weight_tol: float = 1e-24) -> "ReducedPropagator":
        """Restrict to eigenvectors that carry weight in ``psi0``."""
        c = self.coefficients(psi0)
        keep = np.flatnonzero(np.abs(c) ** 2 > weight_tol)
        return ReducedPropagator(self.energies[keep], self.vectors[:, keep], c[keep])


@dataclass
class ReducedPropagator:
    energies: np.ndarray
    vectors: np.ndarray
    coeffs: np.ndarray

    def amplitudes(self, rows_or_bra, times: np.ndarray) -> np.ndarray:
        """Amplitudes of ``psi(t)`` on ``rows`` (index array) or along a bra matrix.

        Passing a 2-D array ``M`` of shape (k, dim) returns ``M psi(t)``.
        """
        rows_or_bra = np.asarray(rows_or_bra)
        if rows_or_bra.ndim == 2:
            proj = rows_or_bra @ self.vectors
        else:
            proj = self.vectors[rows_or_bra]
        phases = np.exp(-1j * np.outer(times, self.energies)) * self.coeffs
        return phases @ proj.T

    def beat_frequencies(self, weight_tol: float = 1e-6) -> tuple[float, float]:
        """(dominant, fastest) beat among components with weight above ``weight_tol``.

        The dominant beat is between the two heaviest components.
        """
        w = np.abs(self.coeffs) ** 2
        order = np.argsort(w)[::-1]
        E = self.energies
        dominant = abs(E[order[0]] - E[order[1]]) if len(order) > 1 else 0.0
        sig = E[w > weight_tol]
        fastest = float(sig.max() - sig.min()) if sig.size > 1 else 0.0
        return float(dominant), fastest


def mode_leakage(states: np.ndarray, dims: tuple[int, ...], modes: tuple[int, ...]) -> np.ndarray:
    """Population of the top Fock level of each listed subsystem."""
    probs = np.abs(states) ** 2
    shaped = probs.reshape((probs.shape[0],) + tuple(dims))
    out = [shaped.take(dims[m] - 1, axis=m + 1).reshape(probs.shape[0], -1).sum(axis=1) for m in modes]
    return np.stack(out, axis=1) if out else np.zeros((probs.shape[0], 0))


def evolve(
    H: np.ndarray,
    psi0: np.ndarray,
    grid,
    *,
    cfg: FockConfig | None = None,
    dims: tuple[int, ...] | None = None,
    modes: tuple[int, ...] | None = None,
    leakage_tol: float | None = None,
) -> EvolutionResult:
    """Schroedinger evolution ``psi(t) = V exp(-i E t) V^dag psi0``.

    Leakage is tracked on the bosonic factors: with ``cfg`` the layout is
    qubit (x) a (x) b; otherwise ``dims``/``modes`` describe it (default:
    a single bosonic mode spanning the whole space).
    """
    psi0 = np.asarray(psi0, dtype=complex)
    H = np.asarray(H, dtype=complex)
    if psi0.shape != (H.shape[0],):
        raise ValueError(f"state dimension {psi0.shape} does not match Hamiltonian {H.shape}")
    if abs(np.linalg.norm(psi0) - 1.0) > NORM_TOL:
        raise ValueError("initial state must be normalized")
    if cfg is not None:
        dims, modes = cfg.dims, (1, 2)
        if leakage_tol is None:
            leakage_tol = cfg.leakage_tol
    elif dims is None:
        dims, modes = (H.shape[0],), (0,)
    elif modes is None:
        modes = tuple(range(len(dims)))
    if leakage_tol is None:
        leakage_tol = 1e-6
    if int(np.prod(dims)) != H.shape[0]:
        raise ValueError(f"subsystem dims {dims} do not multiply to {H.shape[0]}")
    t = _as_times(grid)
    prop = Propagator(H)
    states = prop.states(psi0, t)
    norms = np.linalg.norm(states, axis=1)
    energies = np.real(np.einsum("ti,ij,tj->t", states.conj(), H, states))
    leak = mode_leakage(states, tuple(dims), tuple(modes))
    return EvolutionResult(t, states, norms, energies, leak, float(leakage_tol))


def heisenberg_FK(beta, delta, Theta, t):
    """Mode-mixing coefficients ``(F_1, F_2, K)`` of the degenerate two-mode solution.

    ``a(t) = a F_1 + b K`` and ``b(t) = b F_2 - a K``; broadcasts over arrays.
    """
    beta, delta, Theta, t = (np.asarray(x, dtype=float) for x in (beta, delta, Theta, t))
    half = 0.5 * delta * t
    c, s = np.cos(half), np.sin(half)
    phase = np.exp(-1j * Theta * t)
    c2 = np.cos(2 * beta)
    F1 = (c - 1j * c2 * s) * phase
    F2 = (c + 1j * c2 * s) * phase
    K = np.sin(2 * beta) * s * phase
    return F1, F2, K


def perfect_transfer_times(delta: float, m_max: int = 0) -> np.ndarray:
    """``t_m = (2m + 1) pi / |delta|`` for ``m = 0..m_max``."""
    if delta == 0 or not math.isfinite(delta):
        raise ValueError("Stark shift must be finite and non-zero")
    return (2 * np.arange(m_max + 1) + 1) * math.pi / abs(delta)


def printed_transfer_times(delta: float, m_max: int = 0) -> np.ndarray:
    """``(2m + 1) / delta`` without the factor pi, kept for side-by-side reporting."""
    return (2 * np.arange(m_max + 1) + 1) / delta


def transfer_phase_map(eff: EffectiveParams, t: float, n_max: int) -> np.ndarray:
    """Deterministic Fock-number phases ``w_n`` of the transferred state at time ``t``.

    ``w_n = (K*(-t) / |K(-t)|)^n``; at a perfect-transfer time the state
    ``sum c_n |n, 0>`` maps to ``sum c_n w_n |0, n>``.
    """
    _, _, K = heisenberg_FK(eff.beta, eff.delta, eff.Theta, -t)
    k = complex(np.conj(K))
    unit = k / abs(k) if abs(k) > 0 else 1.0
    return unit ** np.arange(n_max + 1)


def case1_state(n: int, t: float, eff: EffectiveParams, cfg: FockConfig) -> np.ndarray:
    """Two-mode state grown from ``|n_a, 0_b>`` by the degenerate effective dynamics.

    ``(1/sqrt(n!)) [a^dag F_1*(-t) + b^dag K*(-t)]^n |0>`` expanded binomially.
    """
    if int(n) != n or n < 0:
        raise ValueError("Fock number must be a non-negative integer")
    if n >= min(cfg.n_a, cfg.n_b):
        raise ValueError(f"n={n} needs cutoffs above {n}, got ({cfg.n_a}, {cfg.n_b})")
    F1, _, K = heisenberg_FK(eff.beta, eff.delta, eff.Theta, -t)
    x, y = complex(np.conj(F1)), complex(np.conj(K))
    psi = np.zeros(cfg.mode_dim, dtype=complex)
    for k in range(n + 1):
        psi[k * cfg.n_b + (n - k)] = math.sqrt(math.comb(n, k)) * x**k * y ** (n - k)
    return psi


def nondegenerate_amplitudes(beta, gamma_tilde, t):
    """Amplitudes ``(c_01, c_10)`` of ``|0_a, 1_b>`` and ``|1_a, 0_b>`` under the SO(3) dynamics."""
    x = 0.5 * np.asarray(gamma_tilde, dtype=float) * np.asarray(t, dtype=float)
    s = np.sin(x)
    c01 = np.cos(x) + 1j * np.cos(beta) * s
    c10 = -np.sin(beta) * s + 0j
    return c01, c10


def transfer_probability(beta, gamma_tilde, t):
    """``P(t) = sin^2(beta) sin^2(Gamma~ t / 2)``."""
    x = 0.5 * np.asarray(gamma_tilde, dtype=float) * np.asarray(t, dtype=float)
    return np.sin(beta) ** 2 * np.sin(x) ** 2


def coherent_amplitude(eff: EffectiveParams, xi: complex, t):
    """``z(t) = -i (Gamma_2 xi / (2 Omega_b)) [1 - exp(-i Omega_b t)]``."""
    wb = eff.omega_b_shift
    if wb == 0 or not math.isfinite(wb):
        raise ValueError(f"shifted NAMR frequency must be finite and non-zero, got {wb!r}")
    t = np.asarray(t, dtype=float)
    return -1j * eff.gamma_2 * xi / (2 * wb) * (1 - np.exp(-1j * wb * t))


def _js_rotation_cache():
    cache: dict = {}

    def get(cfg: FockConfig):
        key = (cfg.n_a, cfg.n_b)
        if key not in cache:
            jx, jy, jz, n_tot = jordan_schwinger(cfg)
            w, v = np.linalg.eigh(jx)
            cache[key] = (w, v, np.real(np.diag(jz)), np.real(np.diag(n_tot)))
        return cache[key]

    return get


_jx_eig = _js_rotation_cache()


def so3_propagator(eff: EffectiveParams, cfg: FockConfig, t: float, sector: str = "g") -> np.ndarray:
    """``U(t) = exp(-i Gamma_0 N t) R exp(-i Gamma~ J_z t) R^dag`` with ``R = exp(i beta J_x)``.

    ``J_z`` and ``N`` are diagonal in the Fock basis, so only the ``J_x``
    rotation needs a decomposition. Exact on complete excitation blocks.
    """
    g0, g2, g3 = so3_coefficients(eff, sector)
    gt = math.hypot(g2, g3)
    w, v, jz_diag, n_diag = _jx_eig(cfg)
    phase_n = np.exp(-1j * g0 * n_diag * t)
    if gt == 0:
        return np.diag(phase_n)
    beta = so3_angle(g2, g3)
    R = (v * np.exp(1j * beta * w)) @ v.conj().T
    inner = (R * np.exp(-1j * gt * jz_diag * t)) @ R.conj().T
    return phase_n[:, None] * inner


def complete_block_indices(cfg: FockConfig) -> np.ndarray:
    """Two-boson indices whose excitation block is untouched by truncation."""
    return excitation_indices(cfg, min(cfg.n_a, cfg.n_b) - 1)
