"""Operators and states on the truncated space qubit (x) Fock_a (x) Fock_b.

Operators are plain dense ``numpy`` arrays. The basis is qubit-major:
``index = q * (n_a * n_b) + i_a * n_b + i_b`` with ``q = 0`` the dressed
ground state ``|g>`` and ``q = 1`` the excited state ``|e>``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

HERMITIAN_TOL = 1e-12
NORM_TOL = 1e-10


class LeakageError(ValueError):
    """Raised when a state puts more weight outside the truncation than allowed."""


@dataclass(frozen=True)
class FockConfig:
    """Cutoffs of the two bosonic modes plus the truncation leakage guard."""

    n_a: int = 10
    n_b: int = 10
    leakage_tol: float = 1e-6

    def __post_init__(self):
        if int(self.n_a) != self.n_a or int(self.n_b) != self.n_b:
            raise ValueError("cutoffs must be integers")
        if self.n_a < 2 or self.n_b < 2:
            raise ValueError(f"cutoffs must be >= 2, got n_a={self.n_a}, n_b={self.n_b}")
        if not 0.0 < self.leakage_tol < 1.0:
            raise ValueError(f"leakage_tol must lie in (0, 1), got {self.leakage_tol}")

    @property
    def dim(self) -> int:
        return 2 * self.n_a * self.n_b

    @property
    def mode_dim(self) -> int:
        """Dimension of the two-boson space (no qubit factor)."""
        return self.n_a * self.n_b

    @property
    def dims(self) -> tuple[int, int, int]:
        return (2, self.n_a, self.n_b)

    def index(self, q: int, i_a: int, i_b: int) -> int:
        if not (0 <= q < 2 and 0 <= i_a < self.n_a and 0 <= i_b < self.n_b):
            raise IndexError(f"({q}, {i_a}, {i_b}) outside the truncated basis")
        return q * self.mode_dim + i_a * self.n_b + i_b

    def labels(self, index: int) -> tuple[int, int, int]:
        if not 0 <= index < self.dim:
            raise IndexError(f"index {index} outside [0, {self.dim})")
        q, rest = divmod(index, self.mode_dim)
        i_a, i_b = divmod(rest, self.n_b)
        return q, i_a, i_b

    def basis_state(self, q: int, i_a: int, i_b: int) -> np.ndarray:
        psi = np.zeros(self.dim, dtype=complex)
        psi[self.index(q, i_a, i_b)] = 1.0
        return psi

    def mode_state(self, i_a: int, i_b: int) -> np.ndarray:
        """Fock product state |i_a, i_b> on the two-boson space."""
        if not (0 <= i_a < self.n_a and 0 <= i_b < self.n_b):
            raise IndexError(f"({i_a}, {i_b}) outside the truncated two-mode basis")
        psi = np.zeros(self.mode_dim, dtype=complex)
        psi[i_a * self.n_b + i_b] = 1.0
        return psi


def annihilation_op(n: int) -> np.ndarray:
    """Truncated bosonic lowering operator with ``<m-1|a|m> = sqrt(m)``."""
    if int(n) != n or n < 2:
        raise ValueError(f"Fock cutoff must be an integer >= 2, got {n}")
    return np.diag(np.sqrt(np.arange(1, n, dtype=float)), k=1).astype(complex)


def number_op(n: int) -> np.ndarray:
    return np.diag(np.arange(n, dtype=float)).astype(complex)


# Qubit operators in the dressed basis, index 0 = |g>, index 1 = |e>.
SIGMA_Z = np.array([[-1, 0], [0, 1]], dtype=complex)
SIGMA_X = np.array([[0, 1], [1, 0]], dtype=complex)
SIGMA_Y = np.array([[0, 1j], [-1j, 0]], dtype=complex)
SIGMA_PLUS = np.array([[0, 0], [1, 0]], dtype=complex)  # |e><g|
SIGMA_MINUS = SIGMA_PLUS.conj().T.copy()
PROJ_G = np.diag([1.0, 0.0]).astype(complex)
PROJ_E = np.diag([0.0, 1.0]).astype(complex)


def embed3(op_q, op_a, op_b, cfg: FockConfig) -> np.ndarray:
    """Kronecker product ``op_q (x) op_a (x) op_b``; ``None`` stands for identity."""
    factors = []
    for op, d, name in ((op_q, 2, "qubit"), (op_a, cfg.n_a, "mode a"), (op_b, cfg.n_b, "mode b")):
        if op is None:
            factors.append(np.eye(d, dtype=complex))
            continue
        op = np.asarray(op)
        if op.shape != (d, d):
            raise ValueError(f"{name} factor has shape {op.shape}, expected {(d, d)}")
        factors.append(op)
    return np.kron(np.kron(factors[0], factors[1]), factors[2])


def embed2(op_a, op_b, cfg: FockConfig) -> np.ndarray:
    """Kronecker product on the two-boson space ``op_a (x) op_b``."""
    a = np.eye(cfg.n_a, dtype=complex) if op_a is None else np.asarray(op_a)
    b = np.eye(cfg.n_b, dtype=complex) if op_b is None else np.asarray(op_b)
    if a.shape != (cfg.n_a, cfg.n_a) or b.shape != (cfg.n_b, cfg.n_b):
        raise ValueError("factor dimensions do not match the Fock cutoffs")
    return np.kron(a, b)


def mode_operators(cfg: FockConfig, with_qubit: bool = True):
    """Return ``(a, b)`` embedded in the full space (or the two-boson space)."""
    a1, b1 = annihilation_op(cfg.n_a), annihilation_op(cfg.n_b)
    if with_qubit:
        return embed3(None, a1, None, cfg), embed3(None, None, b1, cfg)
    return embed2(a1, None, cfg), embed2(None, b1, cfg)


def jordan_schwinger(cfg: FockConfig):
    """Angular-momentum realization ``(J_x, J_y, J_z, N)`` on the two-boson space."""
    a, b = mode_operators(cfg, with_qubit=False)
    ad, bd = a.conj().T, b.conj().T
    jx = 0.5 * (bd @ a + ad @ b)
    jy = 0.5j * (bd @ a - ad @ b)
    jz = 0.5 * (ad @ a - bd @ b)
    n_tot = ad @ a + bd @ b
    return jx, jy, jz, n_tot


def excitation_indices(cfg: FockConfig, n_max: int, with_qubit: bool = False) -> np.ndarray:
    """Basis indices whose boson excitation ``i_a + i_b`` does not exceed ``n_max``.

    Excitation-conserving operators are block diagonal in ``i_a + i_b``; blocks
    with ``i_a + i_b <= min(n_a, n_b) - 1`` are complete under truncation.
    """
    i_a, i_b = np.meshgrid(np.arange(cfg.n_a), np.arange(cfg.n_b), indexing="ij")
    mask = ((i_a + i_b) <= n_max).ravel()
    if with_qubit:
        mask = np.concatenate([mask, mask])
    return np.flatnonzero(mask)


def interior_indices(cfg: FockConfig, with_qubit: bool = True) -> np.ndarray:
    """Indices with both modes strictly below their top Fock level."""
    i_a, i_b = np.meshgrid(np.arange(cfg.n_a), np.arange(cfg.n_b), indexing="ij")
    mask = ((i_a < cfg.n_a - 1) & (i_b < cfg.n_b - 1)).ravel()
    if with_qubit:
        mask = np.concatenate([mask, mask])
    return np.flatnonzero(mask)


def restrict(op: np.ndarray, indices: np.ndarray) -> np.ndarray:
    return op[np.ix_(indices, indices)]


def coherent_amplitudes(z: complex, n: int) -> tuple[np.ndarray, float]:
    """Untruncated-normalization coherent amplitudes and the weight lost to truncation."""
    m = np.arange(n)
    log_fact = np.array([math.lgamma(k + 1) for k in m])
    if z == 0:
        c = np.zeros(n, dtype=complex)
        c[0] = 1.0
        return c, 0.0
    log_mag = -0.5 * abs(z) ** 2 + m * math.log(abs(z)) - 0.5 * log_fact
    c = np.exp(log_mag) * np.exp(1j * m * np.angle(z))
    lost = max(0.0, 1.0 - float(np.sum(np.abs(c) ** 2)))
    return c.astype(complex), lost


def coherent_state_vector(z: complex, n: int, leakage_tol: float = 1e-6) -> np.ndarray:
    """Single-mode coherent state ``|z>`` truncated to ``n`` levels and renormalized.

    Uses the normalization ``exp(-|z|^2 / 2)``. Raises :class:`LeakageError`
    when the weight beyond the cutoff exceeds ``leakage_tol``.
    """
    if int(n) != n or n < 2:
        raise ValueError(f"Fock cutoff must be an integer >= 2, got {n}")
    c, lost = coherent_amplitudes(complex(z), n)
    if lost > leakage_tol:
        raise LeakageError(
            f"coherent state |z|={abs(z):.4g} loses weight {lost:.3e} beyond cutoff {n}"
        )
    return c / np.linalg.norm(c)


def commutator(A: np.ndarray, B: np.ndarray) -> np.ndarray:
    A, B = np.asarray(A), np.asarray(B)
    if A.shape != B.shape or A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise ValueError(f"commutator needs equal square shapes, got {A.shape} and {B.shape}")
    return A @ B - B @ A


def hermiticity_error(M: np.ndarray) -> float:
    return float(np.max(np.abs(M - M.conj().T))) if M.size else 0.0


def is_hermitian(M: np.ndarray, tol: float = HERMITIAN_TOL) -> bool:
    return hermiticity_error(M) < tol


def is_anti_hermitian(M: np.ndarray, tol: float = HERMITIAN_TOL) -> bool:
    return float(np.max(np.abs(M + M.conj().T))) < tol


def normalize(psi: np.ndarray) -> np.ndarray:
    norm = np.linalg.norm(psi)
    if norm == 0:
        raise ValueError("cannot normalize the zero vector")
    return np.asarray(psi, dtype=complex) / norm


def check_state(psi: np.ndarray, dim: int | None = None, tol: float = NORM_TOL) -> np.ndarray:
    psi = np.asarray(psi, dtype=complex)
    if psi.ndim != 1:
        raise ValueError("state vectors must be one-dimensional")
    if dim is not None and psi.shape[0] != dim:
        raise ValueError(f"state has dimension {psi.shape[0]}, expected {dim}")
    if abs(np.linalg.norm(psi) - 1.0) > tol:
        raise ValueError(f"state is not normalized (norm={np.linalg.norm(psi)!r})")
    return psi


def fidelity(psi: np.ndarray, phi: np.ndarray) -> float:
    """Squared overlap of two pure states."""
    return float(abs(np.vdot(psi, phi)) ** 2)
