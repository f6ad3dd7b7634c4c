"""Device-to-model parameter mapping and the transducer Hamiltonians.

Model-level quantities are angular frequencies with hbar = 1. Device
quantities are SI and converted once in :func:`derive_model_params`.
"""

from __future__ import annotations

import enum
import math
import warnings
from dataclasses import asdict, dataclass, field

import numpy as np
from scipy import constants

from .algebra import (
    PROJ_E,
    PROJ_G,
    SIGMA_MINUS,
    SIGMA_PLUS,
    SIGMA_Z,
    FockConfig,
    annihilation_op,
    commutator,
    embed3,
    interior_indices,
    jordan_schwinger,
    mode_operators,
    restrict,
)

MU_0 = 4e-7 * math.pi
FLUX_QUANTUM = constants.h / (2 * constants.e)
ELEMENTARY_CHARGE = constants.e
HBAR = constants.hbar


class DetuningError(ValueError):
    """A perturbative construction was requested at (or too near) zero detuning."""


class LambdaStrategy(str, enum.Enum):
    AS_WRITTEN = "as_written"
    MEAN_DETUNING = "mean_detuning"
    PER_MODE = "per_mode"


@dataclass(frozen=True)
class DeviceParams:
    """Raw device quantities in SI units (``e_j`` already in rad/s)."""

    e_j: float
    c_j: float
    c_g: float
    c_0: float
    v_g: float
    v: float
    d: float
    m: float
    omega_b: float
    s: float = 1e-12
    r: float = 1e-5
    length: float = 1e-2
    l: float = 4.2e-7
    c: float = 1.6e-10
    k: int = 1
    phi_c: float = 0.0
    phi_0: float = FLUX_QUANTUM

    def __post_init__(self):
        positive = ("c_j", "c_g", "c_0", "d", "m", "omega_b", "s", "r", "length", "l", "c", "phi_0")
        for name in positive:
            value = getattr(self, name)
            if not value > 0:
                raise ValueError(f"{name} must be strictly positive, got {value!r}")
        if int(self.k) != self.k or self.k < 1:
            raise ValueError(f"mode index k must be a positive integer, got {self.k!r}")
        if self.c_0 + self.c_g >= self.c_j:
            raise ValueError("small-junction regime requires c_0 + c_g < c_j")
        ratio = (self.c_0 + self.c_g) / self.c_j
        if ratio > 0.1:
            warnings.warn(
                f"(c_0 + c_g) / c_j = {ratio:.3g} is not small; the charge-qubit reduction is crude",
                stacklevel=2,
            )

    @property
    def c_total(self) -> float:
        return self.c_j + self.c_g + self.c_0

    @property
    def gate_charge(self) -> float:
        return (self.c_g * self.v_g + self.c_0 * self.v) / (2 * ELEMENTARY_CHARGE)


@dataclass(frozen=True)
class ModelParams:
    omega_a: float
    omega_b: float
    epsilon: float
    lambda_a: float
    lambda_b: float
    theta: float = float("nan")

    def __post_init__(self):
        if not self.epsilon > 0:
            raise ValueError(f"qubit gap epsilon must be positive, got {self.epsilon!r}")
        for name in ("omega_a", "omega_b", "lambda_a", "lambda_b"):
            if not math.isfinite(getattr(self, name)):
                raise ValueError(f"{name} must be finite")

    def replace(self, **changes) -> "ModelParams":
        return ModelParams(**{**asdict(self), **changes})


@dataclass(frozen=True)
class EffectiveParams:
    """Derived couplings of the effective (qubit-eliminated) models.

    The ``gamma_*`` and ``omega_b_shift`` fields follow the printed
    coefficient formulas with ``Lambda``. Those coincide with the qubit
    sector where ``sigma_z = +1``; see :func:`so3_coefficients` for the
    sector-resolved values.
    """

    model: ModelParams
    strategy: LambdaStrategy
    G: float
    Delta: float
    delta: float
    beta: float
    Theta: float
    Lambda: float
    Omega: float
    gamma_0: float
    gamma_2: float
    gamma_3: float
    gamma_tilde: float
    omega_b_shift: float

    def as_dict(self) -> dict:
        out = {k: v for k, v in asdict(self).items() if k != "model"}
        out["strategy"] = self.strategy.value
        return out


def solve_lambda(p: ModelParams, strategy: LambdaStrategy | str = LambdaStrategy.AS_WRITTEN) -> float:
    """Non-degenerate detuning ``Lambda`` under the chosen strategy.

    ``AS_WRITTEN`` solves ``Lambda = eps + G^2/Lambda - w_a - w_b`` and keeps
    the root nearest ``eps - w_a - w_b``; ``MEAN_DETUNING`` uses
    ``eps - (w_a + w_b)/2``.
    """
    strategy = LambdaStrategy(strategy)
    G2 = p.lambda_a**2 + p.lambda_b**2
    if strategy is LambdaStrategy.AS_WRITTEN:
        D = p.epsilon - p.omega_a - p.omega_b
        disc = D * D + 4 * G2
        if disc < 0:
            raise DetuningError(f"strategy {strategy.value}: no real root for Lambda")
        root = math.sqrt(disc)
        return 0.5 * (D + root) if D >= 0 else 0.5 * (D - root)
    if strategy is LambdaStrategy.MEAN_DETUNING:
        return p.epsilon - 0.5 * (p.omega_a + p.omega_b)
    raise ValueError(f"strategy {strategy.value} is reserved and defines no single Lambda")


def effective_params(p: ModelParams, strategy: LambdaStrategy | str = LambdaStrategy.AS_WRITTEN) -> EffectiveParams:
    strategy = LambdaStrategy(strategy)
    G = math.hypot(p.lambda_a, p.lambda_b)
    Delta = p.epsilon - p.omega_a
    delta = G * G / Delta if Delta != 0 else float("nan")
    beta = math.atan2(p.lambda_a, p.lambda_b)
    Lam = solve_lambda(p, strategy)
    nan = float("nan")
    if Lam != 0:
        Omega = p.epsilon + G * G / Lam
        g0 = 0.5 * (p.omega_a + p.omega_b) + G * G / (2 * Lam)
        g2 = 2 * p.lambda_a * p.lambda_b / Lam
        g3 = p.omega_a - p.omega_b + (p.lambda_a**2 - p.lambda_b**2) / Lam
        wb = p.omega_b + p.lambda_b**2 / Lam
    else:
        Omega = g0 = g2 = g3 = wb = nan
    return EffectiveParams(
        model=p,
        strategy=strategy,
        G=G,
        Delta=Delta,
        delta=delta,
        beta=beta,
        Theta=p.omega_a - delta / 2,
        Lambda=Lam,
        Omega=Omega,
        gamma_0=g0,
        gamma_2=g2,
        gamma_3=g3,
        gamma_tilde=math.hypot(g2, g3),
        omega_b_shift=wb,
    )


@dataclass(frozen=True)
class DerivedQuantity:
    name: str
    value: float
    formula: str


@dataclass(frozen=True)
class Derivation:
    model: ModelParams
    effective: EffectiveParams
    quantities: tuple[DerivedQuantity, ...] = field(default_factory=tuple)


def flux_geometry_factor(s: float, r: float, length: float) -> float:
    """``S mu_0 L / (2 pi r)``: flux per unit current times the resonator length."""
    return s * MU_0 * length / (2 * math.pi * r)


def derive_model_params(
    dev: DeviceParams,
    n_g: float | None = None,
    mode_k: int | None = None,
    strategy: LambdaStrategy | str = LambdaStrategy.AS_WRITTEN,
) -> Derivation:
    """Map device quantities onto the model couplings.

    ``n_g`` defaults to the gate charge implied by ``v_g`` and ``v``; the
    flux through the SQUID is taken to be its classical part ``phi_c``.
    """
    k = dev.k if mode_k is None else mode_k
    if int(k) != k or k < 1:
        raise ValueError(f"mode index must be a positive integer, got {k!r}")
    n_g = dev.gate_charge if n_g is None else float(n_g)
    e, hbar = ELEMENTARY_CHARGE, HBAR
    c_t = dev.c_total
    e_c = e * e / (2 * c_t) / hbar
    omega = 4 * e_c * (2 * n_g - 1)
    cos_flux = math.cos(math.pi * dev.phi_c / dev.phi_0)
    # exact zero at half flux; cos(pi/2) in floating point is ~6e-17
    if dev.phi_c / dev.phi_0 % 1.0 == 0.5:
        cos_flux = 0.0
    ej_eff = dev.e_j * cos_flux
    epsilon = math.hypot(omega, ej_eff)
    if epsilon == 0:
        raise DetuningError("degenerate qubit: epsilon = 0 (charge degeneracy at a flux node)")
    if omega == 0:
        theta = math.copysign(math.pi / 2, ej_eff)
    else:
        theta = math.atan(ej_eff / omega)
    x_zpf = math.sqrt(hbar / (2 * dev.m * dev.omega_b))
    lam = e * dev.c_0 * dev.v * x_zpf / (c_t * dev.d) / hbar
    nu = 1 / math.sqrt(dev.l * dev.c)
    omega_a = k * math.pi * nu / dev.length
    geometry = flux_geometry_factor(dev.s, dev.r, dev.length)
    phi_a = math.sqrt(2 * dev.c / ((k * math.pi) ** 3 * nu)) * geometry
    lam_prime = -dev.e_j * math.pi * phi_a / (2 * dev.phi_0) * math.sin(math.pi * dev.phi_c / (2 * dev.phi_0))
    cos_t = 0.0 if abs(theta) == math.pi / 2 else math.cos(theta)
    sin_t = 0.0 if theta == 0 else math.sin(theta)
    model = ModelParams(
        omega_a=omega_a,
        omega_b=dev.omega_b,
        epsilon=epsilon,
        lambda_a=lam_prime * cos_t,
        lambda_b=lam * sin_t,
        theta=theta,
    )
    eff = effective_params(model, strategy)
    q = [
        DerivedQuantity("c_total", c_t, "C_T = C_J + C_g + C_0"),
        DerivedQuantity("n_g", n_g, "n_g = (C_g V_g + C_0 V)/(2e)"),
        DerivedQuantity("e_c", e_c, "E_C = e^2/(2 C_T) / hbar"),
        DerivedQuantity("omega", omega, "omega = 4 E_C (2 n_g - 1)"),
        DerivedQuantity("epsilon", epsilon, "epsilon = sqrt(omega^2 + E_J^2 cos^2(pi Phi_x/Phi_0))"),
        DerivedQuantity("theta", theta, "theta = arctan[(E_J/omega) cos(pi Phi_x/Phi_0)]"),
        DerivedQuantity("lambda", lam, "lambda = e C_0 V x_zpf/(C_T d hbar), x_zpf = sqrt(hbar/(2 m omega_b))"),
        DerivedQuantity("nu", nu, "nu = 1/sqrt(l c)"),
        DerivedQuantity("omega_a", omega_a, "omega_a = k pi nu / L"),
        DerivedQuantity("flux_geometry", geometry, "S mu_0 L/(2 pi r)"),
        DerivedQuantity("phi_a", phi_a, "phi_k = sqrt(2 c/((k pi)^3 nu)) S mu_0 L/(2 pi r)"),
        DerivedQuantity("lambda_prime", lam_prime, "lambda' = -(E_J pi phi_a/(2 Phi_0)) sin(pi Phi_c/(2 Phi_0))"),
        DerivedQuantity("lambda_a", model.lambda_a, "lambda_a = lambda' cos(theta)"),
        DerivedQuantity("lambda_b", model.lambda_b, "lambda_b = lambda sin(theta)"),
        DerivedQuantity("G", eff.G, "G = sqrt(lambda_a^2 + lambda_b^2)"),
        DerivedQuantity("Delta", eff.Delta, "Delta = epsilon - omega_a"),
        DerivedQuantity("delta", eff.delta, "delta = G^2/Delta"),
        DerivedQuantity("beta", eff.beta, "beta = arctan(lambda_a/lambda_b)"),
        DerivedQuantity("Lambda", eff.Lambda, f"Lambda ({eff.strategy.value})"),
        DerivedQuantity("Omega", eff.Omega, "Omega = epsilon + G^2/Lambda"),
        DerivedQuantity("gamma_0", eff.gamma_0, "Gamma_0 = (omega_a + omega_b)/2 + G^2/(2 Lambda)"),
        DerivedQuantity("gamma_2", eff.gamma_2, "Gamma_2 = 2 lambda_a lambda_b/Lambda"),
        DerivedQuantity("gamma_3", eff.gamma_3, "Gamma_3 = omega_a - omega_b + (lambda_a^2 - lambda_b^2)/Lambda"),
        DerivedQuantity("omega_b_shift", eff.omega_b_shift, "Omega_b = omega_b + lambda_b^2/Lambda"),
    ]
    return Derivation(model=model, effective=eff, quantities=tuple(q))


def perturbative_ratio(eff: EffectiveParams) -> float:
    """``|Lambda| / max(|lambda_a|, |lambda_b|)``; infinite when uncoupled."""
    lam_max = max(abs(eff.model.lambda_a), abs(eff.model.lambda_b))
    return math.inf if lam_max == 0 else abs(eff.Lambda) / lam_max


def check_perturbative(eff: EffectiveParams, threshold: float = 10.0) -> dict:
    """Diagnose the second-order elimination regime.

    The enforced condition is ``|Lambda| >= threshold * max|lambda|``. The
    reversed inequality (couplings much larger than ``Lambda``) is reported
    as ``couplings_exceed_lambda`` for reference only.
    """
    ratio = perturbative_ratio(eff)
    return {
        "ratio": ratio,
        "threshold": threshold,
        "perturbative": bool(ratio >= threshold),
        "couplings_exceed_lambda": bool(ratio < 1.0),
    }


def require_perturbative(eff: EffectiveParams, threshold: float = 10.0) -> None:
    diag = check_perturbative(eff, threshold)
    if not diag["perturbative"]:
        raise DetuningError(
            f"|Lambda|/max|lambda| = {diag['ratio']:.4g} below threshold {threshold} "
            f"(strategy {eff.strategy.value})"
        )


def require_large_detuning(eff: EffectiveParams) -> None:
    if eff.Delta == 0 or abs(eff.Delta) <= eff.G:
        raise DetuningError(
            f"large-detuning precondition violated: |Delta|={abs(eff.Delta):.4g} <= G={eff.G:.4g}"
        )


def build_H0(p: ModelParams, cfg: FockConfig) -> np.ndarray:
    a, b = mode_operators(cfg)
    return (
        p.omega_a * a.conj().T @ a
        + p.omega_b * b.conj().T @ b
        + 0.5 * p.epsilon * embed3(SIGMA_Z, None, None, cfg)
    )


def build_coupling(p: ModelParams, cfg: FockConfig) -> np.ndarray:
    """Interaction part of H2: ``lambda_b (b s+ + s- b^dag) + i lambda_a (a s+ - a^dag s-)``."""
    a, b = mode_operators(cfg)
    sp = embed3(SIGMA_PLUS, None, None, cfg)
    sm = embed3(SIGMA_MINUS, None, None, cfg)
    return p.lambda_b * (b @ sp + sm @ b.conj().T) + 1j * p.lambda_a * (a @ sp - a.conj().T @ sm)


def build_H2(p: ModelParams, cfg: FockConfig) -> np.ndarray:
    H = build_H0(p, cfg) + build_coupling(p, cfg)
    return 0.5 * (H + H.conj().T)


def build_H1(omega: float, omega_b: float, lam: float, e_j_eff: float, n_b: int) -> np.ndarray:
    """Spin-boson Hamiltonian in the bare charge basis on qubit (x) Fock_b.

    ``e_j_eff`` is ``E_J cos(pi Phi_x / Phi_0)``.
    """
    b = annihilation_op(n_b)
    ib = np.eye(n_b)
    sz = np.diag([1.0, -1.0]).astype(complex)
    sx = np.array([[0, 1], [1, 0]], dtype=complex)
    return (
        0.5 * omega * np.kron(sz, ib)
        + omega_b * np.kron(np.eye(2), b.conj().T @ b)
        + lam * np.kron(sz, b + b.conj().T)
        - 0.5 * e_j_eff * np.kron(sx, ib)
    )


def excitation_number(cfg: FockConfig) -> np.ndarray:
    """``a^dag a + b^dag b + s+ s-``, conserved by H2."""
    a, b = mode_operators(cfg)
    return a.conj().T @ a + b.conj().T @ b + embed3(PROJ_E, None, None, cfg)


def normal_modes(beta: float, cfg: FockConfig):
    """``A = b cos(beta) + i a sin(beta)`` and ``B = b sin(beta) - i a cos(beta)``."""
    a, b = mode_operators(cfg)
    A = math.cos(beta) * b + 1j * math.sin(beta) * a
    B = math.sin(beta) * b - 1j * math.cos(beta) * a
    return A, B


def build_H3(eff: EffectiveParams, cfg: FockConfig, as_printed: bool = False) -> np.ndarray:
    """Degenerate-mode effective Hamiltonian after eliminating the qubit.

    The default is the second-order result ``H0 + [V, S]/2``::

        w_a (A^dag A + B^dag B) + (eps/2) s_z + delta (A^dag A s_z + s+ s-)

    so that the ``|g>`` sector has normal-mode frequencies ``w_a - delta``
    and ``w_a``. ``as_printed=True`` returns the literal alternative form
    ``w_a (A^dag A + B^dag B) + (eps/2 - delta) s_z - delta A^dag A s_z``,
    whose Stark term carries the opposite sign.
    """
    require_large_detuning(eff)
    A, B = normal_modes(eff.beta, cfg)
    nA = A.conj().T @ A
    nB = B.conj().T @ B
    sz = embed3(SIGMA_Z, None, None, cfg)
    p = eff.model
    if as_printed:
        H = p.omega_a * (nA + nB) + (0.5 * p.epsilon - eff.delta) * sz - eff.delta * nA @ sz
    else:
        pe = embed3(PROJ_E, None, None, cfg)
        H = p.omega_a * (nA + nB) + 0.5 * p.epsilon * sz + eff.delta * (nA @ sz + pe)
    return 0.5 * (H + H.conj().T)


def _require_lambda(eff: EffectiveParams) -> None:
    if eff.Lambda == 0 or not math.isfinite(eff.Lambda):
        raise DetuningError(f"Lambda = {eff.Lambda!r} under strategy {eff.strategy.value}")


def build_H4(eff: EffectiveParams, cfg: FockConfig) -> np.ndarray:
    """Non-degenerate effective Hamiltonian with dispersive ``s_z`` couplings."""
    _require_lambda(eff)
    p, Lam = eff.model, eff.Lambda
    a, b = mode_operators(cfg)
    na, nb = a.conj().T @ a, b.conj().T @ b
    sz = embed3(SIGMA_Z, None, None, cfg)
    H = (
        p.omega_a * na
        + p.omega_b * nb
        + 0.5 * eff.Omega * sz
        + (p.lambda_a**2 / Lam * na + p.lambda_b**2 / Lam * nb) @ sz
        + 1j * p.lambda_a * p.lambda_b / Lam * (a @ b.conj().T - a.conj().T @ b) @ sz
    )
    return 0.5 * (H + H.conj().T)


def so3_coefficients(eff: EffectiveParams, sector: str = "g") -> tuple[float, float, float]:
    """``(Gamma_0, Gamma_2, Gamma_3)`` of the two-boson Hamiltonian for a qubit sector.

    Sector ``"e"`` (``s_z = +1``) reproduces the stored ``gamma_*`` fields;
    sector ``"g"`` flips the sign of every ``1/Lambda`` term.
    """
    _require_lambda(eff)
    if sector not in ("g", "e"):
        raise ValueError(f"sector must be 'g' or 'e', got {sector!r}")
    s = 1.0 if sector == "e" else -1.0
    p, Lam = eff.model, eff.Lambda
    g0 = 0.5 * (p.omega_a + p.omega_b) + s * (p.lambda_a**2 + p.lambda_b**2) / (2 * Lam)
    g2 = s * 2 * p.lambda_a * p.lambda_b / Lam
    g3 = p.omega_a - p.omega_b + s * (p.lambda_a**2 - p.lambda_b**2) / Lam
    return g0, g2, g3


def so3_angle(gamma_2: float, gamma_3: float) -> float:
    """Rotation angle with ``tan(beta) = Gamma_2 / Gamma_3``, ``cos(beta) = Gamma_3 / Gamma~``."""
    return math.atan2(gamma_2, gamma_3)


def build_H4prime(eff: EffectiveParams, cfg: FockConfig, sector: str = "g") -> np.ndarray:
    """``Gamma_0 N + Gamma_2 J_y + Gamma_3 J_z`` on the two-boson space."""
    g0, g2, g3 = so3_coefficients(eff, sector)
    jx, jy, jz, n_tot = jordan_schwinger(cfg)
    H = g0 * n_tot + g2 * jy + g3 * jz
    return 0.5 * (H + H.conj().T)


def qubit_block(op: np.ndarray, cfg: FockConfig, sector: str = "g") -> np.ndarray:
    """Block of a full-space operator within one qubit sector."""
    q = {"g": 0, "e": 1}[sector]
    sl = slice(q * cfg.mode_dim, (q + 1) * cfg.mode_dim)
    return op[sl, sl]


def build_He(eff: EffectiveParams, mu: float, phi: float, n_b: int) -> np.ndarray:
    """Driven NAMR ``Omega_b b^dag b + i (Gamma_2/2) mu (e^{-i phi} b^dag - e^{i phi} b)``."""
    _require_lambda(eff)
    if mu < 0:
        raise ValueError("drive amplitude mu must be non-negative")
    b = annihilation_op(n_b)
    bd = b.conj().T
    wb = eff.omega_b_shift
    if wb != 0 and abs(eff.gamma_2 * mu / wb) > math.sqrt(n_b) / 3:
        warnings.warn(
            f"drive Gamma_2 mu/Omega_b = {abs(eff.gamma_2 * mu / wb):.3g} risks truncation leakage at n_b={n_b}",
            stacklevel=2,
        )
    H = wb * bd @ b + 0.5j * eff.gamma_2 * mu * (np.exp(-1j * phi) * bd - np.exp(1j * phi) * b)
    return 0.5 * (H + H.conj().T)


def build_Ha_drive(eff: EffectiveParams, mu: float, phi: float, n_a: int) -> np.ndarray:
    """Mirror of :func:`build_He` with the roles of the two modes swapped.

    The NAMR is the classical drive and the TLR mode is displaced; the
    shifted frequency is ``omega_a + lambda_a^2 / Lambda``. This is an
    extrapolation by symmetry, not a separately derived model.
    """
    _require_lambda(eff)
    a = annihilation_op(n_a)
    ad = a.conj().T
    wa = eff.model.omega_a + eff.model.lambda_a**2 / eff.Lambda
    H = wa * ad @ a + 0.5j * eff.gamma_2 * mu * (np.exp(-1j * phi) * ad - np.exp(1j * phi) * a)
    return 0.5 * (H + H.conj().T)


def drive_amplitude(mu: float, phi: float) -> complex:
    """Classical TLR amplitude ``xi = mu exp(-i phi)``."""
    return mu * complex(math.cos(phi), -math.sin(phi))


def build_Hc(p: ModelParams, xi: complex, n_b: int) -> np.ndarray:
    """Driven Jaynes-Cummings model on qubit (x) Fock_b."""
    b = annihilation_op(n_b)
    ib = np.eye(n_b)
    coupling = np.kron(SIGMA_PLUS, p.lambda_b * b + 1j * p.lambda_a * xi * ib)
    H = (
        0.5 * p.epsilon * np.kron(SIGMA_Z, ib)
        + p.omega_b * np.kron(np.eye(2), b.conj().T @ b)
        + coupling
        + coupling.conj().T
    )
    return 0.5 * (H + H.conj().T)


def fn_generator_S(eff: EffectiveParams, cfg: FockConfig) -> np.ndarray:
    """Anti-Hermitian generator eliminating the qubit in the degenerate case.

    Oriented for the conjugation ``exp(-S) H2 exp(S)``:
    ``S = G (A^dag s- - A s+) / Delta``.
    """
    require_large_detuning(eff)
    A, _ = normal_modes(eff.beta, cfg)
    sp = embed3(SIGMA_PLUS, None, None, cfg)
    sm = embed3(SIGMA_MINUS, None, None, cfg)
    return eff.G / eff.Delta * (A.conj().T @ sm - A @ sp)


def fn_generator_W(eff: EffectiveParams, cfg: FockConfig, Lambda: float | None = None) -> np.ndarray:
    """``W = -i (lambda_a/L)(a s+ + a^dag s-) - (lambda_b/L)(b s+ - b^dag s-)``."""
    Lam = eff.Lambda if Lambda is None else Lambda
    if Lam == 0 or not math.isfinite(Lam):
        raise DetuningError(f"Lambda = {Lam!r}")
    p = eff.model
    a, b = mode_operators(cfg)
    sp = embed3(SIGMA_PLUS, None, None, cfg)
    sm = embed3(SIGMA_MINUS, None, None, cfg)
    return -1j * p.lambda_a / Lam * (a @ sp + a.conj().T @ sm) - p.lambda_b / Lam * (b @ sp - b.conj().T @ sm)


def fn_transform(H: np.ndarray, X: np.ndarray, order: int | None = 2) -> np.ndarray:
    """``exp(-X) H exp(X)``, either exactly (``order=None``) or as a BCH series."""
    if order is None:
        from scipy.linalg import expm

        return expm(-X) @ H @ expm(X)
    out = H.copy()
    term = H
    for k in range(1, order + 1):
        term = commutator(term, X) / k
        out = out + term
    return out


def first_order_residual(H2: np.ndarray, H0: np.ndarray, W: np.ndarray, cfg: FockConfig | None = None) -> float:
    """Largest singular value of ``H2 - H0 + [H0, W]`` on the interior subspace."""
    R = H2 - H0 + commutator(H0, W)
    if cfg is not None:
        R = restrict(R, interior_indices(cfg))
    return float(np.linalg.norm(R, 2))


def cancelling_detunings(p: ModelParams) -> dict:
    """Per-mode ``Lambda`` that zeroes each first-order coupling, and the residual coefficients.

    For a single ``Lambda`` the leftover coupling of mode ``k`` is
    ``lambda_k (1 - (eps - w_k)/Lambda)``.
    """
    return {"Lambda_a": p.epsilon - p.omega_a, "Lambda_b": p.epsilon - p.omega_b}


def residual_coefficients(p: ModelParams, Lambda: float) -> tuple[float, float]:
    return (
        p.lambda_a * (1 - (p.epsilon - p.omega_a) / Lambda),
        p.lambda_b * (1 - (p.epsilon - p.omega_b) / Lambda),
    )


def projector_g(cfg: FockConfig) -> np.ndarray:
    return embed3(PROJ_G, None, None, cfg)
