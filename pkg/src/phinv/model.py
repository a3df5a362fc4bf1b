"""Generalized Swanson Hamiltonian with a time-dependent metric.

Implements the coefficient constraints that keep the transformed frequency
real, the reduced metric flow, the pseudo-Hermitian invariant, the
transformed coefficients (W, U, V), the phase integrals, and assembly of the
exact solutions sum_n C_n exp(i gamma_n) rho^{-1}|n>.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from typing import Callable, Mapping, Sequence

import numpy as np
from scipy.integrate import cumulative_simpson

from .errors import (
    ConstraintSingularityError,
    DomainError,
    GuardError,
    NonRealPhaseError,
    ShapeError,
    SingularMetricError,
    TruncationWarning,
)
from .fock import basis_state, cached_operator_set, tail_support
from .metric import GaussParams, build_rho_inverse, params_from_state

VTHETA_FLOOR = 1e-8
DENOM_FLOOR = 1e-8
TAIL_WARN = 1e-8
TAIL_ABORT = 1e-6


@dataclass(frozen=True)
class MetricState:
    """One point of the metric flow: (Phi, vtheta0), with chi derived."""

    phi_cap: float
    vtheta_zero: float

    def __post_init__(self):
        if not self.vtheta_zero > 0:
            raise SingularMetricError(
                f"vtheta_zero must be positive, got {self.vtheta_zero}"
            )

    @property
    def chi(self) -> float:
        return self.phi_cap * self.phi_cap - self.vtheta_zero

    @property
    def constraint_denominator(self) -> float:
        """2 Phi^2 - vtheta0, the denominator of the coefficient constraints."""
        return self.phi_cap * self.phi_cap + self.chi

    def gauss(self) -> GaussParams:
        return params_from_state(self.phi_cap, self.vtheta_zero)


@dataclass(frozen=True)
class HamiltonianCoefficients:
    """(omega, alpha, beta) at one time, with polar views."""

    omega: complex
    alpha: complex
    beta: complex

    @property
    def moduli(self) -> tuple[float, float, float]:
        return abs(self.omega), abs(self.alpha), abs(self.beta)

    @property
    def angles(self) -> tuple[float, float, float]:
        return (
            math.atan2(self.omega.imag, self.omega.real),
            math.atan2(self.alpha.imag, self.alpha.real),
            math.atan2(self.beta.imag, self.beta.real),
        )


@dataclass(frozen=True)
class InvariantCoefficients:
    delta1: float
    delta2: float
    delta3: float

    @classmethod
    def from_state(cls, s: MetricState) -> "InvariantCoefficients":
        th0 = s.vtheta_zero
        phi, chi = s.phi_cap, s.chi
        return cls(
            delta1=-(phi * phi + chi) / th0,
            delta2=-chi * phi / th0,
            delta3=-phi / th0,
        )


@dataclass(frozen=True)
class TransformedCoefficients:
    w: complex
    u: complex
    v: complex


def hamiltonian_matrix(c: HamiltonianCoefficients, dim: int) -> np.ndarray:
    """H = omega (a_dag a + 1/2) + alpha a^2 + beta a_dag^2."""
    ops = cached_operator_set(dim)
    return 2 * c.omega * ops.k_zero + 2 * c.alpha * ops.k_minus + 2 * c.beta * ops.k_plus


def derive_constrained_coeffs(
    s: MetricState, re_omega: float, im_omega: float, im_beta: float
) -> HamiltonianCoefficients:
    """Fill alpha and Re beta so the coefficient relations hold identically.

    Re beta = Phi Re omega / (Phi^2 + chi); Re alpha = chi Phi Re omega /
    (Phi^2 + chi); Im alpha = Phi Im omega - chi Im beta (the reality
    condition on the transformed frequency).
    """
    denom = s.constraint_denominator
    if abs(denom) <= DENOM_FLOOR:
        raise ConstraintSingularityError(
            f"constraint denominator 2 Phi^2 - vtheta0 = {denom:.3e} is singular"
        )
    phi, chi = s.phi_cap, s.chi
    re_beta = phi * re_omega / denom
    re_alpha = chi * phi * re_omega / denom
    im_alpha = phi * im_omega - chi * im_beta
    return HamiltonianCoefficients(
        omega=complex(re_omega, im_omega),
        alpha=complex(re_alpha, im_alpha),
        beta=complex(re_beta, im_beta),
    )


def constraint_residuals(s: MetricState, c: HamiltonianCoefficients) -> dict[str, float]:
    """Absolute residuals of the three coefficient relations, multiplied
    through by the constraint denominator (no division)."""
    phi, chi = s.phi_cap, s.chi
    denom = s.constraint_denominator
    return {
        "re_beta": abs(c.beta.real * denom - phi * c.omega.real),
        "re_alpha": abs(c.alpha.real * denom - chi * phi * c.omega.real),
        "im_alpha": abs(c.alpha.imag - phi * c.omega.imag + chi * c.beta.imag),
    }


def metric_rhs(s: MetricState, im_omega: float, im_beta: float) -> tuple[float, float]:
    """Reduced metric flow: dPhi = 2 vtheta0 Im beta,
    dvtheta0 = 2 vtheta0 (-Im omega + 2 Phi Im beta).

    These are the rates consistent with the defining metric-flow relation
    d(eta)/dt = -i (H^dag eta - eta H); see raw_metric_rates for the
    unreduced forms they compress.
    """
    th0 = s.vtheta_zero
    dphi = 2 * th0 * im_beta
    dth0 = 2 * th0 * (-im_omega + 2 * s.phi_cap * im_beta)
    return dphi, dth0


def raw_metric_rates(s: MetricState, c: HamiltonianCoefficients) -> tuple[float, float]:
    """Unreduced metric-flow rates in terms of the full coefficients.

    The vtheta0 rate divides by Phi, so Phi = 0 is outside its domain; the
    reduced form in metric_rhs has no such division.
    """
    phi, chi, th0 = s.phi_cap, s.chi, s.vtheta_zero
    im_o, im_a, im_b = c.omega.imag, c.alpha.imag, c.beta.imag
    dphi = 2 * (-phi * im_o + im_a + phi * phi * im_b)
    if phi == 0.0:
        raise DomainError("raw vtheta0 rate divides by Phi")
    dth0 = (2 * th0 / phi) * (
        -2 * phi * im_o + im_a + (2 * phi * phi + chi) * im_b
    )
    return dphi, dth0


def invariant_ph(s: MetricState, dim: int) -> np.ndarray:
    """I = -(2/vtheta0)[(Phi^2+chi) K0 + chi Phi K- + Phi K+]
    = 2 delta1 K0 + 2 delta2 K- + 2 delta3 K+."""
    ops = cached_operator_set(dim)
    d = InvariantCoefficients.from_state(s)
    return 2 * d.delta1 * ops.k_zero + 2 * d.delta2 * ops.k_minus + 2 * d.delta3 * ops.k_plus


def wuv_coefficients(
    s: MetricState, c: HamiltonianCoefficients, dphi: float, dvtheta0: float
) -> TransformedCoefficients:
    """Transformed coefficients from the unsimplified definitions (no
    division by Phi). Along constrained trajectories U and V vanish and W is
    real."""
    phi, chi, th0 = s.phi_cap, s.chi, s.vtheta_zero
    om, al, be = c.omega, c.alpha, c.beta
    w = (om * (phi * phi + chi) - 2 * phi * (al + be * chi)
         - 0.5j * (dvtheta0 - 2 * phi * dphi)) / th0
    u = (om * phi - al - be * phi * phi + 0.5j * dphi) / th0
    v = (om * chi * phi - al * phi * phi - be * chi * chi
         + 0.5j * (th0 * dphi + phi * phi * dphi - phi * dvtheta0)) / th0
    return TransformedCoefficients(w=w, u=u, v=v)


@dataclass
class MetricTrajectory:
    """Metric flow integrated on a dense grid, with everything derived.

    The report grid is times = dense_times[::stride]; residual meters and the
    CSV live on the report grid while quadrature uses the dense grid.
    """

    times: np.ndarray
    dt: float
    stride: int
    dense_times: np.ndarray
    phi: np.ndarray
    vtheta0: np.ndarray
    omega: np.ndarray
    alpha: np.ndarray
    beta: np.ndarray
    dphi: np.ndarray
    dvtheta0: np.ndarray
    w: np.ndarray
    mode: str
    quantum_numbers: tuple[int, ...]
    superposition: dict[int, complex]
    phases: dict[int, np.ndarray] = field(default_factory=dict)

    @property
    def n_times(self) -> int:
        return len(self.times)

    def _dense_index(self, t_index: int) -> int:
        if not 0 <= t_index < self.n_times:
            raise ShapeError(f"time index {t_index} out of range")
        return t_index * self.stride

    def state_at(self, t_index: int) -> MetricState:
        j = self._dense_index(t_index)
        return MetricState(float(self.phi[j]), float(self.vtheta0[j]))

    def coeffs_at(self, t_index: int) -> HamiltonianCoefficients:
        j = self._dense_index(t_index)
        return HamiltonianCoefficients(
            complex(self.omega[j]), complex(self.alpha[j]), complex(self.beta[j])
        )

    def rates_at(self, t_index: int) -> tuple[float, float]:
        j = self._dense_index(t_index)
        return float(self.dphi[j]), float(self.dvtheta0[j])

    def w_at(self, t_index: int) -> complex:
        return complex(self.w[self._dense_index(t_index)])

    def gauss_at(self, t_index: int) -> GaussParams:
        s = self.state_at(t_index)
        return params_from_state(s.phi_cap, s.vtheta_zero)

    def max_im_w(self) -> float:
        return float(np.max(np.abs(self.w.imag)))


def _rk4_step(f, y: np.ndarray, t: float, h: float) -> np.ndarray:
    k1 = f(y, t)
    k2 = f(y + 0.5 * h * k1, t + 0.5 * h)
    k3 = f(y + 0.5 * h * k2, t + 0.5 * h)
    k4 = f(y + h * k3, t + h)
    return y + (h / 6.0) * (k1 + 2 * k2 + 2 * k3 + k4)


def integrate_metric(
    initial: MetricState,
    omega: Callable[[float], complex],
    t_max: float,
    dt: float,
    *,
    im_beta: Callable[[float], float] | None = None,
    alpha: Callable[[float], complex] | None = None,
    beta: Callable[[float], complex] | None = None,
    quantum_numbers: Sequence[int] = (0,),
    superposition: Mapping[int, complex] | None = None,
    stride: int = 8,
    local_error_tol: float = 1e-8,
    im_w_tol: float = 1e-10,
) -> MetricTrajectory:
    """Integrate the reduced metric flow and derive everything on the grid.

    Generator mode (im_beta given): alpha and Re beta are filled from the
    constraints at every step, so all relations hold by construction.
    Check mode (alpha and beta given): the supplied coefficients are recorded
    as-is and only the flow uses their imaginary parts; residuals are the
    caller's to inspect.

    Classic RK4 at dt/stride substeps; every substep is re-run as two half
    steps for a local error estimate (abort above local_error_tol). The flow
    stops with a structured guard error if vtheta0 falls to its floor or the
    constraint denominator 2 Phi^2 - vtheta0 reaches or crosses zero.
    """
    generator = im_beta is not None
    if generator and (alpha is not None or beta is not None):
        raise ValueError("give either im_beta (generator) or alpha+beta (check)")
    if not generator and (alpha is None or beta is None):
        raise ValueError("check mode needs both alpha and beta")

    steps = round(t_max / dt)
    if steps < 1 or abs(steps * dt - t_max) > 1e-9 * max(1.0, t_max):
        raise ValueError(f"t_max={t_max} is not a positive multiple of dt={dt}")
    h = dt / stride
    n_dense = steps * stride
    dense_times = np.linspace(0.0, t_max, n_dense + 1)

    def im_beta_of(t: float) -> float:
        return im_beta(t) if generator else beta(t).imag

    def rhs(y: np.ndarray, t: float) -> np.ndarray:
        th0 = y[1]
        if th0 <= 0:
            raise GuardError("vtheta-zero-floor", t, f"vtheta0={th0:.3e}")
        ib = im_beta_of(t)
        io = omega(t).imag
        return np.array([2 * th0 * ib, 2 * th0 * (-io + 2 * y[0] * ib)])

    phi = np.empty(n_dense + 1)
    th0 = np.empty(n_dense + 1)
    phi[0], th0[0] = initial.phi_cap, initial.vtheta_zero
    y = np.array([initial.phi_cap, initial.vtheta_zero])
    denom_prev = initial.constraint_denominator
    _check_flow_guards(y, 0.0, denom_prev)
    for i in range(n_dense):
        t = dense_times[i]
        full = _rk4_step(rhs, y, t, h)
        half = _rk4_step(rhs, y, t, h / 2)
        half = _rk4_step(rhs, half, t + h / 2, h / 2)
        err = float(np.max(np.abs(full - half))) / 15.0
        if err > local_error_tol:
            raise GuardError("local-error", t, f"estimate {err:.3e} > {local_error_tol:.1e}")
        y = half
        t_next = dense_times[i + 1]
        denom = y[0] * y[0] + (y[0] * y[0] - y[1])
        if denom_prev * denom < 0:
            raise GuardError(
                "constraint-denominator", t_next,
                "2 Phi^2 - vtheta0 changed sign between steps",
            )
        _check_flow_guards(y, t_next, denom)
        denom_prev = denom
        phi[i + 1], th0[i + 1] = y

    if generator:
        io = np.array([omega(t).imag for t in dense_times])
        ro = np.array([omega(t).real for t in dense_times])
        ib = np.array([im_beta(t) for t in dense_times])
        chi = phi * phi - th0
        denom = phi * phi + chi
        rb = phi * ro / denom
        ra = chi * phi * ro / denom
        ia = phi * io - chi * ib
        omega_arr = ro + 1j * io
        alpha_arr = ra + 1j * ia
        beta_arr = rb + 1j * ib
    else:
        omega_arr = np.array([complex(omega(t)) for t in dense_times])
        alpha_arr = np.array([complex(alpha(t)) for t in dense_times])
        beta_arr = np.array([complex(beta(t)) for t in dense_times])
        chi = phi * phi - th0

    dphi_arr = 2 * th0 * beta_arr.imag
    dth0_arr = 2 * th0 * (-omega_arr.imag + 2 * phi * beta_arr.imag)
    w_arr = (
        omega_arr * (phi * phi + chi)
        - 2 * phi * (alpha_arr + beta_arr * chi)
        - 0.5j * (dth0_arr - 2 * phi * dphi_arr)
    ) / th0

    traj = MetricTrajectory(
        times=dense_times[::stride].copy(),
        dt=dt,
        stride=stride,
        dense_times=dense_times,
        phi=phi,
        vtheta0=th0,
        omega=omega_arr,
        alpha=alpha_arr,
        beta=beta_arr,
        dphi=dphi_arr,
        dvtheta0=dth0_arr,
        w=w_arr,
        mode="generator" if generator else "check",
        quantum_numbers=tuple(sorted(set(int(n) for n in quantum_numbers))),
        superposition=dict(superposition or {}),
    )
    if generator and traj.max_im_w() > im_w_tol:
        raise NonRealPhaseError(
            f"max |Im W| = {traj.max_im_w():.3e} exceeds {im_w_tol:.1e}"
        )
    for n in traj.quantum_numbers:
        traj.phases[n] = phase(n, traj)
    return traj


def _check_flow_guards(y: np.ndarray, t: float, denom: float) -> None:
    if y[1] <= VTHETA_FLOOR:
        raise GuardError("vtheta-zero-floor", t, f"vtheta0={y[1]:.3e}")
    if abs(denom) <= DENOM_FLOOR:
        raise GuardError(
            "constraint-denominator", t, f"2 Phi^2 - vtheta0 = {denom:.3e}"
        )


def phase(n: int, traj: MetricTrajectory) -> np.ndarray:
    """gamma_n on the report grid: cumulative Simpson of 2 k_n W with
    k_n = (n + 1/2)/2, so gamma_n' = (n + 1/2) W."""
    if n in traj.phases:
        return traj.phases[n]
    k_n = (n + 0.5) / 2.0
    dense = cumulative_simpson(2 * k_n * traj.w.real, x=traj.dense_times, initial=0.0)
    return dense[:: traj.stride].copy()


def assemble_solution(traj: MetricTrajectory, t_index: int, dim: int) -> np.ndarray:
    """The exact solution sum_n C_n exp(i gamma_n(t)) rho^{-1}(t)|n> at one
    report time. Warns when the result leans on the truncation edge."""
    if not traj.superposition:
        raise ValueError("trajectory has no superposition coefficients")
    rho_inv = build_rho_inverse(traj.gauss_at(t_index), dim)
    out = np.zeros(dim, dtype=complex)
    for n, c_n in traj.superposition.items():
        if n >= dim:
            raise ShapeError(f"quantum number {n} out of range for dim {dim}")
        gamma = traj.phases.get(n)
        if gamma is None:
            gamma = phase(n, traj)
            traj.phases[n] = gamma
        out += c_n * np.exp(1j * gamma[t_index]) * (rho_inv @ basis_state(dim, n))
    frac = tail_support(out)
    if frac > TAIL_WARN:
        warnings.warn(
            f"assembled state holds {frac:.2e} of its weight in the top levels",
            TruncationWarning,
            stacklevel=2,
        )
    return out


def eigenstate(traj: MetricTrajectory, n: int, t_index: int, dim: int) -> np.ndarray:
    """rho^{-1}(t)|n>, the invariant eigenvector at one report time."""
    rho_inv = build_rho_inverse(traj.gauss_at(t_index), dim)
    return rho_inv @ basis_state(dim, n)
