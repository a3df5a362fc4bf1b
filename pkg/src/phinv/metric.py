"""Time-dependent metric from the SU(1,1) Gauss factorization.

The Hermitian map rho = exp[vtheta_plus*K+] * vtheta0^{K0} * exp[vtheta_minus*K-]
and the metric eta = rho^dag rho are built in factored form only, which gives
an analytic inverse (reversed factors, negated parameters) and keeps every
factor exactly representable after truncation.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .errors import NoPreimageError, NumericsError, SingularMetricError
from .fock import adjoint, cached_operator_set

_SERIES_CUTOFF = 1e-6


def _even_cosh(theta_sq: float) -> float:
    """cosh(theta) as an even analytic function of theta^2."""
    if abs(theta_sq) < _SERIES_CUTOFF:
        total, term = 0.0, 1.0
        for k in range(8):
            if k:
                term *= theta_sq / ((2 * k - 1) * (2 * k))
            total += term
        return total
    if theta_sq > 0:
        return math.cosh(math.sqrt(theta_sq))
    return math.cos(math.sqrt(-theta_sq))


def _even_sinhc(theta_sq: float) -> float:
    """sinh(theta)/theta as an even analytic function of theta^2."""
    if abs(theta_sq) < _SERIES_CUTOFF:
        total, term = 0.0, 1.0
        for k in range(8):
            if k:
                term *= theta_sq / ((2 * k) * (2 * k + 1))
            total += term
        return total
    if theta_sq > 0:
        t = math.sqrt(theta_sq)
        return math.sinh(t) / t
    t = math.sqrt(-theta_sq)
    return math.sin(t) / t


@dataclass(frozen=True)
class GaussParams:
    """Factorization data of the metric map.

    epsilon/mu are None when the params came from an ODE state rather than
    from the generator pair (the factored form needs only the vtheta values).
    """

    epsilon: float | None
    mu: float | None
    theta_sq: float | None
    vtheta_plus: float
    vtheta_zero: float
    vtheta_minus: float
    chi: float
    phi_cap: float

    def validate(self) -> "GaussParams":
        th0 = self.vtheta_zero
        if not th0 > 0:
            raise SingularMetricError(f"vtheta_zero must be positive, got {th0}")
        if abs(self.vtheta_plus - self.vtheta_minus) > 1e-12 * max(1.0, abs(self.vtheta_plus)):
            raise NumericsError("vtheta_plus != vtheta_minus (non-Hermitian rho)")
        phi, chi = self.phi_cap, self.chi
        scale = max(1.0, abs(th0))
        if abs(th0 - (phi * phi - chi)) > 1e-12 * scale:
            raise NumericsError("vtheta_zero != phi_cap^2 - chi")
        lhs = (phi * phi + chi) ** 2 - 4 * chi * phi * phi
        if abs(lhs - th0 * th0) > 1e-12 * max(1.0, th0 * th0):
            raise NumericsError("(phi^2+chi)^2 - 4 chi phi^2 != vtheta_zero^2")
        return self


def gauss_params(epsilon: float, mu: float) -> GaussParams:
    """Factorization parameters from the generator pair (epsilon, mu).

    Evaluated through even functions of theta^2 = epsilon^2 - 4 mu^2, so the
    hyperbolic/trigonometric branch change is automatic and continuous.
    """
    theta_sq = epsilon * epsilon - 4 * mu * mu
    c = float(_even_cosh(theta_sq))
    s = float(_even_sinhc(theta_sq))
    d = float(c - epsilon * s)
    if not math.isfinite(d) or not math.isfinite(d * d):
        raise SingularMetricError(
            f"factorization overflows at (epsilon={epsilon}, mu={mu})"
        )
    if abs(d) <= 1e-12 * max(1.0, abs(c), abs(epsilon * s)):
        raise SingularMetricError(
            f"factorization denominator vanishes at (epsilon={epsilon}, mu={mu})"
        )
    vtheta_plus = 2 * mu * s / d
    vtheta_zero = 1.0 / (d * d)
    chi = -(c + epsilon * s) / d
    return GaussParams(
        epsilon=epsilon,
        mu=mu,
        theta_sq=theta_sq,
        vtheta_plus=vtheta_plus,
        vtheta_zero=vtheta_zero,
        vtheta_minus=vtheta_plus,
        chi=chi,
        phi_cap=-vtheta_plus,
    ).validate()


def params_from_state(phi_cap: float, vtheta_zero: float) -> GaussParams:
    """Factorization parameters straight from the ODE state (Phi, vtheta0)."""
    if not vtheta_zero > 0:
        raise SingularMetricError(f"vtheta_zero must be positive, got {vtheta_zero}")
    chi = phi_cap * phi_cap - vtheta_zero
    return GaussParams(
        epsilon=None,
        mu=None,
        theta_sq=None,
        vtheta_plus=-phi_cap,
        vtheta_zero=vtheta_zero,
        vtheta_minus=-phi_cap,
        chi=chi,
        phi_cap=phi_cap,
    ).validate()


def ladder_exp(tau: float, dim: int, raising: bool) -> np.ndarray:
    """exp(tau * K+) or exp(tau * K-) from the closed-form band entries.

    The (n+2k, n) entry of exp(tau a_dag^2 / 2) is
    (tau/2)^k / k! * sqrt((n+2k)!/n!), accumulated by a stable product
    recurrence; the lowering case is its transpose pattern. Entry for entry
    this equals the truncated Taylor sum of the truncated generator, just
    without the chain of matrix products.
    """
    m = np.zeros((dim, dim))
    coef = np.ones(dim)
    n_idx = np.arange(dim, dtype=float)
    for k in range(1, (dim - 1) // 2 + 1):
        width = dim - 2 * k
        coef = coef[:width] * (tau / (2 * k)) * np.sqrt(
            (n_idx[:width] + 2 * k - 1) * (n_idx[:width] + 2 * k)
        )
        rows = np.arange(width) + 2 * k
        cols = np.arange(width)
        if raising:
            m[rows, cols] = coef
        else:
            m[cols, rows] = coef
    np.fill_diagonal(m, 1.0)
    return m


def _k0_power(base: float, dim: int) -> np.ndarray:
    """Diagonal of base^{K0} with K0 = diag(n/2 + 1/4)."""
    return np.power(base, np.arange(dim) / 2.0 + 0.25)


def build_rho(g: GaussParams, dim: int) -> np.ndarray:
    """Factored metric map; the lowering factor acts first, so the truncated
    product is the exact truncation of the full-space operator.

    Results are cached by parameter value and returned read-only; residual
    sweeps revisit the same state many times through overlapping stencils.
    """
    return _rho_cached(g.vtheta_plus, g.vtheta_zero, g.vtheta_minus, dim)


@lru_cache(maxsize=256)
def _rho_cached(vp: float, vz: float, vm: float, dim: int) -> np.ndarray:
    e_plus = ladder_exp(vp, dim, raising=True)
    mid = _k0_power(vz, dim)
    e_minus = ladder_exp(vm, dim, raising=False)
    out = e_plus @ (mid[:, None] * e_minus)
    out.setflags(write=False)
    return out


def build_rho_inverse(g: GaussParams, dim: int) -> np.ndarray:
    """Analytic inverse: reversed factors with negated/reciprocal parameters."""
    return _rho_inv_cached(g.vtheta_plus, g.vtheta_zero, g.vtheta_minus, dim)


@lru_cache(maxsize=256)
def _rho_inv_cached(vp: float, vz: float, vm: float, dim: int) -> np.ndarray:
    e_minus = ladder_exp(-vm, dim, raising=False)
    mid = _k0_power(1.0 / vz, dim)
    e_plus = ladder_exp(-vp, dim, raising=True)
    out = e_minus @ (mid[:, None] * e_plus)
    out.setflags(write=False)
    return out


def build_eta(g: GaussParams, dim: int) -> np.ndarray:
    return _eta_cached(g.vtheta_plus, g.vtheta_zero, g.vtheta_minus, dim)


@lru_cache(maxsize=256)
def _eta_cached(vp: float, vz: float, vm: float, dim: int) -> np.ndarray:
    rho = _rho_cached(vp, vz, vm, dim)
    out = adjoint(rho) @ rho
    out.setflags(write=False)
    return out


def conjugate_k(g: GaussParams, which: str, dim: int) -> np.ndarray:
    """Closed form of rho K rho^{-1} expanded over K+, K0, K-."""
    ops = cached_operator_set(dim)
    vp, vz, vm, chi = g.vtheta_plus, g.vtheta_zero, g.vtheta_minus, g.chi
    if which == "minus":
        combo = -2 * vp * ops.k_zero + ops.k_minus + vp * vp * ops.k_plus
    elif which == "zero":
        combo = -(vm * vp + chi) * ops.k_zero + vm * ops.k_minus + chi * vp * ops.k_plus
    elif which == "plus":
        combo = -2 * vm * chi * ops.k_zero + vm * vm * ops.k_minus + chi * chi * ops.k_plus
    else:
        raise ValueError(f"which must be 'plus', 'zero', or 'minus', got {which!r}")
    return combo / vz


def invert_gauss_params(phi_cap: float, vtheta_zero: float) -> tuple[float, float]:
    """Recover (epsilon, mu) from (Phi, vtheta0) by damped 2D Newton iteration."""
    if not vtheta_zero > 0:
        raise SingularMetricError(f"vtheta_zero must be positive, got {vtheta_zero}")
    target = np.array([phi_cap, vtheta_zero])

    def residual(eps: float, mu: float) -> np.ndarray:
        g = gauss_params(eps, mu)
        return np.array([g.phi_cap, g.vtheta_zero]) - target

    eps = 0.5 * math.log(vtheta_zero)
    g0 = gauss_params(eps, 0.0)
    s0 = _even_sinhc(eps * eps)
    d0 = 1.0 / math.sqrt(g0.vtheta_zero)
    mu = -phi_cap * d0 / (2 * s0)
    try:
        f = residual(eps, mu)
    except (SingularMetricError, OverflowError):
        eps, mu = 0.0, 0.0
        f = residual(eps, mu)
    h = 1e-7
    for _ in range(100):
        if np.linalg.norm(f) <= 1e-10:
            return eps, mu
        try:
            fe = residual(eps + h, mu)
            fm = residual(eps, mu + h)
            jac = np.column_stack([(fe - f) / h, (fm - f) / h])
            step = np.linalg.solve(jac, -f)
        except (SingularMetricError, OverflowError, np.linalg.LinAlgError) as exc:
            raise NoPreimageError(
                f"no (epsilon, mu) preimage found for (Phi={phi_cap}, vtheta0={vtheta_zero})"
            ) from exc
        damp = 1.0
        for _ in range(10):
            try:
                f_new = residual(eps + damp * step[0], mu + damp * step[1])
            except (SingularMetricError, OverflowError):
                damp /= 2
                continue
            if np.linalg.norm(f_new) < np.linalg.norm(f):
                break
            damp /= 2
        else:
            raise NoPreimageError(
                f"Newton stalled for (Phi={phi_cap}, vtheta0={vtheta_zero})"
            )
        eps, mu = eps + damp * step[0], mu + damp * step[1]
        f = f_new
    raise NoPreimageError(
        f"Newton did not converge in 100 iterations for (Phi={phi_cap}, vtheta0={vtheta_zero})"
    )
