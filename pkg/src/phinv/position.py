"""Position-space form of the invariant and its eigenfunctions.

The invariant's eigenfunctions are weight-orthonormal Gaussians times
Hermite polynomials. This module builds their shape coefficients from a
metric state, evaluates them, checks orthonormality by Simpson quadrature,
builds the canonical quadratic (x, p) form of the invariant, and compares
the closed-form eigenfunctions against the Fock-basis eigenvectors
synthesized on the same grid.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.integrate import simpson

from .errors import DomainError, ShapeError
from .fock import basis_state, cached_operator_set, interior_norm
from .metric import build_rho_inverse
from .model import MetricState, invariant_ph

HERMITE_CAP = 30
EDGE_DECAY = 1e-12
DEFAULT_POINTS = 2001


@dataclass(frozen=True)
class GaussianShape:
    """Quadratic-exponent coefficients of the eigenfunction family.

    width_coeff scales the Hermite argument and the classic weight
    exp(-width x^2); exp_coeff is the Gaussian falloff of each
    eigenfunction; weight_coeff is the exponent of the metric weight factor.
    They satisfy exp_coeff - weight_coeff = width_coeff, which is exactly
    what makes the weighted Gram integrand the standard Hermite one.
    """

    width_coeff: float
    exp_coeff: float
    weight_coeff: float

    def __post_init__(self):
        if not self.width_coeff > 0:
            raise DomainError(
                f"width coefficient {self.width_coeff:.6g} is not positive; "
                "the eigenfunctions are non-normalizable in this regime"
            )
        resid = abs(self.exp_coeff - self.weight_coeff - self.width_coeff)
        scale = max(1.0, abs(self.width_coeff))
        if resid > 1e-12 * scale:
            raise DomainError(
                f"shape identity exp - weight = width violated by {resid:.3e}"
            )

    @classmethod
    def from_state(cls, s: MetricState) -> "GaussianShape":
        phi, chi, th0 = s.phi_cap, s.chi, s.vtheta_zero
        d = (phi - chi) * (1.0 - phi)
        if d == 0:
            raise DomainError("shape denominator (Phi - chi)(1 - Phi) vanishes")
        return cls(
            width_coeff=th0 / d,
            exp_coeff=(th0 + phi * (chi - 1.0)) / d,
            weight_coeff=phi * (chi - 1.0) / d,
        )


def hermite(n: int, y):
    """Physicists' Hermite polynomial by the three-term recurrence."""
    if not 0 <= n <= HERMITE_CAP:
        raise DomainError(f"Hermite order {n} outside [0, {HERMITE_CAP}]")
    y = np.asarray(y, dtype=float)
    h_prev = np.ones_like(y)
    if n == 0:
        return h_prev if h_prev.ndim else float(h_prev)
    h = 2.0 * y
    for k in range(1, n):
        h, h_prev = 2.0 * y * h - 2.0 * k * h_prev, h
    return h if h.ndim else float(h)


@dataclass(frozen=True)
class PositionGrid:
    """Uniform symmetric grid sized so Simpson quadrature is trustworthy."""

    points: np.ndarray
    spacing: float

    def __post_init__(self):
        pts = np.asarray(self.points, dtype=float)
        if pts.ndim != 1 or len(pts) < 3 or len(pts) % 2 == 0:
            raise ShapeError("grid needs an odd number of points, at least 3")
        steps = np.diff(pts)
        if np.any(np.abs(steps - self.spacing) > 1e-9 * max(1.0, self.spacing)):
            raise ShapeError("grid must be uniform")
        if abs(pts[0] + pts[-1]) > 1e-9 * max(1.0, abs(pts[0])):
            raise ShapeError("grid must be symmetric about 0")

    @property
    def extent(self) -> float:
        return float(self.points[-1])

    @classmethod
    def for_shape(
        cls, shape: GaussianShape, n_max: int = 0, n_points: int = DEFAULT_POINTS
    ) -> "PositionGrid":
        """Auto-sized grid: 8 widths of the requested family, extended until
        the highest eigenfunction decays below the edge threshold, with
        spacing that resolves its fastest oscillation by 20+ points."""
        extent = 8.0 / math.sqrt(shape.width_coeff)
        amp = _envelope_edge(shape, n_max, extent)
        while amp > 0.1 * EDGE_DECAY and extent < 64.0 / math.sqrt(shape.width_coeff):
            extent *= 1.2
            amp = _envelope_edge(shape, n_max, extent)
        k_max = math.sqrt((2 * n_max + 1) * max(shape.width_coeff, shape.exp_coeff))
        max_spacing = (2 * math.pi / k_max) / 20.0
        needed = int(math.ceil(2 * extent / max_spacing)) + 1
        if needed > n_points:
            n_points = needed if needed % 2 == 1 else needed + 1
        pts = np.linspace(-extent, extent, n_points)
        return cls(points=pts, spacing=float(pts[1] - pts[0]))


def _envelope_edge(shape: GaussianShape, n: int, extent: float) -> float:
    norm = _normalization(shape, n)
    y = math.sqrt(shape.width_coeff) * extent
    h_edge = abs(hermite(n, y))
    return norm * h_edge * math.exp(-0.5 * shape.exp_coeff * extent * extent)


def _normalization(shape: GaussianShape, n: int) -> float:
    return (
        1.0 / math.sqrt(math.factorial(n) * 2.0**n * math.sqrt(math.pi))
    ) * shape.width_coeff**0.25


def eigenfunction(n: int, x, s: MetricState):
    """Closed-form invariant eigenfunction at position x.

    (n! 2^n sqrt(pi))^{-1/2} width^{1/4} H_n(sqrt(width) x)
    exp(-exp_coeff x^2 / 2); orthonormal under the weight
    exp(+weight_coeff x^2).
    """
    shape = GaussianShape.from_state(s)
    x = np.asarray(x, dtype=float)
    norm = _normalization(shape, n)
    y = math.sqrt(shape.width_coeff) * x
    vals = norm * hermite(n, y) * np.exp(-0.5 * shape.exp_coeff * x * x)
    out = np.asarray(vals, dtype=complex)
    return out if out.ndim else complex(out)


@dataclass(frozen=True)
class GramResult:
    matrix: np.ndarray
    max_off_diagonal: float
    max_diagonal_deviation: float


def orthonormality_matrix(
    n_max: int,
    s: MetricState,
    grid: PositionGrid,
    *,
    include_weight: bool = True,
) -> GramResult:
    """Weighted Gram matrix of the first n_max+1 eigenfunctions by Simpson
    quadrature. include_weight=False deliberately drops the metric weight
    factor, which is how the meter's sensitivity is demonstrated."""
    shape = GaussianShape.from_state(s)
    x = grid.points
    edge = _envelope_edge(shape, n_max, grid.extent)
    if edge > EDGE_DECAY:
        raise DomainError(
            f"grid edge amplitude {edge:.3e} exceeds {EDGE_DECAY:.0e}; "
            "quadrature domain does not cover the integrand"
        )
    funcs = np.stack([np.asarray(eigenfunction(n, x, s)) for n in range(n_max + 1)])
    weight = np.exp(shape.weight_coeff * x * x) if include_weight else np.ones_like(x)
    gram = np.empty((n_max + 1, n_max + 1))
    for m in range(n_max + 1):
        for n in range(m, n_max + 1):
            integrand = np.real(np.conj(funcs[m]) * weight * funcs[n])
            val = float(simpson(integrand, x=x))
            gram[m, n] = gram[n, m] = val
    off = gram - np.diag(np.diag(gram))
    return GramResult(
        matrix=gram,
        max_off_diagonal=float(np.max(np.abs(off))) if n_max > 0 else 0.0,
        max_diagonal_deviation=float(np.max(np.abs(np.diag(gram) - 1.0))),
    )


def canonical_invariant(s: MetricState, dim: int) -> np.ndarray:
    """The invariant as a quadratic form in x and p:

    (1/(2 vtheta0)) [ (Phi-chi)(1-Phi) p^2 - i Phi (chi-1)(px+xp)
                      - (Phi+chi)(1+Phi) x^2 ].
    The px+xp coefficient vanishes exactly when Phi = 0 or chi = 1.
    """
    ops = cached_operator_set(dim)
    phi, chi, th0 = s.phi_cap, s.chi, s.vtheta_zero
    x, p = ops.x, ops.p
    quad = (
        (phi - chi) * (1.0 - phi) * (p @ p)
        - 1j * phi * (chi - 1.0) * (p @ x + x @ p)
        - (phi + chi) * (1.0 + phi) * (x @ x)
    )
    return quad / (2.0 * th0)


def fock_to_position(vec: np.ndarray, grid: PositionGrid) -> np.ndarray:
    """Synthesize a Fock-basis vector as a position wavefunction.

    Oscillator eigenfunctions come from the stable two-term recurrence
    psi_{m+1} = sqrt(2/(m+1)) x psi_m - sqrt(m/(m+1)) psi_{m-1}, seeded with
    the normalized ground Gaussian.
    """
    vec = np.asarray(vec, dtype=complex)
    x = grid.points
    psi_prev = np.zeros_like(x)
    psi = math.pi**-0.25 * np.exp(-0.5 * x * x)
    out = vec[0] * psi.astype(complex)
    for m in range(len(vec) - 1):
        psi, psi_prev = (
            math.sqrt(2.0 / (m + 1)) * x * psi - math.sqrt(m / (m + 1.0)) * psi_prev,
            psi,
        )
        out += vec[m + 1] * psi
    return out


def cross_representation_residual(
    s: MetricState, n: int, dim: int, grid: PositionGrid | None = None
) -> float:
    """Pointwise mismatch between the two routes to the same eigenfunction.

    Route one: rho^{-1}|n> in the Fock basis, synthesized on the grid. Route
    two: the closed-form eigenfunction. Both are L2-normalized on the grid
    (the closed form is weight-normalized, so its plain L2 norm differs by a
    real factor), then aligned by one unit-modulus complex factor. Returns
    max |difference| / max |closed form|.
    """
    if grid is None:
        grid = PositionGrid.for_shape(GaussianShape.from_state(s), n_max=n)
    fock_vec = build_rho_inverse(s.gauss(), dim) @ basis_state(dim, n)
    synthesized = fock_to_position(fock_vec, grid)
    closed = np.asarray(eigenfunction(n, grid.points, s))

    def l2(v: np.ndarray) -> float:
        return math.sqrt(float(simpson(np.abs(v) ** 2, x=grid.points)))

    synthesized = synthesized / l2(synthesized)
    closed = closed / l2(closed)
    overlap = complex(simpson(np.conj(synthesized) * closed, x=grid.points))
    if overlap == 0:
        return float(np.max(np.abs(closed - synthesized)))
    factor = overlap / abs(overlap)
    resid = np.max(np.abs(closed - factor * synthesized))
    return float(resid / np.max(np.abs(closed)))


def canonical_agreement(s: MetricState, dim: int) -> float:
    """Interior-block Frobenius distance between the canonical (x, p) form
    and the ladder-coefficient form of the invariant."""
    diff = canonical_invariant(s, dim) - invariant_ph(s, dim)
    return interior_norm(diff)
