"""End-to-end acceptance sweep: one test per advertised guarantee.

Each test prints a single ``criterion NN: PASS/FAIL`` line (visible with
``-s``). Six criteria are deliberately red and stay red: four name a drive
whose own coefficient constraints hit a pole at t=1.92175, where the
pipeline aborts by guard policy; one asks a float64 interior-block
comparison that truncation physics makes meaningless at this dimension; one
inherits both problems. Those tests assert the measured failure mode so the
red is stable and diagnostic, then end with an explicit failure carrying
the analysis. Every red criterion has a paired demonstration test showing
the same identity green on a completable configuration.
"""

import dataclasses
import json

import numpy as np
import pytest

from phinv import (
    DomainError,
    GuardError,
    MetricState,
    assemble_solution,
    basis_state,
    build_eta,
    build_rho,
    build_rho_inverse,
    cached_operator_set,
    canonical_invariant,
    cross_representation_residual,
    gauss_params,
    orthonormality_matrix,
    parse_scenario,
    run_scenario,
)
from phinv.fock import frobenius_distance, interior_norm
from phinv.metric import conjugate_k
from phinv.model import (
    HamiltonianCoefficients,
    constraint_residuals,
    integrate_metric,
    invariant_ph,
    wuv_coefficients,
)
from phinv.position import GaussianShape, PositionGrid, canonical_agreement
from phinv.propagator import (
    dyson_residual,
    hamiltonian_source,
    hermitian_image_check,
    invariant_residual,
    propagate,
    schrodinger_residual,
    transformed_generator_source,
)
from phinv.runner import _parse_csv

from support import random_metric_states, reference_expm

STEEP_TD = {
    "initial_metric": {"phi_cap": 0.5, "vtheta_zero": 1.0},
    "profiles": {
        "re_omega": {"kind": "constant", "value": 1.0},
        "im_omega": {
            "kind": "sinusoid",
            "offset": 0.0, "amplitude": 0.1, "frequency": 1.0, "phase": 0.0,
        },
        "im_beta": {"kind": "constant", "value": 0.05},
    },
    "quantum_numbers": [0, 1],
    "superposition": [[0.7071067811865476, 0.0], [0.7071067811865476, 0.0]],
}

ABORT_TIME = 1.92175


def say(n: int, ok: bool, detail: str) -> None:
    print(f"criterion {n:02d}: {'PASS' if ok else 'FAIL'} - {detail}")


def run_steep_td(**overrides):
    doc = {**STEEP_TD, **overrides}
    return run_scenario(parse_scenario(json.dumps(doc)))


def assert_steep_abort() -> GuardError:
    with pytest.raises(GuardError) as info:
        run_steep_td()
    err = info.value
    assert err.guard == "constraint-denominator"
    assert abs(err.time - ABORT_TIME) <= 5e-3
    return err


def check_value(run, name: str) -> float:
    (entry,) = [c for c in run.report["checks"] if c["name"] == name]
    return float(entry["max_residual"])


def test_criterion_01_harmonic_limit(harmonic_run):
    cols = _parse_csv(harmonic_run.csv_text)
    worst_gamma = max(
        float(np.max(np.abs(cols[f"gamma_{n}"] + (n + 0.5) * cols["t"])))
        for n in range(7)
    )
    assert worst_gamma <= 1e-9

    ops = cached_operator_set(64)
    mix = sum(basis_state(64, n) for n in range(7)).astype(complex) / np.sqrt(7)
    times = np.linspace(0.0, 5.0, 5001)
    out = propagate(lambda t: 2.0 * ops.k_zero, mix, times, substeps=8)
    worst_state = 0.0
    for i in (1000, 2500, 5000):
        analytic = sum(
            np.exp(-1j * (n + 0.5) * times[i]) * basis_state(64, n) for n in range(7)
        ) / np.sqrt(7)
        worst_state = max(worst_state, float(np.max(np.abs(out.states[i] - analytic))))
    assert worst_state <= 1e-9
    say(1, True, f"gamma_n within {worst_gamma:.1e}, RK4 vs analytic {worst_state:.1e}")


def test_criterion_02_steep_td_schrodinger():
    err = assert_steep_abort()
    say(2, False, f"drive aborts at t={err.time:.5f} before any solution exists")
    pytest.fail(
        "The named drive starts at Phi=0.5, vtheta0=1, where the constraint "
        "denominator 2*Phi^2 - vtheta0 = -0.5, and its im_beta > 0 pushes Phi "
        "upward until the denominator crosses zero at t=1.92175; there the "
        "constrained re_beta and re_alpha diverge, so the run aborts with the "
        "constraint-denominator guard instead of emitting poisoned numbers. "
        "Truncating the horizon does not rescue it: past t~1.7 the "
        "eigenfunction falloff collapses and the position checks cannot "
        "cover their integrand. The identity itself holds: on the "
        "completable drive (Phi0=0.2, im_beta=-0.02) the interior "
        "Schrodinger residual tops out near 1e-11 against its 1e-6 "
        "tolerance and the eta-overlap deficit at t=5 is 0.0 "
        "(see test_criterion_02_demonstration)."
    )


def test_criterion_02_demonstration(td_run, gentle_traj, gentle_states):
    assert check_value(td_run, "schrodinger") <= 1e-6
    assert check_value(td_run, "oracle_overlap") <= 1e-6

    # full-horizon RK4 oracle, run in the Hermitian frame where the flat
    # norm is conserved; plain overlaps there equal eta-overlaps here
    dim = 64
    mapped0 = build_rho(gentle_traj.gauss_at(0), dim) @ gentle_states[0]
    out = propagate(
        transformed_generator_source(gentle_traj, dim),
        mapped0,
        gentle_traj.times,
        substeps=8,
    )
    end = gentle_traj.n_times - 1
    mapped_ref = build_rho(gentle_traj.gauss_at(end), dim) @ gentle_states[end]
    psi = out.states[end]
    num = abs(np.vdot(psi, mapped_ref))
    den = np.sqrt(np.vdot(psi, psi).real * np.vdot(mapped_ref, mapped_ref).real)
    deficit = abs(1.0 - num / den)
    assert deficit <= 1e-6
    say(2, True, f"demonstration: eta-overlap deficit at t=5 is {deficit:.1e}")


def test_criterion_03_steep_td_invariant_conservation():
    err = assert_steep_abort()
    say(3, False, f"same drive, same abort at t={err.time:.5f}")
    pytest.fail(
        "Tied to the t=1.92175 constraint-denominator abort described under "
        "criterion 2; no trajectory exists to measure the invariant residual "
        "on. On the completable drive the interior-block residual of "
        "d(I)/dt - i[I, H] stays near 1e-11 against its 5e-6 tolerance "
        "(see test_criterion_03_demonstration)."
    )


def test_criterion_03_demonstration(td_run):
    worst = check_value(td_run, "invariant")
    assert worst <= 5e-6
    say(3, True, f"demonstration: invariant residual max {worst:.1e}")


def test_criterion_04_steep_td_eigenvalue_constancy():
    err = assert_steep_abort()
    say(4, False, f"same drive, same abort at t={err.time:.5f}")
    pytest.fail(
        "Tied to the t=1.92175 constraint-denominator abort described under "
        "criterion 2. On the completable drive the Rayleigh quotients of the "
        "invariant eigenvectors sit on n + 1/2 to better than 1e-10 for "
        "n <= 6 at every report time (see test_criterion_04_demonstration)."
    )


def test_criterion_04_demonstration(td_run):
    worst = check_value(td_run, "rayleigh")
    assert worst <= 1e-8
    say(4, True, f"demonstration: Rayleigh deviation max {worst:.1e}")


def test_criterion_05_steep_td_quasi_hermiticity():
    err = assert_steep_abort()
    say(5, False, f"same drive, same abort at t={err.time:.5f}")
    pytest.fail(
        "Tied to the t=1.92175 constraint-denominator abort described under "
        "criterion 2. The static half of the claim passes as stated "
        "(residual 4e-16 <= 1e-9 at the diagonal metric point), and the "
        "driven half passes on the completable drive at ~1e-12 vs 5e-6 "
        "(see test_criterion_05_demonstration)."
    )


def test_criterion_05_demonstration(td_run):
    worst = check_value(td_run, "dyson")
    assert worst <= 5e-6

    static = integrate_metric(
        MetricState(0.0, float(np.exp(2.0))),
        lambda t: 1.0 + 0.0j, 1.0, 1e-3, im_beta=lambda t: 0.0,
    )
    static_res = dyson_residual(static, 500, 64)
    assert static_res <= 1e-9
    say(5, True, f"demonstration: driven {worst:.1e}, static {static_res:.1e}")


def test_criterion_06_eta_unitarity(td_run):
    assert all(abs(c - 2**-0.5) <= 1e-15 for c in td_run.config.superposition)
    drift = check_value(td_run, "eta_norm_drift")
    assert drift <= 1e-7
    say(6, True, f"eta-norm drift {drift:.1e} over the full horizon")


def test_criterion_07_metric_algebra_float64():
    ops = cached_operator_set(64)
    g = gauss_params(0.0, 0.3)
    gen = 0.6 * (ops.k_minus + ops.k_plus)
    disentangle = frobenius_distance(build_rho(g, 64), reference_expm(gen), exclude_top=3)
    direct = frobenius_distance(
        build_rho(g, 64) @ ops.k_minus @ build_rho_inverse(g, 64),
        conjugate_k(g, "minus", 64),
        exclude_top=3,
    )
    # not merely above tolerance: catastrophically so, which is the point
    assert disentangle > 1e2
    assert direct > 1e2
    say(
        7, False,
        f"float64 interior-block comparisons measure truncation, not truth "
        f"(disentangle {disentangle:.1e}, conjugation {direct:.1e})",
    )
    pytest.fail(
        "At dim 64 the exponential of the truncated generator differs at "
        "order one from the truncation of the exact exponential near the "
        "cut: the column coefficients (tau/2)^k sqrt((n+2k)!/n!)/k! grow "
        "for k up to ~tau*(n+2k)/2 before decaying, so for any meaningful "
        "coupling the interior-block float64 comparison is dominated by "
        "truncation physics (measured 6.8e15 at (eps,mu)=(0,0.3); direct "
        "triple-product conjugation 5.0e6 for the same reason). The "
        "factored operator itself is right: its columns match a 280-digit "
        "arbitrary-precision evaluation of the same exponential to relative "
        "1e-12 at four points including strong coupling, the float64 "
        "comparison does pass deep inside the block at weak coupling, and "
        "the multiplied-through conjugation identities hold to relative "
        "1e-12 everywhere tested (see test_criterion_07_demonstration)."
    )


def test_criterion_07_demonstration(frozen_disentangle_reference, ops64):
    # exact-arithmetic anchor, valid at strong coupling
    worst_ref = 0.0
    for entry in frozen_disentangle_reference["points"].values():
        r = build_rho(gauss_params(entry["eps"], entry["mu"]), 64)
        for n_str, col_strs in entry["cols"].items():
            ref = np.array([float(x) for x in col_strs])
            dev = np.linalg.norm(r[:, int(n_str)].real - ref)
            worst_ref = max(worst_ref, dev / max(1.0, float(np.linalg.norm(ref))))
    assert worst_ref <= 1e-12

    # float64 reference exponential, valid deep inside the block at weak
    # coupling where no transient coefficient growth reaches the cut
    eps, mu = 0.1, 0.02
    gen = 2 * eps * ops64.k_zero + 2 * mu * (ops64.k_minus + ops64.k_plus)
    deep = frobenius_distance(
        build_rho(gauss_params(eps, mu), 64), reference_expm(gen), exclude_top=40
    )
    assert deep <= 1e-10

    # conjugation identities, multiplied through by rho
    worst_conj = 0.0
    for e, m in ((0.0, 0.3), (0.45, 0.4), (-0.3, 0.25)):
        g = gauss_params(e, m)
        rho = build_rho(g, 64)
        for which, k in (("plus", ops64.k_plus), ("zero", ops64.k_zero), ("minus", ops64.k_minus)):
            closed = conjugate_k(g, which, 64)
            resid = interior_norm(rho @ k - closed @ rho)
            worst_conj = max(worst_conj, resid / max(1.0, interior_norm(closed @ rho)))
    assert worst_conj <= 1e-12

    comm = ops64.k_plus @ ops64.k_minus - ops64.k_minus @ ops64.k_plus
    assert np.max(np.abs((comm + 2 * ops64.k_zero)[:-2, :-2])) <= 1e-12
    say(
        7, True,
        f"demonstration: exact-arithmetic anchor {worst_ref:.1e}, deep block "
        f"{deep:.1e}, conjugations {worst_conj:.1e}",
    )


def test_criterion_08_normalization_and_collapse(gentle_traj):
    worst_norm = 0.0
    for s in random_metric_states(seed=23, count=100):
        phi, chi, th0 = s.phi_cap, s.chi, s.vtheta_zero
        delta1 = -(phi * phi + chi) / th0
        delta3 = -phi / th0
        value = -(delta1 * (phi * phi + chi) - 4 * delta3 * chi * phi) / th0
        worst_norm = max(worst_norm, abs(value - 1.0))
    assert worst_norm <= 1e-12

    worst_uvw = 0.0
    for i in range(0, gentle_traj.n_times, 50):
        tc = wuv_coefficients(
            gentle_traj.state_at(i), gentle_traj.coeffs_at(i), *gentle_traj.rates_at(i)
        )
        worst_uvw = max(worst_uvw, abs(tc.u), abs(tc.v), abs(tc.w.imag))
    assert worst_uvw <= 1e-10
    say(8, True, f"identity within {worst_norm:.1e}, U/V/Im W within {worst_uvw:.1e}")


def test_criterion_09_steep_td_position_representation():
    err = assert_steep_abort()

    # even the reachable window fails: the t=0 eigenvector is truncation
    # limited at dim 64, and near the frontier no grid covers the Gram
    cross0 = max(
        cross_representation_residual(MetricState(0.5, 1.0), n, 64) for n in range(5)
    )
    assert cross0 > 1e-4

    partial = integrate_metric(
        MetricState(0.5, 1.0),
        lambda t: 1.0 + 0.1j * np.sin(t), 1.9, 1e-3, im_beta=lambda t: 0.05,
    )
    s_late = partial.state_at(1700)
    with pytest.raises(DomainError, match="edge amplitude"):
        shape = GaussianShape.from_state(s_late)
        orthonormality_matrix(5, s_late, PositionGrid.for_shape(shape, n_max=5))

    say(
        9, False,
        f"abort at t={err.time:.5f}; reachable window cross residual "
        f"{cross0:.1e} and Gram grid uncoverable near the frontier",
    )
    pytest.fail(
        "The named drive aborts at t=1.92175 (criterion 2), and its "
        "reachable window fails anyway: at the initial state (Phi=0.5) the "
        "Fock-route eigenvector is truncation-limited at dim 64, leaving "
        "the cross-representation residual at 6.9e-3 against 1e-6 (the "
        "same truncation needs dim ~160 to push the invariant eigencheck "
        "below 1e-5), and past t~1.7 the Gaussian falloff of the "
        "eigenfunctions collapses, so the Gram integrand cannot be covered "
        "by any affordable grid (edge amplitude 7e2 and growing). All "
        "three position checks pass on the completable drive "
        "(see test_criterion_09_demonstration)."
    )


def test_criterion_09_demonstration(td_run):
    gram = check_value(td_run, "gram")
    canon = check_value(td_run, "canonical")
    cross = check_value(td_run, "cross_representation")
    assert gram <= 1e-6
    assert canon <= 1e-9
    assert cross <= 1e-6
    say(9, True, f"demonstration: gram {gram:.1e}, canonical {canon:.1e}, cross {cross:.1e}")


def test_criterion_10_meter_sensitivity(gentle_traj, gentle_states):
    dim = 64
    i = 2500
    traj = gentle_traj
    s = traj.state_at(i)
    c = traj.coeffs_at(i)
    s_bad = MetricState(s.phi_cap, 1.01 * s.vtheta_zero)
    h_src = hamiltonian_source(traj, dim)
    ratios: dict[str, float] = {}

    def record(name: str, clean: float, corrupted: float) -> None:
        ratios[name] = corrupted / max(clean, 1e-15)

    scaled = dataclasses.replace(traj, phases={n: 1.01 * g for n, g in traj.phases.items()})
    window = np.array([assemble_solution(scaled, j, dim) for j in range(i - 2, i + 3)])
    record(
        "schrodinger",
        schrodinger_residual(gentle_states, traj.times, h_src, i),
        schrodinger_residual(window, traj.times[i - 2 : i + 3], h_src, 2),
    )
    record(
        "invariant",
        invariant_residual(traj, i, dim),
        invariant_residual(dataclasses.replace(traj, vtheta0=1.01 * traj.vtheta0), i, dim),
    )
    record(
        "dyson",
        dyson_residual(traj, i, dim),
        dyson_residual(dataclasses.replace(traj, phi=1.01 * traj.phi), i, dim),
    )
    record(
        "constraint",
        max(constraint_residuals(s, c).values()),
        max(constraint_residuals(
            s, HamiltonianCoefficients(c.omega, 1.01 * c.alpha, c.beta)
        ).values()),
    )

    idx = range(0, 2001, 100)
    etas = {j: build_eta(traj.gauss_at(j), dim) for j in idx}
    def drift(states_of):
        norms = [float(np.vdot(states_of(j), etas[j] @ states_of(j)).real) for j in idx]
        return max(abs(v - norms[0]) for v in norms)
    record(
        "eta_norm_drift",
        drift(lambda j: gentle_states[j]),
        drift(lambda j: 1.01 * gentle_states[j] if j >= 1000 else gentle_states[j]),
    )

    eta = build_eta(traj.gauss_at(i), dim)
    inv = invariant_ph(s, dim)
    def rayleigh(vec):
        return abs(
            float(np.vdot(vec, eta @ (inv @ vec)).real)
            / float(np.vdot(vec, eta @ vec).real)
            - 3.5
        )
    record(
        "rayleigh",
        rayleigh(build_rho_inverse(s.gauss(), dim)[:, 3]),
        rayleigh(build_rho_inverse(s_bad.gauss(), dim)[:, 3]),
    )

    rho = build_rho(s.gauss(), dim)
    two_k0 = 2 * cached_operator_set(dim).k_zero
    scale = max(1.0, interior_norm(two_k0 @ rho))
    record(
        "hermitian_image",
        hermitian_image_check(traj, i, dim),
        interior_norm(rho @ invariant_ph(s_bad, dim) - two_k0 @ rho) / scale,
    )
    record(
        "canonical",
        canonical_agreement(s, dim),
        interior_norm(canonical_invariant(s_bad, dim) - invariant_ph(s, dim)),
    )

    weakest = min(ratios, key=ratios.get)
    assert ratios[weakest] >= 1e3, f"{weakest} ratio {ratios[weakest]:.2e}"
    say(10, True, f"eight meters, weakest amplification {ratios[weakest]:.1e} ({weakest})")


def test_criterion_11_determinism(harmonic_run, td_run):
    for run in (harmonic_run, td_run):
        again = run_scenario(run.config)
        assert again.csv_text == run.csv_text
        assert again.report_text == run.report_text
    say(11, True, "demo scenarios reproduce byte-identical artifacts")
