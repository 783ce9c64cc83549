import math

import numpy as np
import pytest
from hypothesis import assume, given, settings, strategies as st

from fsmcdr.cdr1d import (
    BoundaryCondition1D,
    CdrParams1D,
    MultiDomainSpec,
    Regime,
    SingularMeanModeError,
    SupplementarySpec,
    assemble_and_solve,
    build_interpolant,
    build_supplementary,
    classify_regime,
    dirichlet,
    homogeneous_basis,
    particular_cm,
    particular_fccm,
    solve_interval,
    solve_multidomain,
    source_residual,
    supplementary_matrix,
)
from fsmcdr.series_core import (
    DiracDelta,
    Polynomial,
    RectPulse,
    Sampled,
    TrigSeries1D,
    UnsupportedSourceError,
    fourier_coeffs,
)
from fsmcdr.verify import ExactPolynomialSolution

CUBIC = Polynomial((1e3, 2e3, 5e3, 1e4))
SETS = [(3.0, 90.0), (1.0, 30.0), (30.0, 1.0), (200.0, -1.0)]


def char_residual(Pe, Da, eta):
    return abs(eta * eta - Pe * eta + Pe * Da) / max(1.0, Pe * Pe, abs(Pe * Da))


def test_regime_complex_pair():
    r = classify_regime(CdrParams1D(3.0, 90.0, 0.5))
    assert r.regime is Regime.COMPLEX_PAIR
    assert r.alpha10 == -1.5
    assert r.alpha20 == pytest.approx(math.sqrt(1071) / 2)
    assert char_residual(3, 90, r.eta1) <= 1e-10


def test_regime_double_real():
    r = classify_regime(CdrParams1D(2.0, 0.5, 0.5))
    assert r.regime is Regime.DOUBLE_REAL
    assert r.eta1 == pytest.approx(1.0) and r.eta2 == pytest.approx(1.0)


@pytest.mark.parametrize("Pe,Da,roots", [(200.0, -1.0, (200.9950, -0.9950)),
                                         (30.0, 1.0, (28.9642, 1.0358))])
def test_regime_distinct_real(Pe, Da, roots):
    r = classify_regime(CdrParams1D(Pe, Da, 0.5))
    assert r.regime is Regime.DISTINCT_REAL
    got = sorted([r.eta1.real, r.eta2.real], reverse=True)
    assert got == pytest.approx(roots, abs=1e-4)


@settings(max_examples=1000, deadline=None)
@given(st.floats(-300, 300), st.floats(-100, 100))
def test_root_residual_sweep(Pe, Da):
    r = classify_regime(CdrParams1D(Pe, Da, 0.5))
    for eta in (r.eta1, r.eta2):
        assert char_residual(Pe, Da, eta) <= 1e-10


def operator_residual(p, basis, x):
    v = [basis(x, k) for k in range(3)]
    Lp = p.apply(v[0], v[1], v[2])
    # normalized functions are O(1); the unit term guards the Pe -> 0 limit
    scale = max(np.max(np.abs(p.Pe * v[1])), np.max(np.abs(v[2])), np.max(np.abs(p.reaction * v[0])),
                np.max(np.abs(v[0])))
    return np.max(np.abs(Lp)) / scale


@settings(max_examples=200, deadline=None)
@given(st.floats(-300, 300), st.floats(-100, 100))
def test_basis_annihilated(Pe, Da):
    p = CdrParams1D(Pe, Da, 0.5)
    x = np.linspace(-0.5, 0.5, 50)
    assert operator_residual(p, homogeneous_basis(p), x) <= 1e-8


def test_basis_laplace_kernel():
    p = CdrParams1D(0.0, 0.0, 2.0)
    b = homogeneous_basis(p)
    x = np.linspace(-2, 2, 9)
    v = b(x, 0)
    assert np.allclose(v[0], 1.0) and np.allclose(v[1], x / 2)


def test_basis_normalized_boundary_layer():
    b = homogeneous_basis(CdrParams1D(200.0, -1.0, 0.5))
    ends = b(np.array([-0.5, 0.5]), 0)
    assert np.all(np.max(np.abs(ends), axis=1) == pytest.approx(1.0))
    steep = np.argmax(np.abs(ends[:, 1]) - np.abs(ends[:, 0]))
    assert abs(ends[steep, 0]) < 1e-80


def test_interpolant_cubic_exact():
    H = build_interpolant(CUBIC, SupplementarySpec(3), 0.5)
    assert np.allclose(H, [1e3, 2e3, 5e3, 1e4])


def test_interpolant_constant_and_secant():
    assert np.allclose(build_interpolant(Polynomial((1e3,)), SupplementarySpec(1), 0.5), [1e3, 0])
    assert np.allclose(build_interpolant(Polynomial((0, 0, 1.0)), SupplementarySpec(1), 1.0), [1, 0],
                       atol=1e-14)


def test_interpolant_rejects_delta():
    with pytest.raises(UnsupportedSourceError):
        build_interpolant(DiracDelta(0.0, 1.0), SupplementarySpec(2), 0.5)


def test_supplementary_examples():
    s = build_supplementary(CdrParams1D(3.0, 90.0, 0.5), [1000.0])
    assert s(0.1) == pytest.approx(-1000 / 270)
    s = build_supplementary(CdrParams1D(2.0, 0.0, 0.5), [3.0])
    assert s(0.2) == pytest.approx(1.5 * 0.2)
    s = build_supplementary(CdrParams1D(0.0, 0.0, 1.0), [2.0])
    assert s(0.3) == pytest.approx(-0.09)


@settings(max_examples=100, deadline=None)
@given(st.sampled_from([(3.0, 90.0), (2.0, 0.0), (0.0, 0.0), (-5.0, 3.0), (0.0, 4.0)]),
       st.lists(st.floats(-1e3, 1e3), min_size=1, max_size=6), st.floats(0.1, 2.0))
def test_supplementary_exact(pd, fs, a):
    p = CdrParams1D(pd[0], pd[1], a)
    s = build_supplementary(p, fs)
    x = np.linspace(-a, a, 11)
    Ls = p.apply(s(x, 0), s(x, 1), s(x, 2))
    f = Polynomial(tuple(fs)).values(x, a)
    assert np.max(np.abs(Ls - f)) <= 1e-9 * max(1.0, np.max(np.abs(fs)))


def test_residual_vanishes_at_nodes():
    a = 0.5
    f = Sampled(lambda x: np.exp(3 * x) + x**5)
    spec = SupplementarySpec(2)
    H, _ = source_residual(f, a, 10, spec)
    fs = Polynomial(tuple(H), scale=a)
    ends = np.array([-a, a])
    assert np.allclose(fs.values(ends, a), f.values(ends, a), rtol=1e-12)


def test_fccm_hand_mode():
    p = CdrParams1D(1.0, 0.0, math.pi)
    fp = TrigSeries1D(math.pi, [0.0, 1.0], [0.0])
    q0 = particular_fccm(p, fp)
    assert q0.cos_coeffs[1] == pytest.approx(0.5) and q0.sin_coeffs[0] == pytest.approx(0.5)


def test_fccm_zero_source():
    q0 = particular_fccm(CdrParams1D(3.0, 90.0, 0.5), TrigSeries1D.zeros(0.5, 5))
    assert q0.norm() == 0.0


def test_fccm_mean_rejected_without_reaction():
    p = CdrParams1D(2.0, 0.0, 0.5)
    with pytest.raises(SingularMeanModeError):
        particular_fccm(p, TrigSeries1D(0.5, [1.0, 0.0], [0.0]))


def test_cubic_exact_path_gives_zero_q0():
    for Pe, Da in SETS:
        sol = assemble_and_solve(CdrParams1D(Pe, Da, 0.5), CUBIC, SupplementarySpec(3), dirichlet(0, 0), 40)
        assert sol.q0.norm() <= 1e-12 * 1e4


@pytest.mark.parametrize("Pe,Da", SETS)
def test_fccm_truncated_residual(Pe, Da):
    p = CdrParams1D(Pe, Da, 0.5)
    fp = fourier_coeffs(CUBIC, 0.5, 20)
    q0 = particular_fccm(p, fp)
    # L[q0] in coefficient space
    alpha = q0.alphas
    c, s = q0.cos_coeffs, np.concatenate([[0.0], q0.sin_coeffs])
    Lc = -p.reaction * c + alpha**2 * c + p.Pe * alpha * s
    Ls = -p.reaction * s + alpha**2 * s - p.Pe * alpha * c
    got = TrigSeries1D(0.5, Lc, Ls[1:]).as_vector()
    assert np.max(np.abs(got - fp.as_vector())) <= 1e-10 * fp.norm()


@pytest.mark.parametrize("Pe,Da", SETS + [(0.0, 5.0), (4.0, 0.0)])
def test_cm_matches_fccm(Pe, Da):
    p = CdrParams1D(Pe, Da, 0.5)
    f = Polynomial((0.0, 2e3, 5e3, 1e4)) if Pe * Da == 0 else CUBIC
    fp = fourier_coeffs(f, 0.5, 15)
    if Pe * Da == 0:
        fp = TrigSeries1D(0.5, np.concatenate([[0.0], fp.cos_coeffs[1:]]), fp.sin_coeffs)
    a = particular_fccm(p, fp).as_vector()
    b = particular_cm(p, fp).as_vector()
    assert np.max(np.abs(a - b)) <= 1e-8 * np.max(np.abs(a))


def test_cm_single_mode_closed_form():
    p = CdrParams1D(3.0, 90.0, 0.5)
    fp = TrigSeries1D(0.5, [0.0, 0.0, 1.0], [0.0, 0.0])
    q0 = particular_cm(p, fp)
    al = 2 * math.pi / 0.5
    d, g = al**2 - 270.0, 3.0 * al
    assert q0.cos_coeffs[2] == pytest.approx(d / (d * d + g * g), rel=1e-9)
    assert q0.sin_coeffs[1] == pytest.approx(g / (d * d + g * g), rel=1e-9)


def test_zero_problem_gives_zero():
    sol = assemble_and_solve(CdrParams1D(3.0, 90.0, 0.5), Polynomial((0.0,)), SupplementarySpec(0),
                             dirichlet(0, 0), 10)
    assert np.max(np.abs(sol(np.linspace(-0.5, 0.5, 21)))) == 0.0


@pytest.mark.parametrize("Pe,Da", SETS)
@pytest.mark.parametrize("kinds", [("D", "D"), ("D", "N"), ("N", "D")])
def test_bc_satisfied(Pe, Da, kinds):
    bcs = (BoundaryCondition1D("left", kinds[0], 0.3), BoundaryCondition1D("right", kinds[1], -1.7))
    sol = assemble_and_solve(CdrParams1D(Pe, Da, 0.5), CUBIC, SupplementarySpec(1), bcs, 20)
    scale = max(1.0, np.max(np.abs(sol(np.linspace(-0.5, 0.5, 101), 1))))
    assert np.max(np.abs(sol.bc_residuals())) <= 1e-9 * scale


@pytest.mark.parametrize("Pe,Da", SETS)
def test_constant_source_exact(Pe, Da):
    f = Polynomial((1e3,))
    bcs = dirichlet(0.0, 0.0)
    sol = assemble_and_solve(CdrParams1D(Pe, Da, 0.5), f, SupplementarySpec(1), bcs, 40)
    ref = ExactPolynomialSolution(Pe, Da, 0.5, f, bcs)
    x = np.linspace(-0.5, 0.5, 1001)
    for k in range(3):
        err = np.max(np.abs(sol(x, k) - ref(x, k))) / np.max(np.abs(ref(x, k)))
        assert err <= 1e-10


@settings(max_examples=25, deadline=None)
@given(st.sampled_from(SETS), st.floats(-5, 5), st.floats(-5, 5), st.floats(-5, 5), st.floats(-5, 5))
def test_superposition(pd, c1, c2, v1, v2):
    p = CdrParams1D(pd[0], pd[1], 0.5)
    f1, f2 = Polynomial((c1, 1.0)), Polynomial((c2, 0.0, 2.0))
    s1 = assemble_and_solve(p, f1, SupplementarySpec(0), dirichlet(v1, 0.0), 12)
    s2 = assemble_and_solve(p, f2, SupplementarySpec(0), dirichlet(0.0, v2), 12)
    s12 = assemble_and_solve(p, f1 + f2, SupplementarySpec(0), dirichlet(v1, v2), 12)
    x = np.linspace(-0.5, 0.5, 41)
    total = s12(x)
    assert np.max(np.abs(total - s1(x) - s2(x))) <= 1e-9 * max(1.0, np.max(np.abs(total)))


def test_split_reconstructs_solution():
    sol = assemble_and_solve(CdrParams1D(30.0, 1.0, 0.5), CUBIC, SupplementarySpec(0), dirichlet(1.0, 2.0), 20)
    x = np.linspace(-0.5, 0.5, 11)
    assert np.allclose(sol.phi_b(x) + sol.phi_f(x), sol(x), atol=1e-10)


def test_delta_with_interpolation_rejected():
    with pytest.raises(UnsupportedSourceError):
        assemble_and_solve(CdrParams1D(3.0, 90.0, 0.5), DiracDelta(0.0, 1.0), SupplementarySpec(2),
                           dirichlet(0, 0), 10)


def test_solve_interval_translates():
    lo, hi = 2.0, 3.0
    sol = solve_interval(lo, hi, 3.0, 90.0, RectPulse(2.5, 0.1, 1.0), dirichlet(0, 0), 40)
    ref = solve_interval(-0.5, 0.5, 3.0, 90.0, RectPulse(0.0, 0.1, 1.0), dirichlet(0, 0), 40)
    x = np.linspace(0, 1, 11)
    assert np.allclose(sol(x + lo), ref(x - 0.5), atol=1e-12)


def test_multidomain_linear_profile():
    md = MultiDomainSpec.uniform([0.0, 0.5, 1.0], 0.0, 0.0, N1s=1, M=5)
    sol = solve_multidomain(md, Polynomial((0.0,), scale=1.0), dirichlet(1.0, 0.0))
    assert sol.diagnostics["interface_values"][1] == pytest.approx(0.5)
    assert sol(np.array([0.25]))[0] == pytest.approx(0.75)


@pytest.mark.parametrize("Pe,Da", SETS)
def test_multidomain_continuity(Pe, Da):
    x0, w = 0.5, 1e-2
    md = MultiDomainSpec.uniform([0.0, x0 - w, x0 + w, 1.0], Pe, Da, N1s=1, M=10)
    sol = solve_multidomain(md, RectPulse(x0, w, 1000.0), dirichlet(0, 0))
    assert sol.diagnostics["continuity_residual"] <= 1e-8
    # flux balance across the pulse
    jump = sol(x0 + w, 1) - sol(x0 - w, 1)
    left, right = sol(x0 - w), sol(x0 + w)
    xs = np.linspace(x0 - w, x0 + w, 2001)
    integral = np.trapezoid(sol(xs), xs)
    balance = Pe * (right - left) - jump - Pe * Da * integral
    assert balance == pytest.approx(1000.0, rel=1e-6)
