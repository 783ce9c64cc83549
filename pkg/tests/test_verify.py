import math

import numpy as np
import pytest

from fsmcdr.cdr1d import BoundaryCondition1D, CdrParams1D, SupplementarySpec, assemble_and_solve, dirichlet
from fsmcdr.cdr2d import CdrParams2D, EdgeBcSpec, reference_solution
from fsmcdr.series_core import Polynomial
from fsmcdr.verify import ExactPolynomialSolution, StabilityError, fd_extrapolated_1d, fd_solve_1d, fd_solve_2d

CUBIC = Polynomial((1e3, 2e3, 5e3, 1e4))


def test_parabola_exact():
    g = fd_solve_1d(0.0, 5.0, -1.0, 1.0, lambda x: 2.0 + 0 * x, dirichlet(0, 0), nodes=101)
    assert g.values[50] == pytest.approx(1.0, abs=1e-8)
    assert np.allclose(g.values, 1 - g.x**2, atol=1e-8)


def test_stability_guard_names_node_count():
    with pytest.raises(StabilityError, match="at least"):
        fd_solve_1d(200.0, -1.0, -0.5, 0.5, CUBIC, dirichlet(0, 0), nodes=51)


def test_cubic_matches_exact_fsm():
    bcs = dirichlet(0, 0)
    g = fd_solve_1d(3.0, 90.0, -0.5, 0.5, CUBIC, bcs, a_frame=0.5)
    sol = assemble_and_solve(CdrParams1D(3.0, 90.0, 0.5), CUBIC, SupplementarySpec(3), bcs, 10)
    u = sol(g.x)
    assert np.max(np.abs(g.values - u)) <= 1e-5 * np.max(np.abs(u))


def test_boundary_layer_interior():
    bcs = dirichlet(0, 0)
    g = fd_solve_1d(200.0, -1.0, -0.5, 0.5, CUBIC, bcs, a_frame=0.5)
    ref = ExactPolynomialSolution(200.0, -1.0, 0.5, CUBIC, bcs)
    u = ref(g.x[1:-1])
    assert np.mean(np.abs(g.values[1:-1] - u)) <= 1e-3 * np.max(np.abs(u))


def test_neumann_rows():
    bcs = (BoundaryCondition1D("left", "D", 0.0), BoundaryCondition1D("right", "N", 2.0))
    g = fd_solve_1d(30.0, 1.0, -0.5, 0.5, CUBIC, bcs, a_frame=0.5)
    ref = ExactPolynomialSolution(30.0, 1.0, 0.5, CUBIC, bcs)
    assert np.max(np.abs(g.values - ref(g.x))) <= 1e-5 * np.max(np.abs(ref(g.x)))


def test_second_order_convergence_1d():
    bcs = dirichlet(1.0, -1.0)
    ref = ExactPolynomialSolution(3.0, 90.0, 0.5, CUBIC, bcs)
    errs = []
    for n in (201, 401):
        g = fd_solve_1d(3.0, 90.0, -0.5, 0.5, CUBIC, bcs, nodes=n, a_frame=0.5)
        errs.append(np.max(np.abs(g.values - ref(g.x))))
    assert errs[0] / errs[1] >= 3.5


def test_extrapolation_improves():
    bcs = dirichlet(0, 0)
    ref = ExactPolynomialSolution(30.0, 1.0, 0.5, CUBIC, bcs)
    plain = fd_solve_1d(30.0, 1.0, -0.5, 0.5, CUBIC, bcs, nodes=201, a_frame=0.5)
    extra = fd_extrapolated_1d(30.0, 1.0, -0.5, 0.5, CUBIC, bcs, nodes=201, a_frame=0.5)
    e1 = np.max(np.abs(plain.values - ref(plain.x)))
    e2 = np.max(np.abs(extra.values - ref(extra.x)))
    assert e2 < 1e-3 * e1


def zero_2d(pattern="DDDD"):
    return {e: (k, lambda t: 0.0 * t) for e, k in zip(("left", "right", "bottom", "top"), pattern)}


def test_2d_zero_field():
    g = fd_solve_2d(3.0, 1.0, 20.0, 1.0, 1.0, None, zero_2d(), nodes=21)
    assert np.max(np.abs(g.values)) == 0.0


def test_2d_second_order():
    p = CdrParams2D(3.0, 90.0, math.pi / 3)
    ref = reference_solution(p)
    bc = EdgeBcSpec.from_field("DDND", p, ref).as_fd_bc()
    errs = []
    for n in (41, 81):
        g = fd_solve_2d(p.Pe1, p.Pe2, p.reaction, 1.0, 1.0, None, bc, nodes=n)
        X1, X2 = np.meshgrid(g.x, g.x2, indexing="ij")
        errs.append(np.max(np.abs(g.values - ref(X1, X2))))
    assert errs[0] / errs[1] >= 3.5


def test_2d_manufactured_source():
    # u = sin(x1) cos(x2): f = Pe1 cos x1 cos x2 - Pe2 sin x1 sin x2 + 2u - PeDa u
    Pe1, Pe2, PeDa = 2.0, -1.0, 3.0
    u = lambda x1, x2: np.sin(x1) * np.cos(x2)
    f = lambda x1, x2: Pe1 * np.cos(x1) * np.cos(x2) - Pe2 * np.sin(x1) * np.sin(x2) + (2 - PeDa) * u(x1, x2)
    bc = {"left": ("D", lambda t: u(-1.0, t)), "right": ("D", lambda t: u(1.0, t)),
          "bottom": ("D", lambda t: u(t, -1.0)), "top": ("N", lambda t: -np.sin(t) * np.sin(1.0))}
    g = fd_solve_2d(Pe1, Pe2, PeDa, 1.0, 1.0, f, bc, nodes=81)
    X1, X2 = np.meshgrid(g.x, g.x2, indexing="ij")
    assert np.max(np.abs(g.values - u(X1, X2))) <= 1e-3


def test_2d_transpose_symmetry():
    data = lambda t: np.cos(t) + 0.3 * t
    bc = {"left": ("D", data), "right": ("D", lambda t: 0 * t), "bottom": ("D", lambda t: 1 + 0 * t),
          "top": ("D", lambda t: t**2)}
    bct = {"bottom": bc["left"], "top": bc["right"], "left": bc["bottom"], "right": bc["top"]}
    g = fd_solve_2d(1.5, 0.5, 4.0, 1.0, 1.0, None, bc, nodes=41)
    h = fd_solve_2d(0.5, 1.5, 4.0, 1.0, 1.0, None, bct, nodes=41)
    inner = (slice(1, -1), slice(1, -1))
    assert np.allclose(g.values[inner], h.values.T[inner], atol=1e-8 * np.max(np.abs(g.values)))


def test_grid_csv(tmp_path):
    g = fd_solve_1d(0.0, 0.0, -1.0, 1.0, lambda x: 0 * x, dirichlet(0, 1), nodes=5)
    path = tmp_path / "g.csv"
    g.to_csv(path)
    arr = np.loadtxt(path, delimiter=",", skiprows=1)
    assert arr.shape == (5, 2) and arr[-1, 1] == pytest.approx(1.0)
