import numpy as np
import pytest

from wgppr.interp import interpolate
from wgppr.errors import broken_h1_seminorm
from wgppr.mesh import TensorMesh, build_perturbed, build_uniform
from wgppr.poly import lobatto_points
from wgppr.wg import (
    ParameterError,
    WGSpace,
    assemble,
    energy_norm,
    eval_wgrad,
    load_vector,
    solve_wg,
    stabilizer_value,
    weak_gradient_local,
)

PI = np.pi


def lagrange_1d(nodes, i, x):
    out = np.ones_like(x)
    for j, zj in enumerate(nodes):
        if j != i:
            out = out * (x - zj) / (nodes[i] - zj)
    return out


def weak_gradient_oracle(k, H, c, x, y):
    """Dense Gram solve with a monomial basis of W_k on [0, H]^2."""
    z = (lobatto_points(k) + 1) * H / 2
    n_int = (k + 1) ** 2

    def v0(px, py):
        return sum(c[q * (k + 1) + p] * lagrange_1d(z, p, px) * lagrange_1d(z, q, py)
                   for q in range(k + 1) for p in range(k + 1))

    def vb(side, t):
        return sum(c[n_int + side * (k + 1) + r] * lagrange_1d(z, r, t) for r in range(k + 1))

    g, w = np.polynomial.legendre.leggauss(k + 4)
    g, w = (g + 1) * H / 2, w * H / 2
    X, Y = np.meshgrid(g, g, indexing="ij")
    W2 = np.outer(w, w)
    V0 = v0(X, Y)
    comps = []
    for comp in (0, 1):
        ab = [(a, b) for a in range(k + 1) for b in range(k + 1) if (a < k if comp == 0 else b < k)]
        G = np.array([[np.sum(W2 * X**(a + c2) * Y**(b + d)) for c2, d in ab] for a, b in ab])
        rhs = []
        for a, b in ab:
            if comp == 0:
                dq = a * X ** max(a - 1, 0) * Y**b
                edge = np.sum(w * vb(1, g) * H**a * g**b) - np.sum(w * vb(3, g) * 0.0**a * g**b)
            else:
                dq = b * X**a * Y ** max(b - 1, 0)
                edge = np.sum(w * vb(2, g) * g**a * H**b) - np.sum(w * vb(0, g) * g**a * 0.0**b)
            rhs.append(-np.sum(W2 * V0 * dq) + edge)
        coef = np.linalg.solve(G, rhs)
        comps.append(sum(cf * x**a * y**b for cf, (a, b) in zip(coef, ab)))
    return comps


@pytest.mark.parametrize("k", [1, 2, 3])
def test_weak_gradient_dense_oracle(k):
    space = WGSpace(build_uniform(2, k))
    H = 0.5
    rng = np.random.default_rng(k)
    c = rng.normal(size=space.ref.n_local)
    xi = np.array([-0.9, -0.2, 0.4, 0.8])
    eta = np.array([0.7, -0.6, 0.1, -0.95])
    gx, gy = eval_wgrad(space, weak_gradient_local(space, 0, c), xi, eta)
    ox, oy = weak_gradient_oracle(k, H, c, (xi + 1) * H / 2, (eta + 1) * H / 2)
    np.testing.assert_allclose(gx, ox, atol=1e-10)
    np.testing.assert_allclose(gy, oy, atol=1e-10)


def test_weak_gradient_unit_interior_zero_trace():
    space = WGSpace(build_uniform(2, 1))
    c = np.zeros(space.ref.n_local)
    c[: space.ref.n_int] = 1.0
    xi = np.linspace(-1, 1, 5)
    gx, gy = eval_wgrad(space, weak_gradient_local(space, 3, c), xi, xi[::-1])
    ox, oy = weak_gradient_oracle(1, 0.5, c, (xi + 1) / 4, (xi[::-1] + 1) / 4)
    np.testing.assert_allclose(gx, ox, atol=1e-12)
    np.testing.assert_allclose(gy, oy, atol=1e-12)


@pytest.mark.parametrize("k", [1, 2])
def test_weak_gradient_constant_and_linear(k):
    space = WGSpace(build_perturbed(0, k))
    xi = np.linspace(-1, 1, 7)
    g = weak_gradient_local(space, 6, np.full(space.ref.n_local, 2.5))
    assert np.abs(g[0]).max() < 1e-12 and np.abs(g[1]).max() < 1e-12
    v = interpolate(space, lambda x, y: x + 0 * y)
    gx, gy = eval_wgrad(space, weak_gradient_local(space, 6, v.local(6)), xi, xi)
    np.testing.assert_allclose(gx, 1.0, atol=1e-12)
    np.testing.assert_allclose(gy, 0.0, atol=1e-12)


def test_dof_counts():
    m = build_uniform(3, 2)
    s = WGSpace(m)
    assert s.n_dofs == 9 * m.n_elements + 3 * m.n_edges
    bd = np.flatnonzero(s.boundary_dofs)
    expected = s.edge_dofs[m.boundary_edges].ravel()
    np.testing.assert_array_equal(np.sort(bd), np.sort(expected))


def test_alpha_below_one():
    with pytest.raises(ParameterError):
        WGSpace(build_uniform(2), alpha=0.5)
    with pytest.raises(ParameterError):
        WGSpace(build_uniform(2), h_mode="local")


def test_h_modes_agree_on_uniform_mesh():
    a = WGSpace(build_uniform(4), 2.0, "global").assemble()
    b = WGSpace(build_uniform(4), 2.0, "element").assemble()
    assert abs(a - b).max() < 1e-12 * abs(a).max()
    m = build_perturbed(0)
    np.testing.assert_allclose(WGSpace(m, 2.0, "global").stabilizer_scale(), m.h ** -2.0)
    np.testing.assert_allclose(WGSpace(m, 2.0, "element").stabilizer_scale(), m.element_diameters ** -2.0)


@pytest.mark.parametrize("k", [1, 2])
@pytest.mark.parametrize("n", [2, 3, 4])
def test_matrix_symmetric_positive_definite(k, n):
    A = assemble(WGSpace(build_uniform(n, k), 2.0)).toarray()
    assert np.abs(A - A.T).max() <= 1e-12 * np.abs(A).max()
    assert np.linalg.eigvalsh(A).min() > 1e-8


def test_energy_positive_on_random_functions():
    s = WGSpace(build_uniform(4, 1), 1.0)
    rng = np.random.default_rng(5)
    for _ in range(20):
        c = np.zeros(s.n_dofs)
        c[s.free_dofs] = rng.normal(size=len(s.free_dofs))
        assert energy_norm(s, s.function(c)) > 0


@pytest.mark.parametrize("k", [1, 2, 3])
def test_stabilizer_vanishes_on_continuous(k):
    s = WGSpace(build_perturbed(1, k), 3.0)
    v = interpolate(s, lambda x, y: np.exp(x) * np.cos(3 * y))
    assert stabilizer_value(s, v) <= 1e-20
    assert energy_norm(s, v) == pytest.approx(broken_h1_seminorm(s, v), rel=1e-10)


def test_energy_norm_quadratic_form():
    s = WGSpace(build_uniform(3, 2), 2.0)
    rng = np.random.default_rng(6)
    c = rng.normal(size=s.n_dofs)
    v = s.function(c)
    assert energy_norm(s, v) ** 2 == pytest.approx(c @ (s.matrix @ c), rel=1e-10)
    assert stabilizer_value(s, v) == pytest.approx(c @ (s.stabilizer_matrix @ c), rel=1e-10)
    assert energy_norm(s, s.function()) == 0.0


def test_load_vector_examples():
    s = WGSpace(TensorMesh(np.array([0.0, 1.0]), np.array([0.0, 1.0]), 1))
    b = s.load_vector(lambda x, y: np.ones_like(x))
    np.testing.assert_allclose(b[s.interior_dofs[0]], 0.25, atol=1e-15)
    assert not b[s.edge_dofs].any()
    assert not load_vector(s, lambda x, y: 0 * x).any()


@pytest.mark.parametrize("k", [1, 2])
def test_load_vector_oracle(k):
    s = WGSpace(build_uniform(2, k))
    f = lambda x, y: 2 * PI**2 * np.sin(PI * x) * np.sin(PI * y)
    z = (lobatto_points(k) + 1) / 2
    g, w = np.polynomial.legendre.leggauss(12)
    oracle = np.zeros(s.n_dofs)
    m = s.mesh
    for e in range(m.n_elements):
        i, j = e % m.nx, e // m.nx
        X = m.xs[i] + 0.25 * (g + 1)
        Y = m.ys[j] + 0.25 * (g + 1)
        F = f(X[:, None], Y[None, :])
        for q in range(k + 1):
            for p in range(k + 1):
                phi = lagrange_1d(z, p, (g + 1) / 2)[:, None] * lagrange_1d(z, q, (g + 1) / 2)[None, :]
                oracle[s.interior_dofs[e, q * (k + 1) + p]] = np.sum(np.outer(w, w) * F * phi) / 16
    np.testing.assert_allclose(s.load_vector(f), oracle, atol=1e-10)


@pytest.mark.parametrize("alpha", [1.0, 2.0, 3.0, 4.5])
def test_exact_for_biquadratic(alpha):
    u = lambda x, y: x * (1 - x) * y * (1 - y)
    f = lambda x, y: 2 * (x * (1 - x) + y * (1 - y))
    s = WGSpace(build_uniform(4, 2), alpha)
    assert energy_norm(s, interpolate(s, u) - solve_wg(s, f)) <= 1e-9


def test_galerkin_orthogonality_and_boundary():
    s = WGSpace(build_uniform(8, 2), 2.0)
    f = lambda x, y: np.exp(x * y)
    uh = solve_wg(s, f)
    assert not uh.coeffs[s.boundary_dofs].any()
    r = s.assemble() @ uh.coeffs[s.free_dofs] - s.load_vector(f)[s.free_dofs]
    assert np.linalg.norm(r) <= 1e-9 * np.linalg.norm(s.load_vector(f))
    cg = solve_wg(s, f, method="cg")
    np.testing.assert_allclose(cg.coeffs, uh.coeffs, atol=1e-9)


def test_interior_values_are_nodal():
    s = WGSpace(build_uniform(2, 2))
    v = interpolate(s, lambda x, y: np.sin(x) + y**3)
    x, y = s.mesh.node_coords[s.mesh.element_nodes[2]].T
    np.testing.assert_allclose(v.interior[2], np.sin(x) + y**3, atol=1e-15)


def test_norm_ratio_stable_under_refinement():
    rng = np.random.default_rng(8)
    worst = []
    for n in (4, 8):
        s = WGSpace(build_uniform(n, 1), 1.0)
        ratios = []
        for _ in range(100):
            c = np.zeros(s.n_dofs)
            c[s.free_dofs] = rng.normal(size=len(s.free_dofs))
            v = s.function(c)
            ratios.append(broken_h1_seminorm(s, v) / energy_norm(s, v))
        worst.append(max(ratios))
    assert np.isfinite(worst).all()
    assert worst[1] < 2 * worst[0]


def test_dump_format():
    s = WGSpace(build_uniform(2, 1))
    v = s.function(np.arange(s.n_dofs) / 3)
    lines = v.dump().splitlines()
    assert len(lines) == s.n_dofs
    assert lines[0].split() == ["0", "I", "0", "0", "0"]
    last = lines[-1].split()
    assert last[1] == "E" and int(last[2]) == s.mesh.n_edges - 1 and last[3] == "1"
    assert float(lines[1].split()[-1]) == 1 / 3
