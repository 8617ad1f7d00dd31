import numpy as np
import pytest
import scipy.sparse as sp
from hypothesis import given, settings
from hypothesis import strategies as st

from clampedplate.grid import Domain, build_grid
from clampedplate.operators import (
    Stencils,
    assemble_biharmonic,
    assemble_laplacian,
    write_coo,
)


def _interior_far(grid, dist):
    """Mask of interior nodes at least ``dist`` from every box face."""
    x = grid.coords
    lo = np.asarray(grid.domain.origin)
    hi = lo + np.asarray(grid.domain.extents)
    return np.all((x - lo >= dist - 1e-12) & (hi - x >= dist - 1e-12), axis=1)


def test_laplacian_3x3():
    g = build_grid(Domain.interval(), 4)
    A = assemble_laplacian(g).toarray()
    np.testing.assert_array_equal(A, [[32, -16, 0], [-16, 32, -16], [0, -16, 32]])
    lam = np.linalg.eigvalsh(A)[0]
    assert lam == pytest.approx(64 * np.sin(np.pi / 8) ** 2, rel=1e-14)
    assert lam == pytest.approx(9.3726, abs=1e-4)


def test_laplacian_constant_rows():
    g = build_grid(Domain.interval(), 10)
    out = assemble_laplacian(g) @ np.ones(g.N)
    assert out[0] != 0 and out[-1] != 0
    np.testing.assert_array_equal(out[1:-1], 0.0)


def test_beam_biharmonic_3x3():
    g = build_grid(Domain.interval(), 4)
    B = assemble_biharmonic(g).toarray()
    np.testing.assert_array_equal(B * g.h**4, [[7, -4, 1], [-4, 6, -4], [1, -4, 7]])
    lam = np.linalg.eigvalsh(B)
    np.testing.assert_allclose(lam, 256 * np.array([7 - np.sqrt(33), 6, 7 + np.sqrt(33)]), rtol=1e-13)
    v = B @ np.array([1.0, 2.0, 1.0])
    assert v[0] == v[2]


def test_square_corner_diagonal():
    g = build_grid(Domain.box([1, 1]), 6)
    B = assemble_biharmonic(g) * g.h**4
    assert B[0, 0] == 22
    # 13-point footprint at most
    assert np.diff(B.tocsr().indptr).max() <= 13
    mid = g.linear_index((3, 3))
    assert B[mid, mid] == 20


@pytest.mark.parametrize(
    "dom,d", [(Domain.interval(), 30), (Domain.box([1, 1]), 12), (Domain.box([1, 2]), (6, 12)), (Domain.disk(), 20)]
)
def test_biharmonic_exactly_symmetric(dom, d):
    g = build_grid(dom, d)
    B = assemble_biharmonic(g).tocsr()
    D = (B - B.T).tocsr()
    D.eliminate_zeros()
    assert D.nnz == 0


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 2**32 - 1), st.sampled_from(["beam", "square", "disk"]))
def test_quadratic_form_identity(seed, kind):
    dom = {"beam": Domain.interval(), "square": Domain.box([1, 1]), "disk": Domain.disk()}[kind]
    g = build_grid(dom, 12)
    u = np.random.default_rng(seed).standard_normal(g.N)
    B = assemble_biharmonic(g)
    lhs = g.inner_product(u, B @ u)
    rhs = g.integrate(Stencils(g).laplacian(u) ** 2)
    assert lhs == pytest.approx(rhs, rel=1e-12)


def test_positive_definite():
    g = build_grid(Domain.disk(), 16)
    assert np.linalg.eigvalsh(assemble_biharmonic(g).toarray())[0] > 0


def _sample(grid, f):
    return f(*grid.coords.T)


def test_gradient_of_sine_second_order():
    errs = []
    for d in (20, 40, 80):
        g = build_grid(Domain.interval(), d)
        grad = g.gather(Stencils(g).gradient(_sample(g, lambda x: np.sin(np.pi * x)))[0])
        far = _interior_far(g, 0.1)
        errs.append(np.max(np.abs(grad - np.pi * np.cos(np.pi * g.coords[:, 0]))[far]))
    rates = np.log2(np.array(errs[:-1]) / errs[1:])
    np.testing.assert_allclose(rates, 2.0, atol=0.1)


def test_grad_laplacian_of_sine_second_order():
    errs = []
    for d in (20, 40, 80):
        g = build_grid(Domain.interval(), d)
        gl = g.gather(Stencils(g).grad_laplacian(_sample(g, lambda x: np.sin(np.pi * x)))[0])
        far = _interior_far(g, 0.1)
        errs.append(np.max(np.abs(gl + np.pi**3 * np.cos(np.pi * g.coords[:, 0]))[far]))
    rates = np.log2(np.array(errs[:-1]) / errs[1:])
    np.testing.assert_allclose(rates, 2.0, atol=0.1)


def test_pure_second_of_bump_second_order():
    errs = []
    for d in (20, 40, 80):
        g = build_grid(Domain.interval(), d)
        s = g.gather(Stencils(g).pure_second(_sample(g, lambda x: x**2 * (1 - x) ** 2))[0])
        x = g.coords[:, 0]
        errs.append(np.max(np.abs(s - (2 - 12 * x + 12 * x**2))))
    rates = np.log2(np.array(errs[:-1]) / errs[1:])
    np.testing.assert_allclose(rates, 2.0, atol=0.1)


def test_difference_exactness_on_polynomials():
    g = build_grid(Domain.interval(), 16)
    st_ = Stencils(g)
    x = g.coords[:, 0]
    far = _interior_far(g, 2.5 * g.h)
    cubic = x**3 - 0.7 * x**2 + 0.1 * x
    np.testing.assert_allclose(
        g.gather(st_.pure_second(cubic)[0])[far], (6 * x - 1.4)[far], atol=1e-10
    )
    quad = 0.3 * x**2 - x
    np.testing.assert_allclose(g.gather(st_.gradient(quad)[0])[far], (0.6 * x - 1)[far], atol=1e-12)
    # centered first differences of a cubic carry the exact error h^2 u'''/6
    np.testing.assert_allclose(
        g.gather(st_.gradient(cubic)[0])[far],
        (3 * x**2 - 1.4 * x + 0.1 + g.h**2)[far],
        atol=1e-11,
    )


def test_separable_second_derivatives():
    g = build_grid(Domain.box([1, 1]), 40)
    x, y = g.coords.T
    f = lambda x: np.sin(np.pi * x)
    u = f(x) * y**2 * (1 - y) ** 2
    sx, sy = (g.gather(s) for s in Stencils(g).pure_second(u))
    far = _interior_far(g, 0.1)
    np.testing.assert_allclose(sx[far], (-np.pi**2 * f(x) * y**2 * (1 - y) ** 2)[far], atol=5e-3)
    np.testing.assert_allclose(sy[far], (f(x) * (2 - 12 * y + 12 * y**2))[far], atol=5e-3)


def test_one_dimensional_second_equals_laplacian():
    g = build_grid(Domain.interval(), 25)
    u = np.random.default_rng(1).standard_normal(g.N)
    s = Stencils(g)
    np.testing.assert_array_equal(s.pure_second(u)[0], s.laplacian(u))


def test_parity_and_linearity():
    g = build_grid(Domain.interval(), 20)
    x = g.coords[:, 0]
    s = Stencils(g)
    odd = np.sin(2 * np.pi * x)  # odd about x = 1/2
    d = g.gather(s.gradient(odd)[0])
    np.testing.assert_allclose(d, d[::-1], atol=1e-12)
    rng = np.random.default_rng(0)
    u, v = rng.standard_normal((2, g.N))
    np.testing.assert_allclose(
        s.grad_laplacian(u + v)[0], s.grad_laplacian(u)[0] + s.grad_laplacian(v)[0], atol=1e-6
    )
    assert np.all(s.gradient(np.zeros(g.N))[0] == 0)
    assert np.all(s.grad_laplacian(np.zeros(g.N))[0] == 0)


def test_write_coo(tmp_path):
    g = build_grid(Domain.interval(), 4)
    B = assemble_biharmonic(g)
    path = tmp_path / "b.coo"
    write_coo(B, path)
    lines = path.read_text().splitlines()
    assert lines[0] == "% 3 3 6"
    rows = [l.split() for l in lines[1:]]
    back = np.zeros((3, 3))
    for r, c, v in rows:
        back[int(r), int(c)] = back[int(c), int(r)] = float(v)
    np.testing.assert_array_equal(back, B.toarray())
    assert rows[0] == ["0", "0", "1792"]
