import numpy as np
import pytest

from artifact import kernels
from artifact._kernels_py import horner_many as np_horner


def _data(seed=0):
    rng = np.random.default_rng(seed)
    c = rng.standard_normal(50) + 1j * rng.standard_normal(50)
    z = 0.9 * np.exp(2j * np.pi * rng.random(300))
    return c, z


def test_backend_name():
    assert kernels.BACKEND in ("cython", "python")
    assert "python" in kernels.backends()


def test_horner_matches_polyval(backend):
    c, z = _data()
    got = kernels.horner_many(c, z)
    assert np.allclose(got, np.polyval(c[::-1], z), rtol=1e-12, atol=1e-12)


def test_horner_abs_is_majorant(backend):
    c, z = _data(1)
    vals = np.abs(kernels.horner_many(c, z))
    scale = kernels.horner_abs_many(np.abs(c), np.abs(z))
    assert np.all(vals <= scale * (1 + 1e-12))


def test_arg_increments_sum_to_winding(backend):
    th = np.linspace(0, 2 * np.pi, 2001)
    vals = np.exp(3j * th) * (2 + np.cos(th))
    inc = kernels.arg_increments(vals)
    assert inc.shape == (2000,)
    assert round(inc.sum() / (2 * np.pi)) == 3


def test_arg_increments_empty(backend):
    assert kernels.arg_increments(np.array([1 + 0j])).shape == (0,)


def test_poly_eval_many(backend):
    rng = np.random.default_rng(2)
    exps = rng.integers(0, 4, size=(12, 3)).astype(np.int64)
    coeffs = rng.standard_normal(12) + 0j
    pts = rng.standard_normal((40, 3)) + 1j * rng.standard_normal((40, 3))
    got = kernels.poly_eval_many(exps, coeffs, pts)
    want = [sum(c * np.prod(p ** e) for e, c in zip(exps, coeffs)) for p in pts]
    assert np.allclose(got, want, rtol=1e-11)


@pytest.mark.skipif("cython" not in kernels.backends(), reason="extension not built")
def test_backends_agree():
    cy = kernels.backends()["cython"]
    c, z = _data(3)
    assert np.max(np.abs(cy.horner_many(c, z) - np_horner(c, z))) < 1e-12
