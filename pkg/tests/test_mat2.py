import numpy as np
import pytest

from symbound.mat2 import Mat2, normalized


def _to_np(m: Mat2):
    return np.array([[m.a11, m.a12], [m.a21, m.a22]])


def _rand(rng):
    return Mat2(*map(float, rng.uniform(-3.0, 3.0, 4)))


def test_arithmetic_against_numpy():
    rng = np.random.default_rng(3)
    for _ in range(200):
        a, b = _rand(rng), _rand(rng)
        assert np.allclose(_to_np(a @ b), _to_np(a) @ _to_np(b), rtol=0, atol=1e-14)
        assert np.allclose(_to_np(a + b), _to_np(a) + _to_np(b))
        assert np.allclose(_to_np(a - b), _to_np(a) - _to_np(b))
        assert abs(a.det - np.linalg.det(_to_np(a))) <= 1e-12 * (1 + a.frobenius_sq)
        assert a.trace == _to_np(a).trace()


def test_inverse_and_solve():
    rng = np.random.default_rng(5)
    for _ in range(100):
        m = _rand(rng)
        if abs(m.det) < 1e-3:
            continue
        assert (m @ m.inverse()).is_close(Mat2.identity(), 1e-12)
        b = tuple(map(float, rng.uniform(-2, 2, 2)))
        x = m.solve(b)
        got = m.apply(x)
        assert abs(got[0] - b[0]) <= 1e-10 and abs(got[1] - b[1]) <= 1e-10


def test_singular_inverse_raises():
    with pytest.raises(ZeroDivisionError):
        Mat2(1.0, 2.0, 2.0, 4.0).inverse()


def test_power_binary_exponentiation():
    rng = np.random.default_rng(9)
    m = Mat2(0.9, -0.4, 0.4, 0.9)
    for n in (0, 1, 2, 7, 31, 100):
        assert np.allclose(
            _to_np(m.power(n)), np.linalg.matrix_power(_to_np(m), n), atol=1e-10
        )
    with pytest.raises(ValueError):
        m.power(-1)


def test_normalized_sign_convention():
    assert normalized((0.0, -2.0)) == (0.0, 1.0)
    assert normalized((-3.0, 0.0)) == (1.0, -0.0)
    u = normalized((1.0, 1.0))
    assert abs(u[0] ** 2 + u[1] ** 2 - 1.0) < 1e-15
    with pytest.raises(ValueError):
        normalized((0.0, 0.0))
