"""Real 2x2 matrices with the exact closed-form queries the analysis needs.

Hand-rolled on purpose: the linearizations and propagators in this package
are 2x2 and their determinant/trace identities carry the whole argument, so
the arithmetic stays explicit instead of going through an array library.
"""

import math
from dataclasses import dataclass

Vec2 = tuple[float, float]


@dataclass(frozen=True)
class Mat2:
    a11: float
    a12: float
    a21: float
    a22: float

    @staticmethod
    def identity() -> "Mat2":
        return Mat2(1.0, 0.0, 0.0, 1.0)

    @staticmethod
    def zero() -> "Mat2":
        return Mat2(0.0, 0.0, 0.0, 0.0)

    @property
    def trace(self) -> float:
        return self.a11 + self.a22

    @property
    def det(self) -> float:
        return self.a11 * self.a22 - self.a12 * self.a21

    def __add__(self, other: "Mat2") -> "Mat2":
        return Mat2(
            self.a11 + other.a11,
            self.a12 + other.a12,
            self.a21 + other.a21,
            self.a22 + other.a22,
        )

    def __sub__(self, other: "Mat2") -> "Mat2":
        return Mat2(
            self.a11 - other.a11,
            self.a12 - other.a12,
            self.a21 - other.a21,
            self.a22 - other.a22,
        )

    def __matmul__(self, other: "Mat2") -> "Mat2":
        return Mat2(
            self.a11 * other.a11 + self.a12 * other.a21,
            self.a11 * other.a12 + self.a12 * other.a22,
            self.a21 * other.a11 + self.a22 * other.a21,
            self.a21 * other.a12 + self.a22 * other.a22,
        )

    def scale(self, s: float) -> "Mat2":
        return Mat2(s * self.a11, s * self.a12, s * self.a21, s * self.a22)

    def apply(self, v: Vec2) -> Vec2:
        return (
            self.a11 * v[0] + self.a12 * v[1],
            self.a21 * v[0] + self.a22 * v[1],
        )

    def transpose(self) -> "Mat2":
        return Mat2(self.a11, self.a21, self.a12, self.a22)

    def inverse(self) -> "Mat2":
        d = self.det
        if d == 0.0:
            raise ZeroDivisionError("singular 2x2 matrix")
        return Mat2(self.a22 / d, -self.a12 / d, -self.a21 / d, self.a11 / d)

    def power(self, n: int) -> "Mat2":
        """n-th matrix power by binary exponentiation, n >= 0."""
        if n < 0:
            raise ValueError("negative power")
        result = Mat2.identity()
        base = self
        while n:
            if n & 1:
                result = result @ base
            base = base @ base
            n >>= 1
        return result

    def solve(self, b: Vec2) -> Vec2:
        """Solve self @ x = b by Cramer's rule."""
        d = self.det
        if d == 0.0:
            raise ZeroDivisionError("singular 2x2 matrix")
        return (
            (b[0] * self.a22 - self.a12 * b[1]) / d,
            (self.a11 * b[1] - b[0] * self.a21) / d,
        )

    @property
    def max_norm(self) -> float:
        return max(abs(self.a11), abs(self.a12), abs(self.a21), abs(self.a22))

    @property
    def frobenius_sq(self) -> float:
        return (
            self.a11 * self.a11
            + self.a12 * self.a12
            + self.a21 * self.a21
            + self.a22 * self.a22
        )

    def is_close(self, other: "Mat2", tol: float) -> bool:
        return (self - other).max_norm <= tol


def norm2(v: Vec2) -> float:
    return math.hypot(v[0], v[1])


def normalized(v: Vec2) -> Vec2:
    """Unit vector with a deterministic sign: first significant component positive."""
    n = norm2(v)
    if n == 0.0:
        raise ValueError("cannot normalize the zero vector")
    u = (v[0] / n, v[1] / n)
    lead = u[0] if abs(u[0]) > 1e-12 else u[1]
    if lead < 0.0:
        u = (-u[0], -u[1])
    return u
