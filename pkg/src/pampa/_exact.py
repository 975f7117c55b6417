"""Small exact-arithmetic linear algebra on nested lists of Fractions."""

from fractions import Fraction


def as_fraction_matrix(rows):
    return [[Fraction(x) for x in row] for row in rows]


def matmul(a, b):
    n, m, p = len(a), len(b), len(b[0])
    return [[sum((a[i][k] * b[k][j] for k in range(m)), Fraction(0)) for j in range(p)]
            for i in range(n)]


def transpose(a):
    return [list(col) for col in zip(*a)]


def identity(n):
    return [[Fraction(int(i == j)) for j in range(n)] for i in range(n)]


def inverse(a):
    """Gauss-Jordan inverse; raises ``ZeroDivisionError`` on a singular matrix."""
    n = len(a)
    aug = [list(row) + e for row, e in zip(as_fraction_matrix(a), identity(n))]
    for col in range(n):
        pivot = next((r for r in range(col, n) if aug[r][col] != 0), None)
        if pivot is None:
            raise ZeroDivisionError("singular matrix")
        aug[col], aug[pivot] = aug[pivot], aug[col]
        inv_p = 1 / aug[col][col]
        aug[col] = [x * inv_p for x in aug[col]]
        for r in range(n):
            if r != col and aug[r][col] != 0:
                factor = aug[r][col]
                aug[r] = [x - factor * y for x, y in zip(aug[r], aug[col])]
    return [row[n:] for row in aug]


def to_float(a):
    import numpy as np

    return np.array([[float(x) for x in row] for row in a])
