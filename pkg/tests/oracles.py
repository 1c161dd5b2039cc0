"""Independent small-scale oracles used to cross-check library results.

Deliberately avoids numpy.linalg so factorization-based code paths are
checked against a different algorithm entirely.
"""

import math


def jacobi_eigenvalues(a, max_sweeps=200, tol=1e-14):
    """Eigenvalues of a small symmetric matrix by cyclic Jacobi rotations."""
    n = len(a)
    m = [[float(a[i][j]) for j in range(n)] for i in range(n)]
    for _ in range(max_sweeps):
        off = math.sqrt(sum(m[i][j] ** 2 for i in range(n)
                            for j in range(n) if i != j))
        if off < tol:
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                if abs(m[p][q]) < 1e-300:
                    continue
                theta = 0.5 * math.atan2(2.0 * m[p][q], m[q][q] - m[p][p])
                c, s = math.cos(theta), math.sin(theta)
                for k in range(n):
                    mkp, mkq = m[k][p], m[k][q]
                    m[k][p] = c * mkp - s * mkq
                    m[k][q] = s * mkp + c * mkq
                for k in range(n):
                    mpk, mqk = m[p][k], m[q][k]
                    m[p][k] = c * mpk - s * mqk
                    m[q][k] = s * mpk + c * mqk
    return sorted(m[i][i] for i in range(n))


def brute_force_largest_k(values, k):
    """Largest-K norm by full sort."""
    return sum(sorted((abs(v) for v in values), reverse=True)[:k])


def brute_force_topk_indices(values, k):
    """Indices of the k largest magnitudes: |v| descending, index ascending."""
    order = sorted(range(len(values)), key=lambda i: (-abs(values[i]), i))
    return order[:k]
