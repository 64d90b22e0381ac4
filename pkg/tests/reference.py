"""Independent reference implementations used as test oracles.

Everything here deliberately avoids the code paths under test: connectivity
by breadth-first search (the library uses union-find), eigenvalues through
the characteristic polynomial (Faddeev-LeVerrier coefficients plus sign
bisection; the library uses Jacobi rotations), determinants by cofactor
expansion, and quadratic forms by explicit loops.
"""

from __future__ import annotations

from collections import deque

import numpy as np


def bfs_jointly_connected(weights: np.ndarray, leader_weights: np.ndarray) -> bool:
    """Every follower component must reach an agent with a leader edge."""
    n = len(leader_weights)
    seen = [False] * n
    for start in range(n):
        if seen[start]:
            continue
        component = []
        queue = deque([start])
        seen[start] = True
        while queue:
            i = queue.popleft()
            component.append(i)
            for j in range(n):
                if not seen[j] and weights[i, j] > 0.0:
                    seen[j] = True
                    queue.append(j)
        if not any(leader_weights[i] > 0.0 for i in component):
            return False
    return True


def charpoly_coefficients(m: np.ndarray) -> np.ndarray:
    """Characteristic polynomial coefficients by Faddeev-LeVerrier.

    Returns c with det(lambda I - M) = sum_j c[j] lambda^(n-j), c[0] = 1.
    Uses only matrix products and traces.
    """
    n = m.shape[0]
    coeffs = np.zeros(n + 1)
    coeffs[0] = 1.0
    mk = np.zeros_like(m)
    for k in range(1, n + 1):
        mk = m @ (mk + coeffs[k - 1] * np.eye(n))
        coeffs[k] = -np.trace(mk) / k
    return coeffs


def charpoly_eigenvalues(m: np.ndarray, tol: float = 1e-14) -> np.ndarray:
    """All-real eigenvalues of a symmetric matrix with distinct spectrum,
    found by bisection on sign changes of the characteristic polynomial.

    Multiple eigenvalues produce no sign change and are not found; callers
    must only use this oracle on matrices with distinct eigenvalues.
    """
    coeffs = charpoly_coefficients(m)

    def poly(x: float) -> float:
        acc = 0.0
        for c in coeffs:
            acc = acc * x + c
        return acc

    radius = float(np.max(np.sum(np.abs(m), axis=1))) + 1.0
    grid = np.linspace(-radius, radius, 200001)
    vals = np.array([poly(x) for x in grid])
    roots = []
    for a, b, fa, fb in zip(grid[:-1], grid[1:], vals[:-1], vals[1:]):
        if fa == 0.0:
            roots.append(a)
            continue
        if fa * fb < 0.0:
            lo, hi, flo = a, b, fa
            for _ in range(200):
                mid = 0.5 * (lo + hi)
                fm = poly(mid)
                if fm == 0.0:
                    lo = hi = mid
                    break
                if flo * fm < 0.0:
                    hi = mid
                else:
                    lo, flo = mid, fm
                if hi - lo < tol * max(1.0, abs(mid)):
                    break
            roots.append(0.5 * (lo + hi))
    if vals[-1] == 0.0:
        roots.append(grid[-1])
    return np.array(sorted(roots))


def cofactor_determinant(m: np.ndarray) -> float:
    """Determinant by recursive cofactor expansion along the first row."""
    n = m.shape[0]
    if n == 1:
        return float(m[0, 0])
    total = 0.0
    rest = np.arange(1, n)
    for j in range(n):
        minor = m[np.ix_(rest, [c for c in range(n) if c != j])]
        total += ((-1.0) ** j) * float(m[0, j]) * cofactor_determinant(minor)
    return total


def quadratic_form_loops(p: np.ndarray, z: np.ndarray) -> float:
    """z' P z evaluated entry by entry."""
    total = 0.0
    for i in range(len(z)):
        for j in range(len(z)):
            total += z[i] * p[i, j] * z[j]
    return total


def schedule_mode_modular(entries, time: float) -> int:
    """Cycling-schedule lookup by explicit modular arithmetic."""
    period = sum(d for _, d in entries)
    t = time % period
    acc = 0.0
    for idx, dur in entries:
        if acc <= t < acc + dur:
            return idx
        acc += dur
    return entries[-1][0]


def random_connected_topology(rng: np.random.Generator, n_max: int = 6):
    """Random jointly connected topology: spanning tree plus extra edges,
    weights in (0, 2], and at least one leader attachment per component
    (a single attachment suffices since the follower graph is connected)."""
    n = int(rng.integers(2, n_max + 1))
    w = np.zeros((n, n))
    order = rng.permutation(n)
    for pos in range(1, n):
        a = order[pos]
        b = order[rng.integers(0, pos)]
        w[a, b] = w[b, a] = rng.uniform(0.05, 2.0)
    for _ in range(int(rng.integers(0, n))):
        a, b = rng.integers(0, n, size=2)
        if a != b:
            w[a, b] = w[b, a] = rng.uniform(0.05, 2.0)
    b_vec = np.zeros(n)
    b_vec[rng.integers(0, n)] = rng.uniform(0.05, 2.0)
    return n, w, b_vec
