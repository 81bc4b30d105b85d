"""P1 finite-element oracle for the first nonzero Neumann eigenvalue.

Structured n^2-cell triangulation of the input triangle, conforming P1
stiffness/mass pencil, smallest nonzero eigenvalue by inverse iteration with
the constant mode projected out. Accuracy is O(n^-2); this brackets the
collocation solver, it does not replace it.
"""

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla


class FemConvergenceError(RuntimeError):
    pass


def _structured_mesh(tri, n):
    """Nodes and cells of the n^2-cell refinement of tri."""
    idx = -np.ones((n + 1, n + 1), dtype=int)
    pts = []
    for i in range(n + 1):
        for j in range(n + 1 - i):
            idx[i, j] = len(pts)
            z = tri.v1 + (i / n) * (tri.v2 - tri.v1) + (j / n) * (tri.v3 - tri.v1)
            pts.append((z.real, z.imag))
    cells = []
    for i in range(n):
        for j in range(n - i):
            a, b, c = idx[i, j], idx[i + 1, j], idx[i, j + 1]
            cells.append((a, b, c))
            if i + j < n - 1:
                d = idx[i + 1, j + 1]
                cells.append((b, d, c))
    return np.array(pts), np.array(cells, dtype=int)


def _assemble_p1(pts, cells):
    x = pts[cells, 0]
    y = pts[cells, 1]
    b = np.stack([y[:, 1] - y[:, 2], y[:, 2] - y[:, 0], y[:, 0] - y[:, 1]], axis=1)
    c = np.stack([x[:, 2] - x[:, 1], x[:, 0] - x[:, 2], x[:, 1] - x[:, 0]], axis=1)
    area2 = x[:, 0] * b[:, 0] + x[:, 1] * b[:, 1] + x[:, 2] * b[:, 2]
    area = 0.5 * np.abs(area2)

    ke = (b[:, :, None] * b[:, None, :] + c[:, :, None] * c[:, None, :]) \
        / (4.0 * area)[:, None, None]
    me = (np.ones((3, 3)) + np.eye(3))[None, :, :] * (area / 12.0)[:, None, None]

    rows = np.repeat(cells, 3, axis=1).ravel()
    cols = np.tile(cells, (1, 3)).ravel()
    npts = len(pts)
    K = sp.coo_matrix((ke.ravel(), (rows, cols)), shape=(npts, npts)).tocsc()
    M = sp.coo_matrix((me.ravel(), (rows, cols)), shape=(npts, npts)).tocsc()
    return K, M


def fem_bracket(tri, n=32, tol=1e-10, max_iter=200):
    """Smallest nonzero Neumann eigenvalue of tri on the n^2-cell mesh.

    Two-vector inverse iteration with the constant mode projected out and a
    Rayleigh-Ritz step each sweep; the block handles the (near-)degenerate
    pair of near-equilateral triangles, where a single vector stalls.
    """
    if not 8 <= n <= 64:
        raise ValueError(f"refinement n={n} outside [8, 64]")
    pts, cells = _structured_mesh(tri, n)
    K, M = _assemble_p1(pts, cells)

    # shift keeps the factored operator SPD; Payne-Weinberger gives
    # mu_2 >= pi^2/diam^2, so the shift stays below the target eigenvalue
    shift = 0.5 * np.pi**2 / tri.diameter**2
    lu = spla.splu(K + shift * M)

    ones = np.ones(len(pts))
    m_ones = M @ ones
    ones_norm2 = float(ones @ m_ones)

    rng = np.random.default_rng(1234)
    v_block = rng.standard_normal((len(pts), 2))
    mu_prev = np.inf
    for _ in range(max_iter):
        v_block = lu.solve(M @ v_block)
        v_block -= np.outer(ones, (m_ones @ v_block) / ones_norm2)
        # M-orthonormalize the block
        for j in range(2):
            for i in range(j):
                v_block[:, j] -= (v_block[:, i] @ (M @ v_block[:, j])) \
                    * v_block[:, i]
            v_block[:, j] /= np.sqrt(v_block[:, j] @ (M @ v_block[:, j]))
        k_r = v_block.T @ (K @ v_block)
        m_r = v_block.T @ (M @ v_block)
        mu = float(np.min(np.linalg.eigvals(np.linalg.solve(m_r, k_r)).real))
        if abs(mu - mu_prev) <= tol * abs(mu):
            return mu
        mu_prev = mu
    raise FemConvergenceError(
        f"inverse iteration did not converge in {max_iter} steps (last mu={mu_prev})"
    )
