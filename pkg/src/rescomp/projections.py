"""Projection-based convex machinery shared by the measure solvers.

Everything operates on raw complex Hermitian ndarrays.  The module provides
exact Euclidean projectors (simplex, l1 ball, PSD slice), a Dykstra loop for
intersections, and two small structured solvers: a log-det barrier Newton
method for min-trace diagonal completions and a two-block ADMM for linear
objectives over intersections of projectable cones.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


def simplex_projection(v: np.ndarray, total: float = 1.0) -> np.ndarray:
    """Euclidean projection of v onto {x >= 0, sum x = total}."""
    v = np.asarray(v, dtype=float)
    if total < 0:
        raise ValueError("total must be >= 0")
    u = np.sort(v)[::-1]
    css = np.cumsum(u) - total
    idx = np.arange(1, len(v) + 1)
    cond = u - css / idx > 0
    k = int(np.nonzero(cond)[0][-1]) + 1 if np.any(cond) else 1
    theta = css[k - 1] / k
    return np.maximum(v - theta, 0.0)


def l1_ball_projection(v: np.ndarray, radius: float) -> np.ndarray:
    """Euclidean projection of v onto {x : sum |x_i| <= radius}."""
    v = np.asarray(v, dtype=float)
    if radius <= 0:
        return np.zeros_like(v)
    if np.sum(np.abs(v)) <= radius:
        return v.copy()
    w = simplex_projection(np.abs(v), radius)
    return np.sign(v) * w


def hermitian_part(mat: np.ndarray) -> np.ndarray:
    return 0.5 * (mat + mat.conj().T)


def proj_psd(mat: np.ndarray) -> np.ndarray:
    vals, vecs = np.linalg.eigh(hermitian_part(mat))
    vals = np.clip(vals, 0.0, None)
    return (vecs * vals) @ vecs.conj().T


def proj_psd_trace(mat: np.ndarray, total: float) -> np.ndarray:
    """Projection onto {X >= 0, tr X = total} via eigenvalue simplex projection."""
    vals, vecs = np.linalg.eigh(hermitian_part(mat))
    vals = simplex_projection(vals, total)
    return (vecs * vals) @ vecs.conj().T


def proj_density(mat: np.ndarray) -> np.ndarray:
    """Projection onto the density-matrix set {X >= 0, tr X = 1}."""
    return proj_psd_trace(mat, 1.0)


def proj_trace_norm_ball(mat: np.ndarray, center: np.ndarray, radius: float) -> np.ndarray:
    """Projection onto {X Hermitian : ||X - center||_1 <= radius}.

    Frobenius projection onto a trace-norm ball shrinks the eigenvalues of
    the difference onto the l1 ball (the minimizer commutes with it).
    """
    delta = hermitian_part(mat - center)
    vals, vecs = np.linalg.eigh(delta)
    vals = l1_ball_projection(vals, radius)
    return center + (vecs * vals) @ vecs.conj().T


def proj_spectral_box(mat: np.ndarray, lo: float = 0.0, hi: float = 1.0) -> np.ndarray:
    """Projection onto {lo * I <= X <= hi * I}."""
    vals, vecs = np.linalg.eigh(hermitian_part(mat))
    vals = np.clip(vals, lo, hi)
    return (vecs * vals) @ vecs.conj().T


def proj_halfspace_trace(mat: np.ndarray, normal: np.ndarray, bound: float) -> np.ndarray:
    """Projection onto {X : Re tr(normal^dag X) >= bound} (normal Hermitian)."""
    val = float(np.real(np.vdot(normal, mat)))
    if val >= bound:
        return mat
    nsq = float(np.real(np.vdot(normal, normal)))
    return mat + ((bound - val) / nsq) * normal


@dataclass
class DykstraResult:
    point: object
    residual: float
    iterations: int
    converged: bool


def dykstra(
    projectors,
    x0,
    max_iterations: int = 20000,
    tol: float = 1e-8,
    stall_window: int = 200,
    stall_factor: float = 1.0 - 1e-6,
):
    """Dykstra's algorithm for the intersection of convex sets.

    ``projectors`` is a list of callables on the iterate (an ndarray or a
    tuple of ndarrays handled by the caller via flattening).  Returns the
    final iterate together with the cycle residual: the largest move any
    single projection made during the last cycle.  ``converged`` means the
    residual fell below ``tol``; a residual that stops shrinking (stall) ends
    the loop early and signals an (approximately) empty intersection.
    """
    x = np.array(x0, dtype=complex)
    increments = [np.zeros_like(x) for _ in projectors]
    best_resid = np.inf
    stall_count = 0
    it = 0
    for it in range(1, max_iterations + 1):
        resid = 0.0
        for j, proj in enumerate(projectors):
            y = x + increments[j]
            px = proj(y)
            increments[j] = y - px
            resid = max(resid, float(np.max(np.abs(px - x))) if it > 0 else 0.0)
            x = px
        if resid < tol:
            return DykstraResult(x, resid, it, True)
        if resid < best_resid * stall_factor:
            best_resid = resid
            stall_count = 0
        else:
            stall_count += 1
            if stall_count >= stall_window:
                return DykstraResult(x, resid, it, False)
    return DykstraResult(x, resid, it, False)


def simplex_qp(gram: np.ndarray, lin: np.ndarray, max_iterations: int = 5000, tol: float = 1e-12):
    """min_w 0.5 w^T G w + lin^T w over the probability simplex, via FISTA."""
    n = len(lin)
    w = np.full(n, 1.0 / n)
    z = w.copy()
    t = 1.0
    lip = float(np.linalg.norm(gram, ord=2)) + 1e-15
    prev = None
    for _ in range(max_iterations):
        grad = gram @ z + lin
        w_new = simplex_projection(z - grad / lip)
        t_new = 0.5 * (1.0 + np.sqrt(1.0 + 4.0 * t * t))
        z = w_new + ((t - 1.0) / t_new) * (w_new - w)
        w, t = w_new, t_new
        if prev is not None and np.max(np.abs(w - prev)) < tol:
            break
        prev = w.copy()
    return w


def min_trace_diagonal_completion(
    offdiag: np.ndarray,
    gap_tol: float = 1e-9,
    max_newton: int = 200,
):
    """Solve min sum(a) s.t. diag(a) + C >= 0 where C = ``offdiag`` (zero diag).

    Log-det barrier with Newton steps on the diagonal variable.  Returns
    (a, value, gap_bound).  The duality gap of the barrier subproblem at
    parameter t is d/t, reported as the certified gap bound.
    """
    c = hermitian_part(np.asarray(offdiag, dtype=complex))
    d = c.shape[0]
    scale = float(np.linalg.norm(c, ord=2))
    if scale < 1e-15:
        return np.zeros(d), 0.0, 0.0
    a = np.full(d, scale * 1.5 + 1e-12)
    t = 1.0 / scale
    gap = d / t
    while gap > gap_tol:
        for _ in range(max_newton):
            m = np.diag(a) + c
            try:
                minv = np.linalg.inv(m)
            except np.linalg.LinAlgError:
                a += 0.1 * scale
                continue
            grad = t * np.ones(d) - np.real(np.diagonal(minv))
            hess = np.abs(minv) ** 2
            try:
                step = np.linalg.solve(hess, grad)
            except np.linalg.LinAlgError:
                step = grad / np.maximum(np.diagonal(hess), 1e-300)
            decrement = float(grad @ step)
            # Backtrack to stay strictly feasible.
            alpha = 1.0
            for _ in range(60):
                cand = a - alpha * step
                mc = np.diag(cand) + c
                if np.linalg.eigvalsh(mc)[0] > 0:
                    break
                alpha *= 0.5
            else:
                break
            a = a - alpha * step
            if decrement < 1e-12:
                break
        t *= 8.0
        gap = d / t
    return a, float(np.sum(a)), gap


def admm_linear_two_sets(
    objective: np.ndarray,
    proj_a,
    proj_b,
    dim: int,
    penalty: float = 1.0,
    max_iterations: int = 20000,
    tol: float = 1e-9,
    x0: np.ndarray | None = None,
):
    """min Re tr(G X) over {X in A} cap {X in B} with Euclidean projectors.

    Two-block consensus ADMM; the linear objective is folded into the A-side
    proximal step.  Returns (X, primal_residual, iterations).
    """
    g = np.asarray(objective, dtype=complex)
    x = np.zeros((dim, dim), dtype=complex) if x0 is None else np.array(x0, dtype=complex)
    z = x.copy()
    u = np.zeros_like(x)
    resid = np.inf
    it = 0
    for it in range(1, max_iterations + 1):
        x = proj_a(z - u - g / penalty)
        z_old = z
        z = proj_b(x + u)
        u = u + x - z
        primal = float(np.max(np.abs(x - z)))
        dual = penalty * float(np.max(np.abs(z - z_old)))
        resid = max(primal, dual)
        if resid < tol:
            break
        # residual balancing: keep primal and dual progress comparable
        if it % 50 == 0:
            if primal > 10.0 * dual:
                penalty *= 2.0
                u /= 2.0
            elif dual > 10.0 * primal:
                penalty /= 2.0
                u *= 2.0
    return x, resid, it
