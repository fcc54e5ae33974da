"""Brute-force reference solvers for the condensed QP.

The active-set enumeration is the trust anchor for every equivalence check in
the package: it visits every candidate active set, solves the corresponding
equality-constrained KKT system, and keeps the feasible, dual-nonnegative
candidate with the smallest objective.  A projected-gradient iteration on the
dual serves as an independent cross-check.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations

import numpy as np
from scipy.linalg import cho_factor, cho_solve

from .condenser import CondensedQp


class InfeasibleProblem(Exception):
    """Raised when no constraint subset yields a primal-feasible candidate."""


@dataclass
class QpSolution:
    """Primal/dual optimum of the condensed QP at a given initial state."""

    u: np.ndarray
    lam: np.ndarray
    active: tuple[int, ...]
    objective: float


def _objective(qp: CondensedQp, x0: np.ndarray, u: np.ndarray) -> float:
    return float(0.5 * u @ qp.h @ u + x0 @ qp.s.T @ u)


def solve_active_set_enumeration(
    qp: CondensedQp, x0: np.ndarray, tol: float = 1e-9
) -> QpSolution:
    """Solve the condensed QP by enumerating candidate active sets.

    Candidate sets larger than the number of decision variables have
    rank-deficient constraint gradients and a singular KKT matrix, so they are
    skipped; singular KKT systems for smaller sets are skipped as well.  Among
    multiple optimal dual vectors the minimal-Euclidean-norm one is returned,
    computed by a least-norm solve over the constraints active at the optimum.

    Raises
    ------
    ValueError
        If the constraint count exceeds the enumeration guard (m > 24).
    InfeasibleProblem
        If no candidate satisfies all constraints.
    """
    if qp.m > 24:
        raise ValueError(f"enumeration guard: m = {qp.m} exceeds 24")
    x0 = np.asarray(x0, dtype=float)
    n_u = qp.h.shape[0]
    chol = cho_factor(qp.h)
    sx0 = qp.s @ x0
    rhs_con = qp.g_vec + qp.t_mat @ x0

    best: QpSolution | None = None
    for size in range(0, min(qp.m, n_u) + 1):
        for subset in combinations(range(qp.m), size):
            idx = list(subset)
            if size == 0:
                u = -cho_solve(chol, sx0)
                lam_a = np.zeros(0)
            else:
                g_a = qp.g_mat[idx]
                kkt = np.block(
                    [[qp.h, g_a.T], [g_a, np.zeros((size, size))]]
                )
                rhs = np.concatenate([-sx0, rhs_con[idx]])
                try:
                    sol = np.linalg.solve(kkt, rhs)
                except np.linalg.LinAlgError:
                    continue
                u, lam_a = sol[:n_u], sol[n_u:]
            if size and np.min(lam_a) < -tol:
                continue
            slack = rhs_con - qp.g_mat @ u
            if np.min(slack) < -tol:
                continue
            obj = _objective(qp, x0, u)
            if best is None or obj < best.objective - 1e-14:
                lam = np.zeros(qp.m)
                if size:
                    lam[idx] = np.maximum(lam_a, 0.0)
                best = QpSolution(u=u, lam=lam, active=subset, objective=obj)
    if best is None:
        raise InfeasibleProblem("no feasible active set found; problem is infeasible")

    lam_min = _minimal_norm_dual(qp, x0, best, chol, tol)
    if lam_min is not None:
        best = QpSolution(
            u=best.u,
            lam=lam_min,
            active=tuple(np.flatnonzero(lam_min > tol)),
            objective=best.objective,
        )
    return best


def _minimal_norm_dual(qp, x0, sol: QpSolution, chol, tol: float) -> np.ndarray | None:
    """Least-norm nonnegative dual supported on the constraints active at u*.

    Solves min ||lam|| s.t. G_I' lam_I = -(H u* + S x0), lam >= 0 by support
    enumeration: the optimum restricted to its support is the least-norm
    solution of the support-restricted equality system.
    """
    resid = -(qp.h @ sol.u + qp.s @ x0)
    slack = qp.g_vec + qp.t_mat @ x0 - qp.g_mat @ sol.u
    act = np.flatnonzero(slack <= tol * max(1.0, np.max(np.abs(qp.g_vec))))
    if act.size == 0:
        return np.zeros(qp.m) if np.linalg.norm(resid) <= 1e-7 else None
    if act.size > 16:
        return None  # support enumeration too large; keep the enumerated dual
    scale = max(1.0, float(np.linalg.norm(resid)))
    best_lam, best_norm = None, np.inf
    for size in range(0, act.size + 1):
        for support in combinations(act, size):
            if size == 0:
                if np.linalg.norm(resid) <= 1e-7 * scale:
                    cand = np.zeros(qp.m)
                else:
                    continue
            else:
                g_sup = qp.g_mat[list(support)]
                lam_s, *_ = np.linalg.lstsq(g_sup.T, resid, rcond=None)
                if np.linalg.norm(g_sup.T @ lam_s - resid) > 1e-7 * scale:
                    continue
                if np.min(lam_s) < -tol:
                    continue
                cand = np.zeros(qp.m)
                cand[list(support)] = np.maximum(lam_s, 0.0)
            norm = float(np.linalg.norm(cand))
            if norm < best_norm - 1e-12:
                best_norm, best_lam = norm, cand
    return best_lam


def dual_objective(qp: CondensedQp, x0: np.ndarray, lam: np.ndarray) -> float:
    """Dual objective 1/2 lam' G H^-1 G' lam + (G H^-1 S x0 + g + T x0)' lam."""
    chol = cho_factor(qp.h)
    hinv_gt = cho_solve(chol, qp.g_mat.T)
    f_mat = qp.g_mat @ hinv_gt
    q_vec = qp.g_mat @ cho_solve(chol, qp.s @ x0) + qp.g_vec + qp.t_mat @ x0
    return float(0.5 * lam @ f_mat @ lam + q_vec @ lam)


def primal_from_dual(qp: CondensedQp, x0: np.ndarray, lam: np.ndarray) -> np.ndarray:
    """Stationarity recovery  u = -H^-1 (G' lam + S x0)."""
    chol = cho_factor(qp.h)
    return -cho_solve(chol, qp.g_mat.T @ lam + qp.s @ np.asarray(x0, dtype=float))


def solve_projected_gradient(
    qp: CondensedQp,
    x0: np.ndarray,
    iters: int = 10_000,
    step: float | None = None,
    lam0: np.ndarray | None = None,
) -> np.ndarray:
    """Discrete projected-gradient iteration on the dual; returns lam.

    Iterates lam <- relu(lam - step (F lam + q)) with F = G H^-1 G'.  The step
    must not exceed 1/L with L the largest eigenvalue of F, which makes the
    dual objective non-increasing.
    """
    x0 = np.asarray(x0, dtype=float)
    chol = cho_factor(qp.h)
    f_mat = qp.g_mat @ cho_solve(chol, qp.g_mat.T)
    q_vec = qp.g_mat @ cho_solve(chol, qp.s @ x0) + qp.g_vec + qp.t_mat @ x0
    lip = float(np.max(np.linalg.eigvalsh(0.5 * (f_mat + f_mat.T))))
    if step is None:
        step = 1.0 / lip if lip > 0 else 1.0
    elif lip > 0 and step > 1.0 / lip + 1e-12:
        raise ValueError(f"step {step} exceeds 1/L = {1.0 / lip}")
    lam = np.zeros(qp.m) if lam0 is None else np.asarray(lam0, dtype=float).copy()
    for _ in range(iters):
        lam = np.maximum(lam - step * (f_mat @ lam + q_vec), 0.0)
    return lam
