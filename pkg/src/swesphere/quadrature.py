"""Gauss-Lobatto-Legendre quadrature and Lagrange differentiation on [-1, 1].

Fields are collocated at GLL nodes, so every differential operator in the
stack reduces to dense (m+1) x (m+1) matrix actions along tensor lines.
Rules are cheap to build and immutable, so they are computed per order and
shared freely between threads.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = ["QuadRule", "gll_rule", "lagrange_eval", "diff_matrix"]


@dataclass(frozen=True)
class QuadRule:
    """GLL rule of polynomial order ``m``: m+1 nodes in [-1, 1], ascending.

    The rule integrates polynomials of degree <= 2m - 1 exactly and always
    contains both interval endpoints.
    """

    order: int
    nodes: np.ndarray
    weights: np.ndarray

    def __post_init__(self) -> None:
        self.nodes.setflags(write=False)
        self.weights.setflags(write=False)


def _legendre_and_deriv(m: int, x: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """P_m(x) and P_m'(x) by the three-term recurrence."""
    p_prev = np.ones_like(x)
    p = x.copy()
    for k in range(1, m):
        p, p_prev = ((2 * k + 1) * x * p - k * p_prev) / (k + 1), p
    # (1 - x^2) P_m' = m (P_{m-1} - x P_m); endpoints handled by caller
    dp = m * (p_prev - x * p) / (1.0 - x * x)
    return p, dp


def gll_rule(m: int) -> QuadRule:
    """Build the Gauss-Lobatto-Legendre rule of polynomial order ``m``.

    Nodes are the roots of (1 - x^2) P_m'(x), located by Newton iteration
    from Chebyshev-Lobatto initial guesses and converged to ~1e-15; weights
    are 2 / (m (m+1) P_m(x)^2).  Nodes and weights are symmetrized afterwards
    so that +/- pairs match bitwise, which keeps the summation-by-parts
    identities at round-off.
    """
    if m < 1:
        raise ValueError(f"polynomial order must be >= 1, got {m}")
    if m == 1:
        nodes = np.array([-1.0, 1.0])
        weights = np.array([1.0, 1.0])
        return QuadRule(1, nodes, weights)

    # Interior nodes: roots of P_m'. Newton on f = P_m', using the Legendre
    # ODE for f' = P_m'' = (2 x P_m' - m (m+1) P_m) / (1 - x^2).
    x = -np.cos(np.pi * np.arange(1, m) / m)
    for _ in range(100):
        p, dp = _legendre_and_deriv(m, x)
        ddp = (2.0 * x * dp - m * (m + 1) * p) / (1.0 - x * x)
        dx = dp / ddp
        x -= dx
        if np.max(np.abs(dx)) < 1e-15:
            break

    nodes = np.concatenate(([-1.0], x, [1.0]))
    nodes = 0.5 * (nodes - nodes[::-1])  # enforce exact +/- symmetry
    p = np.ones_like(nodes)
    q = nodes.copy()
    for k in range(1, m):
        q, p = ((2 * k + 1) * nodes * q - k * p) / (k + 1), q
    weights = 2.0 / (m * (m + 1) * q * q)
    weights = 0.5 * (weights + weights[::-1])
    return QuadRule(m, nodes, weights)


def lagrange_eval(rule: QuadRule, i: int, x) -> float | np.ndarray:
    """Evaluate the i-th Lagrange cardinal polynomial of ``rule`` at ``x``.

    Satisfies l_i(nodes[j]) = delta_ij exactly: at x == nodes[j] the product
    form contains either a zero factor or only unit factors.
    """
    if not 0 <= i <= rule.order:
        raise IndexError(f"cardinal index {i} out of range for order {rule.order}")
    xi = rule.nodes
    x = np.asarray(x, dtype=float)
    out = np.ones_like(x)
    for k in range(rule.order + 1):
        if k != i:
            out = out * (x - xi[k]) / (xi[i] - xi[k])
    return out if out.ndim else float(out)


def diff_matrix(rule: QuadRule) -> np.ndarray:
    """Nodal differentiation matrix D[i, j] = l_j'(nodes[i]).

    Built from barycentric weights; the diagonal uses the negated row sum
    ("negative sum trick") so D annihilates constants to round-off.  Applied
    to nodal samples of a polynomial of degree <= m it returns the exact
    derivative values.
    """
    x = rule.nodes
    n = rule.order + 1
    lam = np.ones(n)
    for j in range(n):
        for k in range(n):
            if k != j:
                lam[j] /= x[j] - x[k]
    d = np.zeros((n, n))
    for i in range(n):
        for j in range(n):
            if i != j:
                d[i, j] = (lam[j] / lam[i]) / (x[i] - x[j])
        d[i, i] = -np.sum(d[i, :])
    return d
