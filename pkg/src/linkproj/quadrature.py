"""Tensor-product quadrature on the unit box and improper 1-D integrals.

Periodic directions use the equal-weight trapezoidal rule on ``k/n``, which is
spectrally accurate for smooth periodic integrands; other directions use
Gauss-Legendre, whose open nodes never touch the chart boundary.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Callable, Sequence

import numpy as np
from scipy.special import roots_legendre

from .errors import InputError, NonFiniteSample, ToleranceNotReached

MIN_NODES = 8
MAX_NODES = 4096


@dataclass(frozen=True)
class QuadratureResult:
    value: float
    error_estimate: float
    nodes_per_dim: tuple[int, ...]
    refinements: int
    evaluations: int = 0
    history: tuple[tuple[int, float], ...] = ()

    def __post_init__(self):
        if not self.error_estimate >= 0:
            raise ValueError("error_estimate must be non-negative")


@lru_cache(maxsize=64)
def _gauss_legendre_01(n: int):
    x, w = roots_legendre(n)
    nodes = 0.5 * (x + 1.0)
    weights = 0.5 * w
    nodes.setflags(write=False)
    weights.setflags(write=False)
    return nodes, weights


def rule_1d(n: int, periodic: bool):
    """Nodes and weights on ``[0, 1]``."""
    if periodic:
        return np.arange(n) / n, np.full(n, 1.0 / n)
    return _gauss_legendre_01(n)


def tensor_rule(periodic: Sequence[bool], nodes: Sequence[int]):
    """Flattened tensor-product rule: ``(U, W)`` with ``U`` of shape ``(N, k)``."""
    if len(periodic) != len(nodes):
        raise InputError("one node count per dimension")
    if not periodic:
        return np.zeros((1, 0)), np.ones(1)
    rules = [rule_1d(n, p) for n, p in zip(nodes, periodic)]
    grids = np.meshgrid(*[r[0] for r in rules], indexing="ij")
    wgrids = np.meshgrid(*[r[1] for r in rules], indexing="ij")
    U = np.stack([g.reshape(-1) for g in grids], axis=1)
    W = np.prod(np.stack([g.reshape(-1) for g in wgrids], axis=0), axis=0)
    return U, W


def _check_nodes(nodes):
    for n in nodes:
        if n < MIN_NODES:
            raise InputError(f"need at least {MIN_NODES} nodes per dimension, got {n}")


def integrate_box(f: Callable, periodic: Sequence[bool], nodes: Sequence[int]) -> float:
    """Tensor-product rule for ``f`` over ``[0, 1]^k``.

    ``f`` receives ``k`` coordinate arrays (``ij`` mesh) and returns values of
    the same shape or a broadcastable scalar.
    """
    nodes = [int(n) for n in nodes]
    _check_nodes(nodes)
    if len(periodic) != len(nodes):
        raise InputError("one node count per dimension")
    rules = [rule_1d(n, p) for n, p in zip(nodes, periodic)]
    grids = np.meshgrid(*[r[0] for r in rules], indexing="ij")
    values = np.broadcast_to(np.asarray(f(*grids), dtype=float), grids[0].shape)
    bad = ~np.isfinite(values)
    if bad.any():
        idx = tuple(int(i[0]) for i in np.nonzero(bad))
        node = tuple(float(g[idx]) for g in grids)
        raise NonFiniteSample(node, float(values[idx]))
    w = rules[0][1]
    for r in rules[1:]:
        w = np.multiply.outer(w, r[1])
    return float(np.sum(w * values))


def refine(
    evaluate: Callable[[list[int]], float],
    ndim: int,
    tol: float,
    start_nodes: int = 16,
    max_nodes: int = MAX_NODES,
) -> QuadratureResult:
    """Double the node count in every dimension until two values agree to ``tol``.

    ``evaluate`` maps a per-dimension node list to a value. With ``ndim == 0``
    a single evaluation is exact.
    """
    if not tol > 0:
        raise InputError("tol must be positive")
    if start_nodes < MIN_NODES:
        raise InputError(f"start_nodes must be >= {MIN_NODES}")
    if max_nodes > MAX_NODES:
        raise InputError(f"max_nodes must be <= {MAX_NODES}")
    if ndim == 0:
        v = float(evaluate([]))
        return QuadratureResult(v, 0.0, (), 0, 1, ((1, v),))
    n = start_nodes
    value = float(evaluate([n] * ndim))
    evals = n**ndim
    history = [(n, value)]
    delta = math.inf
    while True:
        if 2 * n > max_nodes:
            q = QuadratureResult(value, delta, (n,) * ndim, len(history) - 1, evals, tuple(history))
            raise ToleranceNotReached(value, delta, q)
        n *= 2
        new = float(evaluate([n] * ndim))
        evals += n**ndim
        delta = abs(new - value)
        value = new
        history.append((n, value))
        if delta < tol:
            return QuadratureResult(value, delta, (n,) * ndim, len(history) - 1, evals, tuple(history))


def refine_until(
    f: Callable,
    periodic: Sequence[bool],
    tol: float,
    start_nodes: int = 16,
    max_nodes: int = MAX_NODES,
) -> QuadratureResult:
    return refine(lambda nodes: integrate_box(f, periodic, nodes), len(periodic), tol, start_nodes, max_nodes)


def integral_even_decay(
    g: Callable[[np.ndarray], np.ndarray],
    decay_exponent: float,
    scale: float = 1.0,
    rtol: float = 1e-14,
    max_nodes: int = 2048,
) -> float:
    """Integral of ``g`` over the real line for ``g(z) ~ |z|^-q`` with ``q >= 2``.

    Substitutes ``z = scale * tan(theta)`` and integrates over
    ``(-pi/2, pi/2)`` with Gauss-Legendre, doubling nodes until two values
    agree to ``rtol`` (relative).
    """
    if decay_exponent < 2:
        raise InputError(f"decay exponent must be >= 2, got {decay_exponent}")
    if not scale > 0:
        raise InputError("scale must be positive")

    def at(n):
        x, w = _gauss_legendre_01(n)
        theta = math.pi * (x - 0.5)
        c = np.cos(theta)
        vals = np.asarray(g(scale * np.tan(theta)), dtype=float) * (scale / (c * c))
        bad = ~np.isfinite(vals)
        if bad.any():
            i = int(np.flatnonzero(bad)[0])
            raise NonFiniteSample((float(theta[i]),), float(vals[i]))
        return math.pi * float(np.dot(w, vals))

    n = 32
    prev = cur = at(n)
    while n < max_nodes:
        n *= 2
        cur = at(n)
        if abs(cur - prev) <= rtol * max(1.0, abs(cur)):
            return cur
        prev = cur
    raise ToleranceNotReached(prev, abs(cur - prev))
