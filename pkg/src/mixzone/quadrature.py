"""Quadrature rules for the curve integrals.

The interface operators integrate kernels K(z_a(alpha) - z_b(alpha - u)) du
whose complex pole sits at an offset distance proportional to t*c(alpha) from
the real axis.  That distance ranges over many orders of magnitude along the
mixing zone, so a fixed uniform grid cannot resolve it.  A symmetric composite
Gauss-Legendre rule on geometrically graded panels (widths growing from
~1e-22*ell up to ell/16) integrates every such kernel with near-machine
accuracy at a cost independent of how small t*c gets.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np


@lru_cache(maxsize=32)
def _gl_nodes(q: int):
    x, w = np.polynomial.legendre.leggauss(q)
    return x, w


@dataclass(frozen=True)
class OffsetRule:
    """Symmetric quadrature rule in the offset u over (-ell/2, ell/2)."""

    nodes: np.ndarray
    weights: np.ndarray
    ell: float

    @property
    def size(self) -> int:
        return self.nodes.size


def _panel_edges(half: float, inner: float, growth: float, max_width: float):
    edges = [0.0, inner]
    a = inner
    while a < half:
        step = min(a * (growth - 1.0), max_width)
        a = min(a + step, half)
        edges.append(a)
    return np.asarray(edges)


@lru_cache(maxsize=16)
def graded_offset_rule(ell: float, n: int = 0, q: int = 16, inner_rel: float = 1e-22,
                       growth: float = 2.0, max_frac: float = 1 / 16) -> OffsetRule:
    """Build the graded rule for domain length ``ell`` (cached).

    ``n`` is the grid size whose Nyquist oscillations the rule must resolve;
    panel widths are capped so that GL-q integrates the top grid mode to
    machine precision (k_max * width <= 14).
    """
    half = ell / 2.0
    max_width = max_frac * ell
    if n:
        max_width = min(max_width, 14.0 * ell / (np.pi * n))
    edges = _panel_edges(half, inner_rel * ell, growth, max_width)
    x, w = _gl_nodes(q)
    mid = 0.5 * (edges[1:] + edges[:-1])
    rad = 0.5 * (edges[1:] - edges[:-1])
    nodes_pos = (mid[:, None] + rad[:, None] * x[None, :]).ravel()
    weights_pos = (rad[:, None] * w[None, :]).ravel()
    nodes = np.concatenate([-nodes_pos[::-1], nodes_pos])
    weights = np.concatenate([weights_pos[::-1], weights_pos])
    return OffsetRule(nodes=nodes, weights=weights, ell=ell)


def apply_rule(rule: OffsetRule, integrand_table: np.ndarray) -> np.ndarray:
    """Sum w_m * F[m, j] over the rule nodes; returns a length-n array."""
    return np.tensordot(rule.weights, integrand_table, axes=(0, 0))


def panels_toward_endpoints(a: float, b: float, scale: float,
                            inner_rel: float = 1e-9, growth: float = 2.0,
                            q: int = 12):
    """Composite GL nodes/weights on (a, b), geometrically refined at both ends.

    Used for integrands that are smooth inside but only C^inf-flat (not
    analytic) at the endpoints, e.g. the compactly supported bump.
    ``scale`` sets the absolute floor of the end panels.
    """
    if b <= a:
        return np.empty(0), np.empty(0)
    x, w = _gl_nodes(q)
    width = b - a
    inner = max(inner_rel * scale, 1e-300)
    cuts = [0.0]
    d = inner
    while d < width / 2:
        cuts.append(d)
        d *= growth
    left = a + np.asarray(cuts)
    right = b - np.asarray(cuts)[::-1]
    edges = np.concatenate([left, right[right > left[-1] + 0.0]])
    edges = np.unique(np.clip(edges, a, b))
    mid = 0.5 * (edges[1:] + edges[:-1])
    rad = 0.5 * (edges[1:] - edges[:-1])
    nodes = (mid[:, None] + rad[:, None] * x[None, :]).ravel()
    weights = (rad[:, None] * w[None, :]).ravel()
    return nodes, weights
