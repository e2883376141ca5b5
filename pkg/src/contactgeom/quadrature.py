"""Composite Simpson quadrature and cumulative prefix integrals.

The prefix table lets the curve generator and the sphere solutions
evaluate s -> integral_{a}^{s} f at arbitrary parameters: the integral up
to the nearest grid node comes from the table and the sub-node remainder
from a local Simpson rule, so no interpolation error enters.
"""

from __future__ import annotations

import numpy as np


def composite_simpson(f, a, b, n=256):
    """Integral of vectorized f over [a, b] with n panels (n rounded up
    to even)."""
    if b == a:
        return 0.0
    n = max(2, int(n) + (int(n) % 2))
    t = np.linspace(a, b, n + 1)
    v = f(t)
    h = (b - a) / n
    return float(h / 3.0 * (v[0] + v[-1] + 4.0 * v[1:-1:2].sum() + 2.0 * v[2:-1:2].sum()))


class PrefixIntegral:
    """Cumulative integral s -> integral_{a}^{s} f(t) dt on [lo, hi].

    f must accept numpy arrays. The dense node table is built once; calls
    combine the table with a short local Simpson rule for the fraction of
    a node step, keeping the evaluation smooth in s.
    """

    def __init__(self, f, a, lo, hi, n_nodes=4096):
        if hi <= lo:
            raise ValueError("empty integration range")
        self.f = f
        self.a = float(a)
        self.lo = float(min(lo, a))
        self.hi = float(max(hi, a))
        n = max(16, int(n_nodes))
        self.nodes = np.linspace(self.lo, self.hi, n + 1)
        self.h = (self.hi - self.lo) / n
        vals = np.broadcast_to(np.asarray(f(self.nodes), dtype=float),
                               self.nodes.shape)
        mids = np.broadcast_to(np.asarray(f(self.nodes[:-1] + self.h / 2.0),
                                          dtype=float), (n,))
        # Simpson over each single step using its midpoint
        steps = self.h / 6.0 * (vals[:-1] + 4.0 * mids + vals[1:])
        cumulative = np.concatenate([[0.0], np.cumsum(steps)])
        # table holds integral from `a`, not from `lo`
        base = self._local(self.a, cumulative=cumulative)
        self.table = cumulative - base

    def _local(self, s, cumulative=None):
        table = self.table if cumulative is None else cumulative
        i = int(np.clip(np.floor((s - self.lo) / self.h), 0, len(self.nodes) - 1))
        x0 = self.nodes[i]
        rem = 0.0
        if s != x0:
            xm = 0.5 * (x0 + s)
            f0, fm, f1 = np.broadcast_to(
                np.asarray(self.f(np.array([x0, xm, s])), dtype=float), (3,))
            rem = (s - x0) / 6.0 * (f0 + 4.0 * fm + f1)
        return table[i] + rem

    def __call__(self, s):
        s = float(s)
        if s < self.lo - 1e-12 or s > self.hi + 1e-12:
            raise ValueError(f"parameter {s} outside integration range "
                             f"[{self.lo}, {self.hi}]")
        s = min(max(s, self.lo), self.hi)
        return float(self._local(s))


def refinement_delta(f, a, b, n=512):
    """Difference between n-panel and 4n-panel Simpson values (order check)."""
    return abs(composite_simpson(f, a, b, n) - composite_simpson(f, a, b, 4 * n))
