"""Factored low-rank covariance estimates.

An estimate has the form ``scale * D.T @ D`` where the rows of ``D`` are
difference vectors. It is never formed densely inside the samplers; the
matrix-vector product costs O(d * rank).
"""

from __future__ import annotations

import numpy as np


class OpCounter:
    """Tally of floating point operations (multiplies plus adds)."""

    def __init__(self):
        self.flops = 0
        self.calls = 0

    def add(self, flops):
        self.flops += int(flops)
        self.calls += 1


class CovEstimate:
    """Symmetric PSD matrix ``scale * D^T D`` kept in factored form."""

    __slots__ = ("_diffs", "_scale")

    def __init__(self, diffs, scale):
        diffs = np.array(diffs, dtype=float, ndmin=2)
        if diffs.ndim != 2:
            raise ValueError("difference factors must be a (rank, d) array")
        if not scale >= 0:
            raise ValueError("scale must be nonnegative")
        diffs.setflags(write=False)
        self._diffs = diffs
        self._scale = float(scale)

    @classmethod
    def zero(cls, d):
        return cls(np.zeros((0, d)), 0.0)

    @property
    def diffs(self):
        return self._diffs

    @property
    def scale(self):
        return self._scale

    @property
    def dim(self):
        return self._diffs.shape[1]

    @property
    def rank(self):
        return self._diffs.shape[0]

    @property
    def is_zero(self):
        return self.rank == 0 or self._scale == 0.0 or not np.any(self._diffs)

    def matvec(self, v, counter=None):
        """Return ``scale * D^T (D v)`` without forming the matrix."""
        v = np.asarray(v, dtype=float)
        r, d = self._diffs.shape
        if r == 0:
            return np.zeros(d)
        w = self._diffs @ v
        out = self._scale * (self._diffs.T @ w)
        if counter is not None:
            # D v: r dot products of length d; D^T w: d dot products of
            # length r; then d scalings.
            counter.add(r * (2 * d - 1) + d * (2 * r - 1) + d)
        return out

    def dense(self):
        return self._scale * (self._diffs.T @ self._diffs)

    def trace(self):
        return self._scale * float(np.sum(self._diffs**2))

    def __repr__(self):
        return f"CovEstimate(rank={self.rank}, dim={self.dim}, scale={self._scale!r})"
