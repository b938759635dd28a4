"""Statistical distances between contour-probability vectors.

Both divergences use natural logarithms, so the Jensen-Shannon divergence is
bounded by ln 2. The constant-factor choice of log base is absorbed by the
fusion weights downstream.
"""
from __future__ import annotations

import numpy as np

from .errors import DimensionMismatchError

LN2 = float(np.log(2.0))

_EPS = 1e-12


def _as_prob(v) -> np.ndarray:
    return np.asarray(v, dtype=np.float64)


def _check_dims(p: np.ndarray, q: np.ndarray) -> None:
    if p.shape != q.shape:
        raise DimensionMismatchError(f"vector shapes differ: {p.shape} vs {q.shape}")


def _kld_raw(p: np.ndarray, q: np.ndarray) -> float:
    """KL divergence with the 0*ln(0/q) := 0 convention and no flooring of q.

    Caller guarantees q > 0 wherever p > 0.
    """
    mask = p > 0.0
    return float(np.sum(p[mask] * np.log(p[mask] / q[mask])))


def kld(p, q) -> float:
    """Kullback-Leibler divergence sum_i p_i * ln(p_i / q_i), in nats.

    q is floored at 1e-12 and renormalized before use so that zeros in q
    cannot produce infinities; p keeps the 0*ln(0) := 0 convention.
    """
    p, q = _as_prob(p), _as_prob(q)
    _check_dims(p, q)
    q = np.maximum(q, _EPS)
    q = q / q.sum()
    return _kld_raw(p, q)


def jsd(p, q) -> float:
    """Jensen-Shannon divergence in nats: 0.5*KL(p||A) + 0.5*KL(q||A).

    A is the component-wise midpoint of p and q, whose support covers both
    inputs, so no flooring is needed. Symmetric bit-for-bit and bounded by
    ln 2.
    """
    p, q = _as_prob(p), _as_prob(q)
    _check_dims(p, q)
    mid = 0.5 * (p + q)
    return 0.5 * _kld_raw(p, mid) + 0.5 * _kld_raw(q, mid)
