"""The generalized Beta-prime (GB2) distribution.

Density

    f(x) = p / (q B(alpha, beta)) * (x/q)^(alpha p - 1) / (1 + (x/q)^p)^(alpha + beta)

on x >= 0.  The CDF is the regularized incomplete beta ``I_w(alpha, beta)``
evaluated at ``w = (x/q)^p / (1 + (x/q)^p)``.
"""

from __future__ import annotations

import math
from collections.abc import Iterator
from dataclasses import dataclass

import numpy as np

from . import specfun
from .errors import DomainError, InfiniteMeanError

__all__ = [
    "GbpParams",
    "w_transform",
    "pdf",
    "cdf",
    "mean",
    "quantile",
    "sample",
    "sample_chunk",
    "iter_chunks",
    "DEFAULT_CHUNK",
]

DEFAULT_CHUNK = 2 ** 20
_SEED_MASK = (1 << 64) - 1


@dataclass(frozen=True)
class GbpParams:
    """Shape parameters ``alpha``, ``beta``, power ``p`` and scale ``q``.

    All four must be positive and finite.  The mean exists iff
    ``beta * p > 1``.
    """

    alpha: float
    beta: float
    p: float
    q: float

    def __post_init__(self):
        for name in ("alpha", "beta", "p", "q"):
            val = getattr(self, name)
            if isinstance(val, bool) or not isinstance(val, (int, float)):
                raise DomainError(f"{name} must be a real number, got {val!r}")
            if not (math.isfinite(val) and val > 0):
                raise DomainError(f"{name} must be positive and finite, got {val}")

    def mean_finite(self) -> bool:
        return self.beta * self.p > 1.0

    def with_scale(self, q: float) -> GbpParams:
        return GbpParams(self.alpha, self.beta, self.p, q)


def w_transform(r: float, p: float) -> tuple[float, float]:
    """Map a scaled observation ``r = y/q`` to ``(w, 1 - w)``.

    ``w = r^p / (1 + r^p)``.  Both members are formed without
    subtraction so the complement stays accurate as w approaches 1.
    """
    if r == 0.0:
        return 0.0, 1.0
    if r <= 1.0:
        t = r ** p
        return t / (1.0 + t), 1.0 / (1.0 + t)
    u = r ** -p
    return 1.0 / (1.0 + u), u / (1.0 + u)


def _check_x(x: float) -> None:
    if not x >= 0:
        raise DomainError(f"x must be nonnegative, got {x}")


def pdf(params: GbpParams, x: float) -> float:
    """Density at ``x``; ``inf`` at the origin when ``alpha * p < 1``."""
    _check_x(x)
    a, b, p, q = params.alpha, params.beta, params.p, params.q
    ap = a * p
    if x == 0.0:
        if ap > 1.0:
            return 0.0
        if ap == 1.0:
            return p / (q * specfun.beta(a, b))
        return math.inf
    if math.isinf(x):
        return 0.0
    r = x / q
    lr = math.log(r)
    # log(1 + r^p) without overflowing r^p
    log1p_rp = math.log1p(math.exp(p * lr)) if lr <= 0 else p * lr + math.log1p(math.exp(-p * lr))
    log_f = (math.log(p) - math.log(q) - specfun.log_beta(a, b)
             + (ap - 1.0) * lr - (a + b) * log1p_rp)
    return math.exp(log_f)


def cdf(params: GbpParams, x: float) -> float:
    """``P(X <= x)``."""
    _check_x(x)
    if math.isinf(x):
        return 1.0
    w, wc = w_transform(x / params.q, params.p)
    return specfun._reg_inc_beta(w, wc, params.alpha, params.beta)


def mean(params: GbpParams) -> float:
    """``q B(alpha + 1/p, beta - 1/p) / B(alpha, beta)``."""
    if not params.mean_finite():
        raise InfiniteMeanError(
            f"infinite mean: beta * p = {params.beta * params.p} <= 1"
        )
    a, b, ip = params.alpha, params.beta, 1.0 / params.p
    return params.q * math.exp(
        specfun.log_beta(a + ip, b - ip) - specfun.log_beta(a, b))


def quantile(params: GbpParams, u: float) -> float:
    """Inverse CDF: ``q (v / (1 - v))^(1/p)`` with ``I_v(alpha, beta) = u``."""
    if not (0.0 < u < 1.0):
        raise DomainError(f"u must lie in (0, 1), got {u}")
    v, vc = specfun.inv_reg_inc_beta(u, params.alpha, params.beta)
    return params.q * (v / vc) ** (1.0 / params.p)


def _chunk_rng(seed: int, index: int) -> np.random.Generator:
    ss = np.random.SeedSequence(entropy=seed & _SEED_MASK, spawn_key=(index,))
    return np.random.Generator(np.random.PCG64(ss))


def sample_chunk(params: GbpParams, seed: int, index: int, size: int) -> np.ndarray:
    """Draws for chunk ``index`` of the stream identified by ``seed``.

    A Beta(alpha, beta) variate is ``G1 / (G1 + G2)`` for independent
    Gamma(alpha) and Gamma(beta) draws, so ``X / (1 - X) = G1 / G2`` and
    the GB2 variate is ``q (G1 / G2)^(1/p)``.
    """
    rng = _chunk_rng(seed, index)
    g1 = rng.standard_gamma(params.alpha, size)
    g2 = rng.standard_gamma(params.beta, size)
    return params.q * (g1 / g2) ** (1.0 / params.p)


def iter_chunks(n: int, chunk: int = DEFAULT_CHUNK) -> Iterator[tuple[int, int]]:
    """Yield ``(index, size)`` pairs that tile ``n`` draws."""
    if n < 1:
        raise DomainError(f"n must be >= 1, got {n}")
    if chunk < 1:
        raise DomainError(f"chunk must be >= 1, got {chunk}")
    full, rest = divmod(n, chunk)
    for i in range(full):
        yield i, chunk
    if rest:
        yield full, rest


def sample(params: GbpParams, seed: int, n: int, chunk: int = DEFAULT_CHUNK) -> np.ndarray:
    """``n`` GB2 draws, deterministic in ``(seed, n, chunk)``."""
    return np.concatenate([sample_chunk(params, seed, i, size)
                           for i, size in iter_chunks(n, chunk)])
