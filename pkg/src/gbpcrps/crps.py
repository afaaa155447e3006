"""Closed-form CRPS for the generalized Beta-prime family.

Every score is assembled from the decomposition

    CRPS(F | y) = E|X - y| - E[X (2 F(X) - 1)]
                = e_abs - (two_e_xf - mu)

with ``two_e_xf = 2 E[X F(X)]``, which depends on the parameters only.
Internally everything is evaluated at unit scale (q = 1, observation
y / q) and multiplied by q at the end.
"""

from __future__ import annotations

import functools
import math
from dataclasses import dataclass, field, replace

from . import specfun
from .distribution import GbpParams, w_transform
from .errors import DomainError, InfiniteMeanError
from .specfun import SeriesControl

__all__ = [
    "WorkPoint",
    "CrpsBreakdown",
    "crps_gbp",
    "crps_singh_maddala",
    "crps_dagum",
    "crps_log_logistic",
    "crps_auto",
    "two_e_xf",
    "clear_cache",
    "FORMULAS",
]

FORMULAS = ("gbp", "singh-maddala", "dagum", "log-logistic")

# beta * p in (1, 1 + this] is flagged as badly conditioned
CONDITIONING_MARGIN = 1e-9

WARN_CONDITIONING = "near-infinite-mean"
WARN_EXTENDED = "extended"


@dataclass(frozen=True)
class WorkPoint:
    """An observation ``y`` with ``w = y^p / (q^p + y^p)`` and its complement."""

    y: float
    w: float
    w_complement: float

    @classmethod
    def from_observation(cls, y: float, p: float, q: float) -> WorkPoint:
        if not y >= 0:
            raise DomainError(f"observation must be nonnegative, got {y}")
        w, wc = w_transform(y / q, p)
        return cls(y, w, wc)


@dataclass(frozen=True)
class CrpsBreakdown:
    """The pieces of a CRPS evaluation, all in units of the observable.

    Attributes:
        mu: Mean of the predictive distribution.
        e_abs: ``E|X - y|``.
        two_e_xf: ``2 E[X F(X)]``; independent of the observation.
        crps: The score, ``e_abs - (two_e_xf - mu)``.
        formula: Which closed form produced the value.
        warnings: Condition flags raised along the way.
    """

    mu: float
    e_abs: float
    two_e_xf: float
    crps: float
    formula: str
    warnings: tuple[str, ...] = field(default=())

    def scaled(self, q: float) -> CrpsBreakdown:
        return replace(self, mu=q * self.mu, e_abs=q * self.e_abs,
                       two_e_xf=q * self.two_e_xf, crps=q * self.crps)


def _ctrl(ctrl: SeriesControl | None) -> SeriesControl:
    return SeriesControl.from_env() if ctrl is None else ctrl


def _check_y(y: float) -> None:
    if not (y >= 0 and math.isfinite(y)):
        raise DomainError(f"observation must be finite and nonnegative, got {y}")


def _require_finite_mean(beta_: float, p: float) -> tuple[str, ...]:
    bp = beta_ * p
    if not bp > 1.0:
        raise InfiniteMeanError(f"infinite mean: beta * p = {bp} <= 1")
    return (WARN_CONDITIONING,) if bp <= 1.0 + CONDITIONING_MARGIN else ()


def _assemble(mu: float, two_exf: float, crps: float, formula: str,
              warnings: tuple[str, ...]) -> CrpsBreakdown:
    e_abs = crps + two_exf - mu
    return CrpsBreakdown(mu, e_abs, two_exf, crps, formula, warnings)


# ---------------------------------------------------------------------------
# General case
# ---------------------------------------------------------------------------

@functools.lru_cache(maxsize=4096)
def _two_e_xf_unit(alpha: float, beta_: float, p: float, ctrl: SeriesControl) -> float:
    ip = 1.0 / p
    coef = math.exp(specfun.log_beta(2 * alpha + ip, 2 * beta_ - ip)
                    - 2.0 * specfun.log_beta(alpha, beta_))
    f32 = specfun.hyp3f2_unit(alpha + beta_, 1.0, 2 * alpha + ip,
                              alpha + 1.0, 2 * alpha + 2 * beta_, ctrl)
    return 2.0 / alpha * coef * f32


def two_e_xf(params: GbpParams, ctrl: SeriesControl | None = None) -> float:
    """``2 E[X F(X)]`` for the general distribution (memoized per shape)."""
    _require_finite_mean(params.beta, params.p)
    return params.q * _two_e_xf_unit(params.alpha, params.beta, params.p, _ctrl(ctrl))


def clear_cache() -> None:
    """Drop memoized ``2 E[X F(X)]`` values."""
    _two_e_xf_unit.cache_clear()


def _mean_unit(alpha: float, beta_: float, p: float) -> float:
    ip = 1.0 / p
    return math.exp(specfun.log_beta(alpha + ip, beta_ - ip)
                    - specfun.log_beta(alpha, beta_))


def _gbp_partial_integral(alpha, beta_, p, w, wc, ctrl) -> float:
    """``B(alpha, beta) * int_0^r F - r B(w; alpha, beta)`` at unit scale.

    Written as ``-w^(a+1/p) (1-w)^(b-1/p) / (a+1/p) 2F1(a+b, 1; a+1/p+1; w)``.
    This equals ``r/(a+b-1) w^(a-1) (1-w)^b (1 - 2F1(1, a+b-1; a+1/p; w))``
    but has neither the 0/0 at a + b = 1 nor the cancellation in
    ``1 - 2F1`` for small w.
    """
    ip = 1.0 / p
    f = specfun._hyp2f1(alpha + beta_, 1.0, alpha + ip + 1.0, w, wc, ctrl)
    return -(w ** (alpha + ip)) * wc ** (beta_ - ip) / (alpha + ip) * f


def crps_gbp(params: GbpParams, y: float,
             ctrl: SeriesControl | None = None) -> CrpsBreakdown:
    """CRPS of the generalized Beta-prime distribution at observation ``y >= 0``.

    ``2 mu - y + 2/B(a,b) [y B(w; a,b) + y/(a+b-1) w^(a-1) (1-w)^b
    (1 - 2F1(1, a+b-1; a+1/p; w))] - 2q/(a B(a,b)^2) B(2a+1/p, 2b-1/p)
    3F2(a+b, 1, 2a+1/p; a+1, 2a+2b; 1)``
    """
    ctrl = _ctrl(ctrl)
    warnings = _require_finite_mean(params.beta, params.p)
    _check_y(y)
    a, b, p, q = params.alpha, params.beta, params.p, params.q
    mu = _mean_unit(a, b, p)
    txf = _two_e_xf_unit(a, b, p, ctrl)
    r = y / q
    w, wc = w_transform(r, p)
    if r == 0.0:
        e_abs = mu
    elif wc == 0.0:
        e_abs = r - mu
    else:
        inc = specfun._reg_inc_beta(w, wc, a, b)
        part = _gbp_partial_integral(a, b, p, w, wc, ctrl)
        e_abs = mu - r + 2.0 * r * inc + 2.0 / specfun.beta(a, b) * part
    crps = e_abs - (txf - mu)
    return CrpsBreakdown(mu, e_abs, txf, crps, "gbp", warnings).scaled(q)


# ---------------------------------------------------------------------------
# Special cases
# ---------------------------------------------------------------------------

def crps_singh_maddala(beta_: float, p: float, q: float, y: float,
                       ctrl: SeriesControl | None = None) -> CrpsBreakdown:
    """CRPS of the Singh-Maddala (Burr XII) distribution, alpha = 1.

    ``q Gamma(2b - 1/p) Gamma(1 + 1/p) / Gamma(2b)
    + y (1 - 2 (1-w)^b 2F1(1, b; 1 + 1/p; w))``
    """
    ctrl = _ctrl(ctrl)
    GbpParams(1.0, beta_, p, q)
    warnings = _require_finite_mean(beta_, p)
    _check_y(y)
    ip = 1.0 / p
    const = math.exp(math.lgamma(2 * beta_ - ip) + math.lgamma(1.0 + ip)
                     - math.lgamma(2 * beta_))
    mu = beta_ * math.exp(specfun.log_beta(1.0 + ip, beta_ - ip))
    r = y / q
    w, wc = w_transform(r, p)
    if r == 0.0:
        crps = const
    elif wc == 0.0:
        # F(y) rounds to 1: E|X - y| = y - mu
        crps = r + const - 2 * mu
    else:
        f = specfun._hyp2f1(1.0, beta_, 1.0 + ip, w, wc, ctrl)
        crps = const + r * (1.0 - 2.0 * wc ** beta_ * f)
    return _assemble(mu, 2 * mu - const, crps, "singh-maddala", warnings).scaled(q)


def crps_dagum(alpha: float, p: float, q: float, y: float,
               ctrl: SeriesControl | None = None) -> CrpsBreakdown:
    """CRPS of the Dagum (Burr III) distribution, beta = 1.

    ``2 mu - q Gamma(1 - 1/p) Gamma(2a + 1/p) / Gamma(2a) - y
    + 2 y w^(a-1) (1 - (1-w) 2F1(1, a; a + 1/p; w))``
    """
    ctrl = _ctrl(ctrl)
    GbpParams(alpha, 1.0, p, q)
    warnings = _require_finite_mean(1.0, p)
    _check_y(y)
    ip = 1.0 / p
    const = math.exp(math.lgamma(1.0 - ip) + math.lgamma(2 * alpha + ip)
                     - math.lgamma(2 * alpha))
    mu = alpha * math.exp(specfun.log_beta(alpha + ip, 1.0 - ip))
    r = y / q
    w, wc = w_transform(r, p)
    # here the Gamma-ratio constant is 2 E[X F(X)] itself
    if r == 0.0:
        crps = 2 * mu - const
    elif wc == 0.0:
        # F(y) rounds to 1: E|X - y| = y - mu
        crps = r - const
    else:
        # 1 - (1-w) 2F1(1, a; a+1/p; w) = w / (p a + 1) 2F1(1, a; a+1/p+1; w)
        f = specfun._hyp2f1(1.0, alpha, alpha + ip + 1.0, w, wc, ctrl)
        crps = 2 * mu - const - r + 2.0 * r * w ** alpha / (p * alpha + 1.0) * f
    return _assemble(mu, const, crps, "dagum", warnings).scaled(q)


def crps_log_logistic(p: float, q: float, y: float,
                      ctrl: SeriesControl | None = None) -> CrpsBreakdown:
    """CRPS of the log-logistic distribution, alpha = beta = 1.

    ``((p - 1) / p^2) q pi / sin(pi/p)
    + y (1 - 2 q^p / (q^p + y^p) 2F1(1, 1; 1 + 1/p; w))``
    """
    ctrl = _ctrl(ctrl)
    GbpParams(1.0, 1.0, p, q)
    warnings = _require_finite_mean(1.0, p)
    _check_y(y)
    ip = 1.0 / p
    mu = math.pi * ip / math.sin(math.pi * ip)
    const = (p - 1.0) / p * mu
    r = y / q
    w, wc = w_transform(r, p)
    if r == 0.0:
        crps = const
    elif wc == 0.0:
        # F(y) rounds to 1: E|X - y| = y - mu
        crps = r + const - 2 * mu
    else:
        f = specfun._hyp2f1(1.0, 1.0, 1.0 + ip, w, wc, ctrl)
        crps = const + r * (1.0 - 2.0 * wc * f)
    return _assemble(mu, 2 * mu - const, crps, "log-logistic", warnings).scaled(q)


def crps_auto(params: GbpParams, y: float,
              ctrl: SeriesControl | None = None) -> CrpsBreakdown:
    """Score ``y`` with the most specific closed form for ``params``.

    ``alpha == 1`` and/or ``beta == 1`` (exact comparisons) select the
    special cases.  Observations below zero lie outside the support and
    score ``CRPS(F | 0) + |y|``, flagged ``"extended"``.
    """
    if not math.isfinite(y):
        raise DomainError(f"observation must be finite, got {y}")
    if y < 0:
        base = crps_auto(params, 0.0, ctrl)
        return replace(base, e_abs=base.e_abs - y, crps=base.crps - y,
                       warnings=base.warnings + (WARN_EXTENDED,))
    a, b, p, q = params.alpha, params.beta, params.p, params.q
    if a == 1 and b == 1:
        return crps_log_logistic(p, q, y, ctrl)
    if a == 1:
        return crps_singh_maddala(b, p, q, y, ctrl)
    if b == 1:
        return crps_dagum(a, p, q, y, ctrl)
    return crps_gbp(params, y, ctrl)
