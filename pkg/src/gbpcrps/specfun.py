"""Real-argument special functions used by the CRPS formulas.

Covers log-gamma, the beta function, the incomplete beta function,
the Gauss hypergeometric function 2F1 on [0, 1] and the generalized
hypergeometric function 3F2 at unit argument.  Everything works in
double precision on scalar floats.
"""

from __future__ import annotations

import math
import os
from dataclasses import dataclass, replace

from scipy import integrate

from .errors import DegenerateConnectionError, DomainError, NonConvergenceError

__all__ = [
    "SeriesControl",
    "log_gamma",
    "gamma_ratio",
    "beta",
    "log_beta",
    "inc_beta_lower",
    "reg_inc_beta",
    "hyp2f1",
    "hyp3f2_unit",
    "hyp3f2_unit_euler",
    "inv_reg_inc_beta",
]

_EPS = 2.220446049250313e-16

# z at or above this goes through the z -> 1-z connection formula
Z_SWITCH = 0.75
# |c-a-b - round(c-a-b)| below this counts as the logarithmic case
INTEGER_GUARD = 1e-3

ENV_RTOL = "CRPS_SERIES_RTOL"


@dataclass(frozen=True)
class SeriesControl:
    """Truncation policy for the hypergeometric series.

    Attributes:
        rel_tol: Relative tolerance used by the stopping rules.
        max_terms: Hard cap on the number of series terms.
        accel_threshold: Convergence exponent of a unit-argument series
            below which the partial sums are extrapolated instead of
            summed directly.
    """

    rel_tol: float = 1e-12
    max_terms: int = 100_000
    accel_threshold: float = 2.0

    def __post_init__(self):
        if not self.rel_tol > 0:
            raise DomainError(f"rel_tol must be positive, got {self.rel_tol}")
        if self.max_terms < 1:
            raise DomainError(f"max_terms must be >= 1, got {self.max_terms}")

    @classmethod
    def from_env(cls) -> SeriesControl:
        """Default control, with ``rel_tol`` taken from ``CRPS_SERIES_RTOL`` if set."""
        raw = os.environ.get(ENV_RTOL)
        if raw is None or not raw.strip():
            return cls()
        try:
            return cls(rel_tol=float(raw))
        except ValueError as exc:
            raise DomainError(f"{ENV_RTOL}={raw!r} is not a positive number") from exc


def _control(ctrl: SeriesControl | None) -> SeriesControl:
    return SeriesControl.from_env() if ctrl is None else ctrl


def _is_nonpos_int(x: float) -> bool:
    return x <= 0 and x == math.floor(x)


def _check_positive(name: str, x: float) -> None:
    if not (math.isfinite(x) and x > 0):
        raise DomainError(f"{name} must be positive and finite, got {x}")


# ---------------------------------------------------------------------------
# Gamma and beta
# ---------------------------------------------------------------------------

def log_gamma(x: float) -> float:
    """Natural log of the gamma function for positive ``x``."""
    _check_positive("x", x)
    return math.lgamma(x)


def _signed_lgamma(x: float) -> tuple[float, float]:
    """Return ``(log|Gamma(x)|, sign)`` for any real x that is not a pole."""
    if _is_nonpos_int(x):
        raise DomainError(f"Gamma has a pole at {x}")
    if x > 0:
        return math.lgamma(x), 1.0
    sign = -1.0 if math.floor(x) % 2 else 1.0
    return math.lgamma(x), sign


def gamma_ratio(num: tuple[float, ...], den: tuple[float, ...]) -> float:
    """Compute ``prod Gamma(num) / prod Gamma(den)`` in log space.

    Poles in the denominator make the ratio zero; poles in the numerator
    are an error.
    """
    log_val = 0.0
    sign = 1.0
    for x in den:
        if _is_nonpos_int(x):
            return 0.0
        lg, s = _signed_lgamma(x)
        log_val -= lg
        sign *= s
    for x in num:
        lg, s = _signed_lgamma(x)
        log_val += lg
        sign *= s
    return sign * math.exp(log_val)


def log_beta(a: float, b: float) -> float:
    """``log B(a, b)``."""
    _check_positive("a", a)
    _check_positive("b", b)
    return math.lgamma(a) + math.lgamma(b) - math.lgamma(a + b)


def beta(a: float, b: float) -> float:
    """Complete beta function ``B(a, b) = Gamma(a) Gamma(b) / Gamma(a + b)``."""
    return math.exp(log_beta(a, b))


# ---------------------------------------------------------------------------
# Incomplete beta
# ---------------------------------------------------------------------------

def _beta_cf(a: float, b: float, x: float) -> float:
    # modified Lentz evaluation of the standard continued fraction
    tiny = 1e-300
    qab = a + b
    qap = a + 1.0
    qam = a - 1.0
    c = 1.0
    d = 1.0 - qab * x / qap
    if abs(d) < tiny:
        d = tiny
    d = 1.0 / d
    h = d
    max_iter = 10_000 + int(20 * math.sqrt(max(a, b)))
    for m in range(1, max_iter + 1):
        m2 = 2 * m
        aa = m * (b - m) * x / ((qam + m2) * (a + m2))
        d = 1.0 + aa * d
        if abs(d) < tiny:
            d = tiny
        c = 1.0 + aa / c
        if abs(c) < tiny:
            c = tiny
        d = 1.0 / d
        h *= d * c
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2))
        d = 1.0 + aa * d
        if abs(d) < tiny:
            d = tiny
        c = 1.0 + aa / c
        if abs(c) < tiny:
            c = tiny
        d = 1.0 / d
        delta = d * c
        h *= delta
        if abs(delta - 1.0) < 4 * _EPS:
            return h
    raise NonConvergenceError(
        f"incomplete beta continued fraction did not converge for a={a}, b={b}, x={x}"
    )


def _inc_beta_scaled(x: float, xc: float, a: float, b: float) -> tuple[float, bool]:
    """Core of the incomplete beta evaluation.

    Returns ``(v, flipped)``.  When ``flipped`` is false, ``v`` is
    I_x(a, b); otherwise it is I_{1-x}(b, a) = 1 - I_x(a, b).  Keeping the
    tail separate lets callers avoid the subtraction when they need it.
    ``xc`` must be ``1 - x`` computed as accurately as the caller can.
    """
    if x == 0.0:
        return 0.0, False
    if xc == 0.0:
        return 0.0, True
    lbeta = math.lgamma(a) + math.lgamma(b) - math.lgamma(a + b)
    if x < (a + 1.0) / (a + b + 2.0):
        front = math.exp(a * math.log(x) + b * math.log(xc) - lbeta)
        return front * _beta_cf(a, b, x) / a, False
    front = math.exp(b * math.log(xc) + a * math.log(x) - lbeta)
    return front * _beta_cf(b, a, xc) / b, True


def _check_unit(name: str, w: float) -> None:
    if not (0.0 <= w <= 1.0):
        raise DomainError(f"{name} must lie in [0, 1], got {w}")


def reg_inc_beta(w: float, a: float, b: float) -> float:
    """Regularized incomplete beta function ``I_w(a, b)``."""
    _check_unit("w", w)
    _check_positive("a", a)
    _check_positive("b", b)
    return _reg_inc_beta(w, 1.0 - w, a, b)


def _reg_inc_beta(w: float, wc: float, a: float, b: float) -> float:
    v, flipped = _inc_beta_scaled(w, wc, a, b)
    return 1.0 - v if flipped else v


def _reg_inc_beta_upper(w: float, wc: float, a: float, b: float) -> float:
    """``1 - I_w(a, b)`` without cancellation in the upper tail."""
    v, flipped = _inc_beta_scaled(w, wc, a, b)
    return v if flipped else 1.0 - v


def inc_beta_lower(w: float, a: float, b: float) -> float:
    """Unregularized incomplete beta ``B(w; a, b) = int_0^w t^(a-1) (1-t)^(b-1) dt``."""
    return reg_inc_beta(w, a, b) * beta(a, b)


# ---------------------------------------------------------------------------
# Gauss hypergeometric 2F1
# ---------------------------------------------------------------------------

def _series_2f1(a: float, b: float, c: float, z: float, ctrl: SeriesControl) -> float:
    if z == 0.0:
        return 1.0
    total = 1.0
    term = 1.0
    for n in range(ctrl.max_terms):
        term *= (a + n) * (b + n) / ((c + n) * (n + 1)) * z
        total += term
        if term == 0.0:
            return total
        # the term ratio tends to z, so bound the tail with the larger of the two
        ratio = max(abs((a + n + 1) * (b + n + 1) / ((c + n + 1) * (n + 2)) * z), abs(z))
        if ratio < 1.0 and abs(term) * ratio / (1.0 - ratio) <= ctrl.rel_tol * abs(total):
            return total
    raise NonConvergenceError(
        f"2F1({a}, {b}; {c}; {z}) series exceeded {ctrl.max_terms} terms"
    )


def _gauss_sum(a: float, b: float, c: float) -> float:
    """``2F1(a, b; c; 1)`` for ``c - a - b > 0``."""
    return gamma_ratio((c, c - a - b), (c - a, c - b))


def _connection_2f1(a: float, b: float, c: float, z: float, zc: float,
                    ctrl: SeriesControl) -> float:
    d = c - a - b
    # the two branches can cancel heavily, so sum them to full precision
    ctrl = replace(ctrl, rel_tol=_EPS)
    first = gamma_ratio((c, d), (c - a, c - b))
    if first != 0.0:
        first *= _series_2f1(a, b, 1.0 - d, zc, ctrl)
    second = gamma_ratio((c, -d), (a, b))
    if second != 0.0:
        second *= zc ** d * _series_2f1(c - a, c - b, 1.0 + d, zc, ctrl)
    return first + second


def _euler_2f1(a: float, b: float, c: float, z: float, zc: float,
               ctrl: SeriesControl) -> float | None:
    """Euler integral for 2F1, or None if no upper parameter admits it.

    With ``u = 1 - t`` the integral is

        int_0^1 u^(c-up-1) (1-u)^(up-1) (zc + z u)^(-lo) du,

    whose kernel changes on the scale ``u ~ zc``.  The range is split
    at ``zc`` and 1/2, the middle piece is integrated in ``log u`` and
    the endpoint powers go into the quadrature weights.
    """
    eps = max(ctrl.rel_tol, 1e-13)
    for lo, up in ((a, b), (b, a)):
        e0, e1 = c - up - 1.0, up - 1.0
        # QUADPACK needs both weight exponents strictly above -1 in floating point
        if not (0.0 < up < c and e0 > -1.0 and e1 > -1.0):
            continue
        h = min(zc, 0.5)
        # factors of the integrand not carried by the weight, relative to zc^(-lo)
        def near(u, lo=lo, e1=e1):
            return math.exp(-lo * math.log1p(z * u / zc) + e1 * math.log1p(-u))

        def mid(s, lo=lo, e0=e0, e1=e1):
            u = math.exp(s)
            return math.exp(-lo * math.log1p(z * u / zc) + (e0 + 1.0) * s
                            + e1 * math.log1p(-u))

        def far(u, lo=lo, e0=e0):
            return math.exp(-lo * math.log1p(z * u / zc) + e0 * math.log(u))

        try:
            parts = [integrate.quad(near, 0.0, h, weight="alg", wvar=(e0, 0.0),
                                    epsabs=0.0, epsrel=eps, limit=500)]
            if h < 0.5:
                parts.append(integrate.quad(mid, math.log(h), math.log(0.5),
                                            epsabs=0.0, epsrel=eps, limit=500))
            parts.append(integrate.quad(far, 0.5, 1.0, weight="alg", wvar=(0.0, e1),
                                        epsabs=0.0, epsrel=eps, limit=500))
        except ValueError:
            continue
        val = math.fsum(v for v, _ in parts)
        err = sum(e for _, e in parts)
        if not (math.isfinite(val) and val > 0.0) or err > 1e-9 * val:
            continue
        return gamma_ratio((c,), (up, c - up)) * val * zc ** -lo
    return None


def _shifted_euler_2f1(a: float, b: float, c: float, z: float, zc: float,
                       ctrl: SeriesControl) -> float | None:
    """Euler integral at ``c + k`` and ``c + k + 1``, then recur down in c.

    Used when neither upper parameter lies in (0, c).  The contiguous
    relation

        c (c-1) (z-1) F(c-1) + c (c-1 - (2c-a-b-1) z) F(c) + (c-a)(c-b) z F(c+1) = 0

    run towards smaller c follows the dominant solution near z = 1.  With
    a negative upper parameter that is no longer true, so those cases are
    declined.
    """
    if min(a, b) <= 0.0:
        return None
    k = max(1, math.floor(min(a, b) - c) + 1)
    cc = c + k
    f1 = _euler_2f1(a, b, cc, z, zc, ctrl)
    f2 = _euler_2f1(a, b, cc + 1.0, z, zc, ctrl)
    if f1 is None or f2 is None:
        return None
    for _ in range(k):
        f0 = (cc * (cc - 1.0 - (2.0 * cc - a - b - 1.0) * z) * f1
              + (cc - a) * (cc - b) * z * f2) / (cc * (cc - 1.0) * zc)
        f1, f2 = f0, f1
        cc -= 1.0
    return f1


def hyp2f1(a: float, b: float, c: float, z: float,
           ctrl: SeriesControl | None = None) -> float:
    """Gauss hypergeometric function ``2F1(a, b; c; z)`` for ``z`` in [0, 1].

    The power series is used below ``Z_SWITCH`` and the z -> 1-z
    connection formula above it.  At ``z == 1`` Gauss's summation
    theorem applies, which needs ``c - a - b > 0``.  Near the
    logarithmic case of the connection formula an Euler integral is
    used instead, falling back to the plain series.
    """
    _check_unit("z", z)
    return _hyp2f1(a, b, c, z, 1.0 - z, _control(ctrl))


def _hyp2f1(a: float, b: float, c: float, z: float, zc: float,
            ctrl: SeriesControl) -> float:
    """2F1 with the complement ``zc = 1 - z`` supplied by the caller."""
    if not math.isfinite(c) or c <= 0:
        raise DomainError(f"c must be positive, got {c}")
    if a > b:
        a, b = b, a
    if z == 0.0 or a == 0.0 or b == 0.0:
        return 1.0
    if _is_nonpos_int(a) or _is_nonpos_int(b):
        return _series_2f1(a, b, c, z, ctrl)
    d = c - a - b
    if zc == 0.0:
        if d <= 0:
            raise DomainError(f"2F1 diverges at z=1 when c-a-b = {d} <= 0")
        return _gauss_sum(a, b, c)
    if z < Z_SWITCH:
        return _series_2f1(a, b, c, z, ctrl)
    if abs(d - round(d)) >= INTEGER_GUARD:
        return _connection_2f1(a, b, c, z, zc, ctrl)
    val = _euler_2f1(a, b, c, z, zc, ctrl)
    if val is None:
        val = _shifted_euler_2f1(a, b, c, z, zc, ctrl)
    if val is not None:
        return val
    try:
        return _series_2f1(a, b, c, z, ctrl)
    except NonConvergenceError as exc:
        raise DegenerateConnectionError(
            f"2F1({a}, {b}; {c}; {z}) is near the logarithmic connection case "
            f"(c-a-b = {d}) and no fallback converged"
        ) from exc


# ---------------------------------------------------------------------------
# 3F2 at unit argument
# ---------------------------------------------------------------------------

def _terminating_3f2(uppers: list[float], b1: float, b2: float) -> float:
    stop = int(-max(u for u in uppers if _is_nonpos_int(u)))
    a1, a2, a3 = uppers
    total = term = 1.0
    for n in range(stop):
        term *= (a1 + n) * (a2 + n) * (a3 + n) / ((b1 + n) * (b2 + n) * (n + 1))
        total += term
    return total


def _direct_3f2(a1, a2, a3, b1, b2, s, ctrl) -> float | None:
    """Plain summation, or None when the tail is too heavy for the budget."""
    total = term = 1.0
    warmup = 64
    for n in range(ctrl.max_terms):
        term *= (a1 + n) * (a2 + n) * (a3 + n) / ((b1 + n) * (b2 + n) * (n + 1))
        total += term
        if term == 0.0:
            return total
        m = n + 2
        # terms decay like C m^(-1-s); the tail after m is about term * m / s
        if m > warmup and abs(term) * m / s <= ctrl.rel_tol * abs(total):
            return total
        if m == warmup:
            scale = abs(term) * m ** (1.0 + s)
            needed = (scale / (s * ctrl.rel_tol * abs(total))) ** (1.0 / s)
            if needed > ctrl.max_terms:
                return None
    return None


def _richardson_3f2(a1, a2, a3, b1, b2, s, ctrl) -> tuple[float, float]:
    """Extrapolate partial sums taken at n = N, 2N, 4N, ...

    The partial sums behave like ``S + n^-s (e0 + e1/n + ...)``, so each
    extrapolation column removes the next known power.  Returns the
    estimate and the size of the last diagonal correction.
    """
    base = 16
    total = term = 1.0
    n = 1
    target = base
    best, best_err = math.nan, math.inf
    prev_row: list[float] = []
    while target <= max(ctrl.max_terms, 2 * base):
        while n < target:
            term *= (a1 + n - 1) * (a2 + n - 1) * (a3 + n - 1) / (
                (b1 + n - 1) * (b2 + n - 1) * n)
            total += term
            n += 1
        row = [total]
        for j in range(1, len(prev_row) + 1):
            factor = 2.0 ** (s + j - 1) - 1.0
            row.append(row[j - 1] + (row[j - 1] - prev_row[j - 1]) / factor)
        if prev_row:
            err = abs(row[-1] - prev_row[-1])
            if err < best_err:
                best, best_err = row[-1], err
            if err <= ctrl.rel_tol * abs(row[-1]):
                break
        prev_row = row
        target *= 2
    return best, best_err


def hyp3f2_unit_euler(a1: float, a2: float, a3: float, b1: float, b2: float,
                      ctrl: SeriesControl | None = None) -> float:
    """3F2 at unit argument from Euler's integral over 2F1.

    ``3F2(a1,a2,a3; b1,b2; 1) = Gamma(b2)/(Gamma(a3) Gamma(b2-a3))
    * int_0^1 t^(a3-1) (1-t)^(b2-a3-1) 2F1(a1,a2; b1; t) dt``, with the
    upper/lower pairing chosen so that ``b2 > a3 > 0``.
    """
    ctrl = _control(ctrl)
    uppers = (a1, a2, a3)
    for k, up in enumerate(uppers):
        for lo, other in ((b2, b1), (b1, b2)):
            if not (0.0 < up < lo):
                continue
            x, y = (u for i, u in enumerate(uppers) if i != k)
            return _euler_3f2(x, y, up, other, lo, ctrl)
    raise DomainError("no upper/lower parameter pair satisfies lower > upper > 0")


def _euler_3f2(a1, a2, a3, b1, b2, ctrl) -> float:
    d = b1 - a1 - a2
    alg = (a3 - 1.0, b2 - a3 - 1.0)
    if d < 0:
        # pull the (1-t)^d singularity of 2F1 into the weight
        alg = (a3 - 1.0, b2 - a3 - 1.0 + d)

        def inner(t):
            return _hyp2f1(b1 - a1, b1 - a2, b1, t, 1.0 - t, ctrl)
    else:
        def inner(t):
            return _hyp2f1(a1, a2, b1, t, 1.0 - t, ctrl)

    val, err = integrate.quad(inner, 0.0, 1.0, weight="alg", wvar=alg,
                              epsabs=0.0, epsrel=1e-12, limit=500)
    if not err <= 1e-8 * abs(val):
        raise NonConvergenceError(
            f"Euler integral for 3F2 reached error bound {err:.3g} on value {val:.6g}"
        )
    return gamma_ratio((b2,), (a3, b2 - a3)) * val


def hyp3f2_unit(a1: float, a2: float, a3: float, b1: float, b2: float,
                ctrl: SeriesControl | None = None) -> float:
    """Generalized hypergeometric ``3F2(a1, a2, a3; b1, b2; 1)``.

    Requires ``s = b1 + b2 - a1 - a2 - a3 > 0`` unless the series
    terminates.  An upper parameter equal to a lower one collapses the
    value to Gauss's sum.  Slowly converging series (``s`` below
    ``ctrl.accel_threshold`` or too many terms needed) are extrapolated,
    and the Euler integral is the last resort.
    """
    ctrl = _control(ctrl)
    for x in (b1, b2):
        if not math.isfinite(x) or _is_nonpos_int(x):
            raise DomainError(f"lower parameter {x} is a nonpositive integer")
    uppers = [a1, a2, a3]
    if any(u == 0.0 for u in uppers):
        return 1.0
    if any(_is_nonpos_int(u) for u in uppers):
        return _terminating_3f2(uppers, b1, b2)

    s = b1 + b2 - a1 - a2 - a3
    if not s > 0:
        raise NonConvergenceError(f"3F2 at unit argument diverges: s = {s} <= 0")

    lowers = [b1, b2]
    for i, u in enumerate(uppers):
        if u in lowers:
            rest = uppers[:i] + uppers[i + 1:]
            c = lowers[1 - lowers.index(u)]
            return _gauss_sum(rest[0], rest[1], c)

    if s >= ctrl.accel_threshold:
        val = _direct_3f2(a1, a2, a3, b1, b2, s, ctrl)
        if val is not None:
            return val
    val, err = _richardson_3f2(a1, a2, a3, b1, b2, s, ctrl)
    if err <= max(100 * ctrl.rel_tol, 1e-10) * abs(val):
        return val
    try:
        return hyp3f2_unit_euler(a1, a2, a3, b1, b2, ctrl)
    except (DomainError, NonConvergenceError) as exc:
        raise NonConvergenceError(
            f"3F2({a1}, {a2}, {a3}; {b1}, {b2}; 1) did not converge "
            f"(extrapolation error {err:.3g})"
        ) from exc


def inv_reg_inc_beta(u: float, a: float, b: float, tol: float = 1e-12) -> tuple[float, float]:
    """Solve ``I_v(a, b) = u`` for v.

    Returns ``(v, 1 - v)`` with whichever of the two is small computed
    directly, so callers forming ``v / (1 - v)`` keep full precision.
    Newton steps are safeguarded by bisection on a shrinking bracket.
    """
    if not (0.0 < u < 1.0):
        raise DomainError(f"u must lie in (0, 1), got {u}")
    _check_positive("a", a)
    _check_positive("b", b)
    if u <= 0.5:
        v = _invert_lower(u, a, b, tol)
        return v, 1.0 - v
    vc = _invert_lower(1.0 - u, b, a, tol)
    return 1.0 - vc, vc


def _invert_lower(u: float, a: float, b: float, tol: float) -> float:
    lbeta = math.lgamma(a) + math.lgamma(b) - math.lgamma(a + b)
    lo, hi = 0.0, 1.0
    # crude start from the small-v asymptote I_v ~ v^a / (a B(a, b))
    v = math.exp((math.log(u) + math.log(a) + lbeta) / a)
    if not 0.0 < v < 1.0:
        v = a / (a + b)
    for _ in range(1000):
        f = _reg_inc_beta(v, 1.0 - v, a, b) - u
        if f == 0.0:
            return v
        if f > 0:
            hi = v
        else:
            lo = v
        dens = math.exp((a - 1.0) * math.log(v) + (b - 1.0) * math.log1p(-v) - lbeta)
        step = f / dens if dens > 0 and math.isfinite(dens) else math.inf
        new = v - step
        if not lo < new < hi:
            new = math.sqrt(lo * hi) if lo > 0 and hi / lo > 4 else 0.5 * (lo + hi)
        if abs(new - v) <= tol * new or hi - lo <= tol * lo:
            return new
        v = new
    raise NonConvergenceError(f"could not invert I_v({a}, {b}) = {u}")
