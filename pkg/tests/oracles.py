"""Reference computations that share no code with the package."""

import math
import warnings

import mpmath as mp
import numpy as np
from scipy import integrate, special


def series_2f1(a, b, c, z, tol=1e-16, max_terms=200_000):
    """Plain power series summed until terms are negligible."""
    total = term = mp.mpf(1)
    a, b, c, z = map(mp.mpf, (a, b, c, z))
    with mp.workdps(40):
        for n in range(max_terms):
            term *= (a + n) * (b + n) / ((c + n) * (n + 1)) * z
            total += term
            if abs(term) < tol * abs(total) * (1 - z) ** 2:
                return float(total)
    raise RuntimeError("series oracle did not converge")


def euler_3f2(a1, a2, a3, b1, b2):
    """3F2(a1,a2,a3; b1,b2; 1) from Euler's integral over scipy's 2F1.

    Any upper parameter a with b > a > 0 can be integrated out against
    either lower parameter b.  The pairing whose inner excess
    d = b_inner - a_i - a_j sits furthest from an integer is used, since
    scipy's 2F1 loses digits near t = 1 when d is close to one.  When
    d < 0 the (1-t)^d singularity is moved into the quadrature weight.
    """
    uppers = (a1, a2, a3)
    choices = []
    for k in range(3):
        ai, aj = (uppers[m] for m in range(3) if m != k)
        for bi, bo in ((b1, b2), (b2, b1)):
            if bo > uppers[k] > 0:
                d = bi - ai - aj
                choices.append((abs(d - round(d)), ai, aj, uppers[k], bi, bo))
    if not choices:
        raise ValueError("no convergent Euler pairing")
    _, a1, a2, a3, b1, b2 = max(choices)
    d = b1 - a1 - a2
    if d < 0:
        def f(t):
            return special.hyp2f1(b1 - a1, b1 - a2, b1, t)
        wvar = (a3 - 1, b2 - a3 - 1 + d)
    else:
        def f(t):
            return special.hyp2f1(a1, a2, b1, t)
        wvar = (a3 - 1, b2 - a3 - 1)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", integrate.IntegrationWarning)
        val, _ = integrate.quad(f, 0, 1, weight="alg", wvar=wvar,
                                epsabs=0, epsrel=1e-11, limit=500)
    return math.exp(math.lgamma(b2) - math.lgamma(a3) - math.lgamma(b2 - a3)) * val


def gbp_cdf(a, b, p, q, x):
    """Regularized incomplete beta at w, through the complement when w > 1/2."""
    t = np.asarray((x / q) ** p, dtype=float)
    lower = special.betainc(a, b, t / (1 + t))
    upper = 1.0 - special.betainc(b, a, 1 / (1 + t))
    out = np.where(t <= 1.0, lower, upper)
    return out[()] if out.ndim == 0 else out


def gbp_pdf(a, b, p, q, x):
    r = x / q
    return p / (q * special.beta(a, b)) * r ** (a * p - 1) / (1 + r ** p) ** (a + b)


def crps_by_quadrature(a, b, p, q, y):
    """Integral definition of CRPS directly in x, split at y and at q."""
    def lower(x):
        return gbp_cdf(a, b, p, q, x) ** 2

    def upper(x):
        return special.betainc(b, a, 1 / (1 + (x / q) ** p)) ** 2

    lo, _ = integrate.quad(lower, 0, y, epsabs=1e-13, epsrel=1e-12, limit=500)
    up, _ = integrate.quad(upper, y, np.inf, epsabs=1e-13, epsrel=1e-12, limit=500)
    return lo + up


def crps_mpmath(a, b, p, q, y, dps=30):
    """The closed form evaluated with mpmath at high precision."""
    with mp.workdps(dps):
        a, b, p, q, y = map(mp.mpf, (a, b, p, q, y))
        B = mp.beta(a, b)
        mu = q * mp.beta(a + 1 / p, b - 1 / p) / B
        w = y ** p / (q ** p + y ** p)
        t1 = y * mp.betainc(a, b, 0, w) + y / (a + b - 1) * w ** (a - 1) * (1 - w) ** b * (
            1 - mp.hyp2f1(1, a + b - 1, a + 1 / p, w))
        t2 = 2 * q / (a * B ** 2) * mp.beta(2 * a + 1 / p, 2 * b - 1 / p) * mp.hyp3f2(
            a + b, 1, 2 * a + 1 / p, a + 1, 2 * a + 2 * b, 1)
        return float(2 * mu - y + 2 / B * t1 - t2)


def thomae_3f2(a1, a2, a3, b1, b2, dps=30):
    """3F2 at unit argument via Thomae's relation, summed in mpmath.

    The largest upper parameter becomes the new convergence excess, so the
    transformed series converges quickly even when the original barely does.
    """
    with mp.workdps(dps):
        a, b, c = sorted(map(mp.mpf, (a1, a2, a3)), reverse=True)
        d, e = mp.mpf(b1), mp.mpf(b2)
        s = d + e - a - b - c
        pref = mp.gammaprod([d, e, s], [a, s + b, s + c])
        return float(pref * mp.hyp3f2(d - a, e - a, s, s + b, s + c, 1))
