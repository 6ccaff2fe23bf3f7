"""Real-argument special functions used by the closed-form entries.

Everything runs in double precision. Tolerances (relative):

* ``ln_gamma``, ``reg_lower_inc_gamma``: 1e-12
* ``gauss_2f1``: 1e-10 for ``z <= 0`` and ``0 <= z < 1``
* ``hyp_3f2``: 1e-8 (direct series for small, benign ``z``; Euler
  integral over a ``2F1`` kernel otherwise)
"""

from __future__ import annotations

import math

from scipy import integrate, special

from .exceptions import ConvergenceError, DomainError

SERIES_RTOL = 1e-16
SERIES_MAX_TERMS = 10_000
# below this |z| the direct 3F2 series is tried first
_DIRECT_3F2_LIMIT = 0.9
_CANCELLATION_LIMIT = 1e3
# Pfaff argument w = z/(z-1) above which the 1/z connection formula is preferred
_PFAFF_LIMIT = 0.9


def _check_real(name, value):
    value = float(value)
    if not math.isfinite(value):
        raise DomainError(f"{name} must be finite, got {value!r}")
    return value


def _is_nonpos_int(x):
    return x <= 0 and x == math.floor(x)


def ln_gamma(x: float) -> float:
    """Natural logarithm of the gamma function for ``x > 0``."""
    x = _check_real("x", x)
    if x <= 0:
        raise DomainError(f"ln_gamma requires x > 0, got {x}")
    return math.lgamma(x)


def rgamma(x: float) -> float:
    """``1/Gamma(x)``, zero at the poles."""
    if _is_nonpos_int(x):
        return 0.0
    return 1.0 / math.gamma(x)


def hyp_series(a_params, b_params, z, max_terms=SERIES_MAX_TERMS):
    """Sum the generalised hypergeometric series term by term.

    Stops once ``|term| <= 1e-16 * |partial sum|`` for three consecutive
    terms, or when a numerator parameter terminates the series.
    """
    total = 1.0
    term = 1.0
    quiet = 0
    for n in range(max_terms):
        num = 1.0
        for a in a_params:
            num *= a + n
        if num == 0.0:
            return total
        den = float(n + 1)
        for b in b_params:
            den *= b + n
        term *= num / den * z
        total += term
        if abs(term) <= SERIES_RTOL * abs(total):
            quiet += 1
            if quiet >= 3:
                return total
        else:
            quiet = 0
        if not math.isfinite(total):
            break
    raise ConvergenceError(
        f"hypergeometric series did not converge in {max_terms} terms "
        f"(a={tuple(a_params)}, b={tuple(b_params)}, z={z})",
        partial=total,
        terms=max_terms,
    )


def _series_with_peak(a_params, b_params, z):
    total = 1.0
    term = 1.0
    peak = 1.0
    quiet = 0
    for n in range(SERIES_MAX_TERMS):
        num = 1.0
        for a in a_params:
            num *= a + n
        if num == 0.0:
            return total, peak
        den = float(n + 1)
        for b in b_params:
            den *= b + n
        term *= num / den * z
        total += term
        peak = max(peak, abs(term))
        if abs(term) <= SERIES_RTOL * abs(total):
            quiet += 1
            if quiet >= 3:
                return total, peak
        else:
            quiet = 0
    raise ConvergenceError(f"3F2 series did not converge at z={z}", partial=total,
                           terms=SERIES_MAX_TERMS)


def _pfaff(a, b, c, z):
    # F(a,b;c;z) = (1-z)^-b F(b, c-a; c; w) = (1-z)^-a F(a, c-b; c; w)
    w = z / (z - 1.0)
    forms = [(b, c - a, -b), (a, c - b, -a)]

    def positive(form):
        p, q, _ = form
        return (p >= 0 and q >= 0 and c > 0) or _is_nonpos_int(q) or _is_nonpos_int(p)

    form = next((f for f in forms if positive(f)), None)
    if form is None:
        form = min(forms, key=lambda f: abs(f[1]))
    p, q, e = form
    return (1.0 - z) ** e * hyp_series((p, q), (c,), w)


def _inverse_z(a, b, c, z):
    # connection formula for z < -1, needs b - a not an integer
    mz = -z
    t1 = (math.gamma(c) * math.gamma(b - a) * rgamma(b) * rgamma(c - a)
          * mz ** (-a) * hyp_series((a, a - c + 1.0), (a - b + 1.0,), 1.0 / z))
    t2 = (math.gamma(c) * math.gamma(a - b) * rgamma(a) * rgamma(c - b)
          * mz ** (-b) * hyp_series((b, b - c + 1.0), (b - a + 1.0,), 1.0 / z))
    return t1 + t2


def gauss_2f1(a: float, b: float, c: float, z: float) -> float:
    """Gauss hypergeometric function ``2F1(a, b; c; z)`` for real ``z < 1``.

    Negative arguments go through the Pfaff transformation to
    ``z/(z-1)``; for ``z < -9`` the ``1/z`` connection formula takes over
    when ``b - a`` is not an integer.

    Raises
    ------
    DomainError
        ``z >= 1`` or ``c`` a non-positive integer.
    ConvergenceError
        No convergence within 10 000 terms.
    """
    a, b, c, z = (_check_real(n, v) for n, v in zip("abcz", (a, b, c, z)))
    if _is_nonpos_int(c):
        raise DomainError(f"c must not be a non-positive integer, got {c}")
    if z >= 1.0:
        raise DomainError(f"gauss_2f1 requires z < 1, got {z}")
    if z == 0.0 or a == 0.0 or b == 0.0:
        return 1.0
    if z > 0.0:
        return hyp_series((a, b), (c,), z)
    if z / (z - 1.0) <= _PFAFF_LIMIT:
        return _pfaff(a, b, c, z)
    d = b - a
    if d != math.floor(d):
        return _inverse_z(a, b, c, z)
    return _pfaff(a, b, c, z)


def hyp_3f2(a1: float, a2: float, a3: float, b1: float, b2: float, z: float) -> float:
    """Generalised hypergeometric function ``3F2(a1, a2, a3; b1, b2; z)``.

    Direct summation for ``|z| < 0.9`` unless the alternating series
    cancels more than three digits. Otherwise (and for ``z <= -0.9``) an Euler
    integral ``Gamma(b)/(Gamma(a)Gamma(b-a)) int_0^1 t^(a-1) (1-t)^(b-a-1)
    2F1(...; z t) dt`` is used over any pair with ``b > a > 0``; the
    endpoint singularities are handled by an algebraic-weight rule.
    Accuracy target is 1e-8 relative.
    """
    vals = [_check_real(n, v) for n, v in
            zip(("a1", "a2", "a3", "b1", "b2", "z"), (a1, a2, a3, b1, b2, z))]
    a = vals[:3]
    b = vals[3:5]
    z = vals[5]
    if any(_is_nonpos_int(x) for x in b):
        raise DomainError(f"lower parameters must not be non-positive integers, got {b}")
    if z == 0.0 or any(x == 0.0 for x in a):
        return 1.0
    # cancelling pair -> 2F1
    for i, ai in enumerate(a):
        for j, bj in enumerate(b):
            if ai == bj:
                rest_a = [x for k, x in enumerate(a) if k != i]
                rest_b = [x for k, x in enumerate(b) if k != j]
                return gauss_2f1(rest_a[0], rest_a[1], rest_b[0], z)
    if z >= 1.0:
        raise DomainError(f"hyp_3f2 requires z < 1, got {z}")
    if z > 0.0 or abs(z) < _DIRECT_3F2_LIMIT:
        total, peak = _series_with_peak(a, b, z)
        # alternating series losing more than ~4 digits to cancellation
        if z > 0.0 or peak <= _CANCELLATION_LIMIT * abs(total):
            return total
    for i, ai in enumerate(a):
        for j, bj in enumerate(b):
            if bj > ai > 0.0:
                rest_a = [x for k, x in enumerate(a) if k != i]
                rest_b = b[1 - j]
                return _euler_3f2(ai, bj, rest_a, rest_b, z)
    raise ConvergenceError(
        f"3F2 at z={z} needs a parameter pair with b > a > 0, got a={a}, b={b}")


def _euler_3f2(a, b, rest_a, rest_b, z):
    def kernel(t):
        return gauss_2f1(rest_a[0], rest_a[1], rest_b, z * t)

    val, err = integrate.quad(kernel, 0.0, 1.0, weight="alg",
                              wvar=(a - 1.0, b - a - 1.0),
                              epsabs=0.0, epsrel=1e-12, limit=200)
    scale = math.exp(math.lgamma(b) - math.lgamma(a) - math.lgamma(b - a))
    if not err <= 1e-9 * max(abs(val), 1e-300):
        raise ConvergenceError(f"Euler integral for 3F2 at z={z} reached only {err:.3g}",
                               partial=scale * val)
    return scale * val


def reg_lower_inc_gamma(M: float, x: float) -> float:
    """Regularised lower incomplete gamma ``P(M, x)``, the Gamma(M, 1) cdf at ``x``."""
    M = _check_real("M", M)
    if math.isnan(float(x)):
        raise DomainError("x must not be NaN")
    x = float(x)
    if M <= 0 or x < 0:
        raise DomainError(f"reg_lower_inc_gamma requires M > 0 and x >= 0, got ({M}, {x})")
    if math.isinf(x):
        return 1.0
    return float(special.gammainc(M, x))


def pochhammer(a: float, n: int) -> float:
    """Rising factorial ``(a)_n``."""
    out = 1.0
    for i in range(n):
        out *= a + i
    return out


def binom_real(x: float, k: int) -> float:
    """Generalised binomial coefficient ``x choose k`` for real ``x``."""
    out = 1.0
    for i in range(k):
        out *= (x - i) / (i + 1)
    return out


__all__ = [
    "ln_gamma",
    "gauss_2f1",
    "hyp_3f2",
    "reg_lower_inc_gamma",
    "rgamma",
    "pochhammer",
    "binom_real",
    "hyp_series",
]
