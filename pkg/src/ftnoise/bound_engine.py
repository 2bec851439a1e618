"""Effective noise strength bounds

Given the per-qubit noise sums of a NoiseModel, fits the envelope
eta_tilde[k] <= f_k alpha**k, evaluates the resummed coefficients

    g_k = sum_l (k-1)! f_{k+l} (2 alpha)**l / (k+l-1)!

and bounds the effective noise strength by

    epsilon <= 2 m alpha exp(sum_k g_k / (2 k!))

Every truncated series is returned as a SeriesValue carrying a certified
bound on the neglected tail, and epsilon is always computed from the upper
end (value + tail) so the direction of the inequality is preserved.

    from ftnoise.bound_engine import corollary1
    report = corollary1(profile, m=2)
    print(report.epsilon, report.verdict)
"""

import logging
import math
from dataclasses import dataclass
from enum import Enum
from typing import List, NamedTuple, Optional, Sequence, Tuple, Union

import numpy as np

from ftnoise.constants import (
    ALPHA0,
    ENVELOPE_VARIANTS,
    EPSILON0,
    EXTRA_K_TERMS,
    MAX_EXPONENT,
    SERIES_MAX_TERMS,
    SERIES_REL_TOL,
    ZETA_MAX_TERMS,
)
from ftnoise.errors import DivergenceError, InputError
from ftnoise.noise_model import EtaProfile

_logger = logging.getLogger(__name__)


class Verdict(str, Enum):
    SCALABLE = "scalable"
    NOT_SCALABLE = "not_scalable"
    INCONCLUSIVE = "inconclusive"


class SeriesValue(NamedTuple):
    """A truncated sum and a certified bound on what was left out"""

    value: float
    tail: float = 0.0

    @property
    def upper(self) -> float:
        return self.value + self.tail


@dataclass(frozen=True)
class Envelope:
    """The family f_k bounding the noise sums: eta_tilde[k] <= f_k alpha**k

    Keyword args:
      variant (str) - "constant_one" (f_k = 1), "factorial_power"
                      (f_k = k!/k**p) or "explicit"
      p (float) - exponent for factorial_power, at least 1
      values (tuple of float) - f_1, f_2, ... for explicit envelopes
    """

    variant: str = "constant_one"
    p: float = 1.0
    values: Tuple[float, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "values", tuple(float(v) for v in self.values))
        if self.variant not in ENVELOPE_VARIANTS:
            raise InputError(
                f"Unknown envelope '{self.variant}', "
                f"expected one of {ENVELOPE_VARIANTS}"
            )
        if self.variant == "factorial_power" and not self.p >= 1:
            raise InputError(f"factorial_power envelope needs p >= 1, got {self.p}")
        if self.variant == "explicit":
            if not self.values:
                raise InputError("explicit envelope needs at least one value")
            if any(not (math.isfinite(v) and v > 0) for v in self.values):
                raise InputError("explicit envelope values must be positive")

    @property
    def length(self) -> Optional[int]:
        """Number of defined f_k, or None if defined for all k"""
        if self.variant == "explicit":
            return len(self.values)
        return None

    def log_f(self, k: int) -> float:
        if k < 1:
            raise InputError(f"f_k is defined for k >= 1, got {k}")
        if self.variant == "constant_one":
            return 0.0
        if self.variant == "factorial_power":
            return math.lgamma(k + 1) - self.p * math.log(k)
        if k > len(self.values):
            raise InputError(
                f"explicit envelope defines f_k only for k <= {len(self.values)}"
            )
        return math.log(self.values[k - 1])

    def f(self, k: int) -> float:
        return math.exp(self.log_f(k))

    def __str__(self):
        if self.variant == "factorial_power":
            return f"factorial_power(p={self.p:g})"
        if self.variant == "explicit":
            return f"explicit({len(self.values)} values)"
        return self.variant


@dataclass(frozen=True)
class BoundReport:
    """The result of evaluating the effective noise strength bound

    epsilon is None when it could not be computed; caveats then say why.
    g holds the generic series coefficients g_1, g_2, ..., exponent_sum is
    the exponent from which epsilon was computed, and theorem1_epsilon is the
    generic evaluation, reported next to the closed forms of the corollaries.
    """

    method: str
    envelope: str
    alpha: float
    m: int
    g: Tuple[SeriesValue, ...]
    exponent_sum: Optional[SeriesValue]
    epsilon: Optional[float]
    epsilon0: float
    verdict: Verdict
    caveats: Tuple[str, ...] = ()
    theorem1_epsilon: Optional[float] = None
    alpha0: float = ALPHA0

    @property
    def alpha_scalable(self) -> bool:
        """True if alpha is below the threshold alpha0"""
        return self.alpha < self.alpha0

    @property
    def conclusive(self) -> bool:
        return self.verdict != Verdict.INCONCLUSIVE

    def to_dict(self, n_g: Optional[int] = None) -> dict:
        g = self.g if n_g is None else self.g[:n_g]
        return {
            "method": self.method,
            "envelope": self.envelope,
            "alpha": self.alpha,
            "alpha0": self.alpha0,
            "alpha_scalable": self.alpha_scalable,
            "m": self.m,
            "g": [{"value": v.value, "tail": v.tail} for v in g],
            "exponent_sum": (
                None
                if self.exponent_sum is None
                else {"value": self.exponent_sum.value, "tail": self.exponent_sum.tail}
            ),
            "epsilon": self.epsilon,
            "theorem1_epsilon": self.theorem1_epsilon,
            "epsilon0": self.epsilon0,
            "verdict": self.verdict.value,
            "caveats": list(self.caveats),
        }


def c_alpha(alpha: float) -> float:
    """C(alpha) = 1 / (1 - 2 alpha)

    Raises:
      DivergenceError if 2 alpha >= 1
    """
    if 2.0 * alpha >= 1.0:
        raise DivergenceError(f"C(alpha) undefined: 2 alpha = {2.0 * alpha:g} >= 1")
    return 1.0 / (1.0 - 2.0 * alpha)


def fit_alpha(profile: EtaProfile, envelope: Envelope) -> float:
    """The smallest alpha with eta_tilde[k] <= f_k alpha**k for every k

    Returns:
      float: max over k with eta_tilde[k] > 0 of (eta_tilde[k] / f_k)**(1/k),
      or 0 if every eta_tilde is zero

    Raises:
      InputError if the envelope is shorter than the profile or an entry
      is negative
    """
    if envelope.length is not None and envelope.length < profile.k_max:
        raise InputError(
            f"explicit envelope has {envelope.length} values but the profile "
            f"goes up to k = {profile.k_max}"
        )
    alpha = 0.0
    for k, eta in enumerate(profile.eta_tilde, start=1):
        if eta < 0 or not math.isfinite(eta):
            raise InputError(f"eta_tilde for k = {k} is {eta}")
        if eta > 0:
            alpha = max(alpha, math.exp((math.log(eta) - envelope.log_f(k)) / k))
    return alpha


def g_coefficient(
    k: int, envelope: Envelope, alpha: float, rel_tol: float = SERIES_REL_TOL
) -> SeriesValue:
    """Evaluates g_k = sum_l (k-1)! f_{k+l} (2 alpha)**l / (k+l-1)!

    Terms are summed until a geometric bound on the remainder falls below
    rel_tol times the partial sum. Consecutive terms shrink at least by
    2 alpha / (k+l) for constant_one and by 2 alpha for factorial_power.
    Explicit envelopes stop at the end of their list.

    Returns:
      SeriesValue: partial sum and certified tail

    Raises:
      DivergenceError if 2 alpha >= 1
    """
    if k < 1:
        raise InputError(f"g_k is defined for k >= 1, got {k}")
    if alpha < 0:
        raise InputError(f"alpha must be nonnegative, got {alpha}")
    if rel_tol <= 0:
        raise InputError("rel_tol must be positive")
    c_alpha(alpha)
    f_k = envelope.f(k)
    if alpha == 0:
        return SeriesValue(f_k, 0.0)

    log_2alpha = math.log(2.0 * alpha)
    lgamma_k = math.lgamma(k)
    limit = envelope.length
    total = 0.0
    tail = 0.0
    for l in range(SERIES_MAX_TERMS):
        j = k + l
        if limit is not None and j > limit:
            break
        term = math.exp(lgamma_k + envelope.log_f(j) + l * log_2alpha - math.lgamma(j))
        total += term
        if limit is not None:
            continue
        if envelope.variant == "constant_one":
            ratio = 2.0 * alpha / j
        else:
            ratio = 2.0 * alpha
        tail = term * ratio / (1.0 - ratio)
        if tail <= rel_tol * total:
            break
    _logger.debug(f"g_{k}: {l + 1} terms, value {total:.12g}, tail {tail:.3g}")
    return SeriesValue(total, tail)


def g_ceiling(k: int, envelope: Envelope, alpha: float) -> float:
    """The envelope's closed-form ceiling on g_k: C(alpha) for constant_one,
    (k!/k**p) C(alpha) for factorial_power, infinity for explicit envelopes"""
    c = c_alpha(alpha)
    if envelope.variant == "constant_one":
        return c
    if envelope.variant == "factorial_power":
        return envelope.f(k) * c
    return math.inf


def zeta_half_sum(p: float, rel_tol: float = SERIES_REL_TOL) -> SeriesValue:
    """sum_{k>=1} 1 / (2 k**p) with a certified tail

    The remainder after N terms is bounded by the integral of x**-p from
    N + 1/2, valid because k**-p is convex.
    """
    if not p > 1:
        raise InputError(f"sum of 1/k**p diverges for p <= 1, got p = {p}")
    # log of the term count that brings the tail below rel_tol
    log_n = -math.log(rel_tol * (p - 1.0)) / (p - 1.0)
    if log_n > math.log(ZETA_MAX_TERMS):
        n = ZETA_MAX_TERMS
    else:
        n = max(math.ceil(math.exp(log_n)), 1)
    k = np.arange(n, 0, -1, dtype=float)
    value = 0.5 * float(np.sum(k**-p))
    tail = 0.5 * (n + 0.5) ** (1.0 - p) / (p - 1.0)
    return SeriesValue(value, tail)


def exponent_sum(
    g: Sequence[Union[SeriesValue, float]],
    alpha: float,
    envelope: Optional[Envelope] = None,
) -> SeriesValue:
    """sum_k g_k / (2 k!) over the given g_1, g_2, ..., plus a certified
    bound on k beyond the list from the envelope ceilings

    Args:
      g: g_k values, either SeriesValue or plain floats
      alpha (float): the fitted alpha
      envelope (Envelope): bounds the terms beyond the list; None means
        the terms beyond the list are zero

    Raises:
      DivergenceError if the sum diverges or overflows exp()
    """
    value = 0.0
    tail = 0.0
    for k, gk in enumerate(g, start=1):
        if isinstance(gk, SeriesValue):
            v, t = gk.value, gk.tail
        else:
            v, t = float(gk), 0.0
        weight = 0.5 * math.exp(-math.lgamma(k + 1))
        value += v * weight
        tail += t * weight
    n = len(g)
    if envelope is not None and envelope.variant != "explicit":
        c = c_alpha(alpha)
        if envelope.variant == "constant_one":
            # sum_{k>n} 1/k! <= (n+2) / ((n+1)! (n+1))
            tail += 0.5 * c * math.exp(-math.lgamma(n + 2)) * (n + 2) / (n + 1)
        else:
            if envelope.p <= 1:
                raise DivergenceError(
                    f"sum over k diverges for factorial_power p = {envelope.p:g}"
                )
            p = envelope.p
            tail += 0.5 * c * (n + 0.5) ** (1.0 - p) / (p - 1.0)
    finite = math.isfinite(value) and math.isfinite(tail)
    if not finite or value + tail > MAX_EXPONENT:
        raise DivergenceError("exponent sum diverges")
    return SeriesValue(value, tail)


def epsilon_bound(
    alpha: float,
    g: Sequence[Union[SeriesValue, float]],
    m: int,
    envelope: Optional[Envelope] = None,
) -> float:
    """epsilon = 2 m alpha exp(sum_k g_k / (2 k!)), from the certified upper
    end of the exponent sum

    Raises:
      DivergenceError if 2 alpha >= 1 or the exponent sum diverges
    """
    if m < 1:
        raise InputError(f"m must be at least 1, got {m}")
    if alpha < 0:
        raise InputError(f"alpha must be nonnegative, got {alpha}")
    c_alpha(alpha)
    if alpha == 0:
        return 0.0
    return 2.0 * m * alpha * math.exp(exponent_sum(g, alpha, envelope).upper)


def theorem1_series(
    k_max: int, envelope: Envelope, alpha: float
) -> Tuple[Tuple[SeriesValue, ...], SeriesValue]:
    """g_k for k up to k_max + EXTRA_K_TERMS (or the end of an explicit
    envelope) and the resulting exponent sum"""
    n = k_max + EXTRA_K_TERMS
    if envelope.length is not None:
        n = envelope.length
    g = tuple(g_coefficient(k, envelope, alpha) for k in range(1, n + 1))
    for k, gk in enumerate(g, start=1):
        ceiling = g_ceiling(k, envelope, alpha)
        if gk.value > ceiling * (1.0 + 1e-9):
            _logger.warning(f"g_{k} = {gk.value} exceeds its ceiling {ceiling}")
    return g, exponent_sum(g, alpha, envelope)


def ceiling_exponent(alpha: float, envelope: Envelope) -> SeriesValue:
    """The exponent sum with every g_k replaced by its envelope ceiling:
    C(alpha) (e - 1) / 2 for constant_one and
    C(alpha) sum_k 1/(2 k**p) for factorial_power"""
    c = c_alpha(alpha)
    if envelope.variant == "constant_one":
        exponent = SeriesValue(c * (math.e - 1.0) / 2.0, 0.0)
    elif envelope.variant == "factorial_power":
        zeta = zeta_half_sum(envelope.p)
        exponent = SeriesValue(c * zeta.value, c * zeta.tail)
    else:
        raise InputError("explicit envelopes have no closed-form ceiling")
    if exponent.upper > MAX_EXPONENT:
        raise DivergenceError(f"exponent {exponent.upper:g} overflows")
    return exponent


def ceiling_epsilon(alpha: float, envelope: Envelope, m: int) -> float:
    """Closed-form epsilon: 2 m alpha (e**((e-1)/2))**C(alpha) for
    constant_one, 2 m alpha exp(C(alpha) sum_k 1/(2 k**p)) for
    factorial_power"""
    if m < 1:
        raise InputError(f"m must be at least 1, got {m}")
    exponent = ceiling_exponent(alpha, envelope)
    if alpha == 0:
        return 0.0
    return 2.0 * m * alpha * math.exp(exponent.upper)


def verdict(epsilon: Optional[float], epsilon0: float = EPSILON0) -> Verdict:
    """Scalable iff epsilon < epsilon0; inconclusive if epsilon is unknown"""
    if epsilon is None or not math.isfinite(epsilon):
        return Verdict.INCONCLUSIVE
    if epsilon < epsilon0:
        return Verdict.SCALABLE
    return Verdict.NOT_SCALABLE


def _bound_report(
    method: str,
    profile: EtaProfile,
    envelope: Envelope,
    m: int,
    epsilon0: float,
    alpha0: float,
    closed_form: bool,
) -> BoundReport:
    if m < 1:
        raise InputError(f"m must be at least 1, got {m}")
    alpha = fit_alpha(profile, envelope)
    _logger.info(f"{method}: alpha = {alpha:.6g} for envelope {envelope}")
    caveats: List[str] = []
    if envelope.length is not None:
        caveats.append(f"explicit envelope assumed zero beyond k = {envelope.length}")
    else:
        caveats.append(f"envelope asserted beyond k_max = {profile.k_max}")

    def inconclusive(reason: str, g=(), exponent=None, generic=None):
        _logger.warning(f"{method}: inconclusive, {reason}")
        return BoundReport(
            method=method,
            envelope=str(envelope),
            alpha=alpha,
            m=m,
            g=g,
            exponent_sum=exponent,
            epsilon=None,
            epsilon0=epsilon0,
            verdict=Verdict.INCONCLUSIVE,
            caveats=tuple(caveats + [reason]),
            theorem1_epsilon=generic,
            alpha0=alpha0,
        )

    if 2.0 * alpha >= 1.0:
        return inconclusive(f"2 alpha = {2.0 * alpha:.6g} >= 1: C(alpha) undefined")
    try:
        g, generic_exponent = theorem1_series(profile.k_max, envelope, alpha)
    except DivergenceError as e:
        return inconclusive(str(e))
    generic = 2.0 * m * alpha * math.exp(generic_exponent.upper)

    if closed_form:
        try:
            exponent = ceiling_exponent(alpha, envelope)
        except DivergenceError as e:
            return inconclusive(str(e), g, None, generic)
    else:
        exponent = generic_exponent
    epsilon = 2.0 * m * alpha * math.exp(exponent.upper)
    result = verdict(epsilon, epsilon0)
    _logger.info(f"{method}: epsilon = {epsilon:.6g}, {result.value}")
    return BoundReport(
        method=method,
        envelope=str(envelope),
        alpha=alpha,
        m=m,
        g=g,
        exponent_sum=exponent,
        epsilon=epsilon,
        epsilon0=epsilon0,
        verdict=result,
        caveats=tuple(caveats),
        theorem1_epsilon=generic,
        alpha0=alpha0,
    )


def theorem1(
    profile: EtaProfile,
    envelope: Envelope,
    m: int,
    epsilon0: float = EPSILON0,
    alpha0: float = ALPHA0,
) -> BoundReport:
    """Generic evaluation: fitted alpha, truncated g_k series and certified
    exponent tail"""
    return _bound_report("theorem1", profile, envelope, m, epsilon0, alpha0, False)


def corollary1(
    profile: EtaProfile, m: int, epsilon0: float = EPSILON0, alpha0: float = ALPHA0
) -> BoundReport:
    """f_k = 1: epsilon = 2 m alpha (e**((e-1)/2))**C(alpha), about 4.72 m alpha
    for small alpha. The generic evaluation is kept in theorem1_epsilon."""
    return _bound_report(
        "corollary1", profile, Envelope("constant_one"), m, epsilon0, alpha0, True
    )


def corollary2(
    profile: EtaProfile,
    p: float,
    m: int,
    epsilon0: float = EPSILON0,
    alpha0: float = ALPHA0,
) -> BoundReport:
    """f_k = k!/k**p with p > 1: epsilon = 2 m alpha_p exp(C(alpha_p)
    sum_k 1/(2 k**p)), about 4.55 m alpha for p = 2

    Raises:
      InputError if p <= 1
    """
    if not p > 1:
        raise InputError(f"corollary2 needs p > 1, got {p}")
    envelope = Envelope("factorial_power", p=p)
    return _bound_report("corollary2", profile, envelope, m, epsilon0, alpha0, True)


def bound_report(
    profile: EtaProfile,
    envelope: Envelope,
    m: int,
    epsilon0: float = EPSILON0,
    alpha0: float = ALPHA0,
) -> BoundReport:
    """Picks the tightest closed form available for the envelope: corollary1
    for constant_one, corollary2 for factorial_power with p > 1, and the
    generic evaluation otherwise"""
    if envelope.variant == "constant_one":
        return corollary1(profile, m, epsilon0, alpha0)
    if envelope.variant == "factorial_power" and envelope.p > 1:
        return corollary2(profile, envelope.p, m, epsilon0, alpha0)
    return theorem1(profile, envelope, m, epsilon0, alpha0)
