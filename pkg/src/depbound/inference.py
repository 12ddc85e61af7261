"""Wald-type confidence intervals for the sample mean."""
from __future__ import annotations

import math
from dataclasses import dataclass

# Acklam's rational approximation to the inverse normal CDF
_A = (-3.969683028665376e+01, 2.209460984245205e+02, -2.759285104469687e+02,
      1.383577518672690e+02, -3.066479806614716e+01, 2.506628277459239e+00)
_B = (-5.447609879822406e+01, 1.615858368580409e+02, -1.556989798598866e+02,
      6.680131188771972e+01, -1.328068155288572e+01)
_C = (-7.784894002430293e-03, -3.223964580411365e-01, -2.400758277161838e+00,
      -2.549732539343734e+00, 4.374664141464968e+00, 2.938163982698783e+00)
_D = (7.784695709041462e-03, 3.224671290700398e-01, 2.445134137142996e+00,
      3.754408661907416e+00)
_P_LOW = 0.02425


def _poly(coefs, x: float) -> float:
    acc = 0.0
    for c in coefs:
        acc = acc * x + c
    return acc


def normal_cdf(x: float) -> float:
    return 0.5 * math.erfc(-x / math.sqrt(2.0))


def normal_quantile(p: float) -> float:
    """Inverse standard normal CDF.

    The rational approximation is good to about 1e-9 relative error; one
    Newton step against the erfc-based CDF brings it to near machine
    precision away from the extreme tails.
    """
    if not 0.0 < p < 1.0:
        raise ValueError(f"quantile level must lie strictly between 0 and 1, got {p!r}")
    if p < _P_LOW:
        q = math.sqrt(-2.0 * math.log(p))
        z = _poly(_C, q) / (_poly(_D, q) * q + 1.0)
    elif p <= 1.0 - _P_LOW:
        q = p - 0.5
        r = q * q
        z = _poly(_A, r) * q / (_poly(_B, r) * r + 1.0)
    else:
        q = math.sqrt(-2.0 * math.log1p(-p))
        z = -_poly(_C, q) / (_poly(_D, q) * q + 1.0)
    density = math.exp(-0.5 * z * z) / math.sqrt(2.0 * math.pi)
    if density > 0.0:
        # work in the smaller tail so the residual keeps its precision
        if z > 0:
            err = normal_cdf(-z) - (1.0 - p)
            z += err / density
        else:
            err = normal_cdf(z) - p
            z -= err / density
    return z


@dataclass(frozen=True)
class ConfidenceInterval:
    center: float
    half_width: float
    alpha: float

    @property
    def lower(self) -> float:
        return self.center - self.half_width

    @property
    def upper(self) -> float:
        return self.center + self.half_width

    @property
    def width(self) -> float:
        return 2.0 * self.half_width

    def covers(self, value: float) -> bool:
        return self.lower <= value <= self.upper


def critical_value(alpha: float) -> float:
    if not 0.0 < alpha < 1.0:
        raise ValueError(f"alpha must lie strictly between 0 and 1, got {alpha!r}")
    return normal_quantile(1.0 - alpha / 2.0)


def wald_ci(mean: float, variance: float, alpha: float = 0.05, estimator: str = "variance") -> ConfidenceInterval:
    """``mean +/- z_{1-alpha/2} * sqrt(variance)``.

    Negative variances (possible for the general estimator at a matrix that
    does not maximize it) are rejected rather than clamped.
    """
    if not math.isfinite(variance):
        raise ValueError(f"{estimator} estimate is not finite ({variance!r})")
    if variance < 0:
        raise ValueError(f"{estimator} estimate is negative ({variance!r}); no interval exists")
    return ConfidenceInterval(float(mean), critical_value(alpha) * math.sqrt(variance), float(alpha))


def ci_from_se(mean: float, standard_error: float, alpha: float = 0.05) -> ConfidenceInterval:
    if standard_error < 0:
        raise ValueError("standard error must be nonnegative")
    return ConfidenceInterval(float(mean), critical_value(alpha) * standard_error, float(alpha))
