"""CH-inequality statistics: the general four-setting form and S(theta).

The four-setting statistic is

    [p12(a,b) - p12(a,b') + p12(a',b) + p12(a',b')] / [p1(a') + p2(b)]  <=  1

for any locally factorizing model. With the equal-spacing geometry
(a, a', b, b') = (0, 2t, t, 3t) the three short relative angles coincide and
the statistic reduces to S(t) = [3 p12(t) - p12(3t)] / [p1(2t) + p2(t)],
which for the cos^2 correlation of this bench has the closed form
[3 cos^2 t - cos^2 3t] / [cos^2 2t + cos^2 t].
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .errors import ParameterError
from .model import Estimate, cos_squared_deg

_VALUE_RANGE = (-0.05, 1.05)


@dataclass(frozen=True)
class ChInputs:
    """The six measured probabilities entering the four-setting statistic.

    Values may dip slightly below zero after background subtraction; anything
    outside [-0.05, 1.05] is rejected as a sign of a broken normalization.
    """

    p12_ab: Estimate
    p12_ab_prime: Estimate
    p12_a_prime_b: Estimate
    p12_a_prime_b_prime: Estimate
    p1_a_prime: Estimate
    p2_b: Estimate

    def __post_init__(self):
        lo, hi = _VALUE_RANGE
        for name, est in self.__dict__.items():
            if not lo <= est.value <= hi:
                raise ParameterError(f"{name} = {est.value} outside [{lo}, {hi}]")


@dataclass(frozen=True)
class ChVerdict:
    """S value with uncertainty and its standing against the local bound 1."""

    s_value: float
    uncertainty: float
    violated: bool
    sigma_above_bound: float


def verdict_from_ratio(num: float, sigma_num: float, den: float, sigma_den: float) -> ChVerdict:
    if den <= 0.0:
        raise ParameterError("denominator p1 + p2 must be positive")
    s = num / den
    sigma = math.hypot(sigma_num / den, num * sigma_den / den**2)
    if sigma > 0.0:
        above = (s - 1.0) / sigma
    else:
        above = math.nan
    return ChVerdict(s_value=s, uncertainty=sigma, violated=s - 1.0 > 0.0, sigma_above_bound=above)


def ch_statistic(inputs: ChInputs) -> ChVerdict:
    """Evaluate the four-setting statistic with uncorrelated error propagation."""
    num = (
        inputs.p12_ab.value
        - inputs.p12_ab_prime.value
        + inputs.p12_a_prime_b.value
        + inputs.p12_a_prime_b_prime.value
    )
    sigma_num = math.sqrt(
        inputs.p12_ab.sigma**2
        + inputs.p12_ab_prime.sigma**2
        + inputs.p12_a_prime_b.sigma**2
        + inputs.p12_a_prime_b_prime.sigma**2
    )
    den = inputs.p1_a_prime.value + inputs.p2_b.value
    sigma_den = math.hypot(inputs.p1_a_prime.sigma, inputs.p2_b.sigma)
    return verdict_from_ratio(num, sigma_num, den, sigma_den)


def p12_ideal(theta_cd_deg: float, theta_ab_deg: float = 0.0) -> float:
    """Ideal normalized coincidence probability cos^2(theta_cd - theta_ab).

    theta_ab is the offset between the two preparation axes; the analyzer
    offset must be at least as large.
    """
    if theta_cd_deg < theta_ab_deg:
        raise ParameterError("theta_cd must be at least theta_ab")
    return cos_squared_deg(theta_cd_deg - theta_ab_deg)


def s_of_theta_ideal(theta_deg: float) -> float:
    """Closed-form S(theta) for the cos^2 correlation of this bench."""
    num = 3.0 * cos_squared_deg(theta_deg) - cos_squared_deg(3.0 * theta_deg)
    den = cos_squared_deg(2.0 * theta_deg) + cos_squared_deg(theta_deg)
    if den == 0.0:
        raise ParameterError(f"S(theta) undefined at theta = {theta_deg}")
    return num / den


def s_of_theta_measured(p12_theta: Estimate, p12_3theta: Estimate, p1_a_prime: Estimate,
                        p2_b: Estimate) -> ChVerdict:
    """S(theta) from measured probabilities, with 3*p12(theta) propagated coherently."""
    for name, est in (
        ("p12_theta", p12_theta),
        ("p12_3theta", p12_3theta),
        ("p1_a_prime", p1_a_prime),
        ("p2_b", p2_b),
    ):
        if not _VALUE_RANGE[0] <= est.value <= _VALUE_RANGE[1]:
            raise ParameterError(f"{name} = {est.value} outside {_VALUE_RANGE}")
    num = 3.0 * p12_theta.value - p12_3theta.value
    sigma_num = math.hypot(3.0 * p12_theta.sigma, p12_3theta.sigma)
    den = p1_a_prime.value + p2_b.value
    sigma_den = math.hypot(p1_a_prime.sigma, p2_b.sigma)
    return verdict_from_ratio(num, sigma_num, den, sigma_den)
