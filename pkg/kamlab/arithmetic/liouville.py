"""
Liouville Construction
Lacunary decimal frequency pairs carrying exact near-resonance witnesses
"""
import logging
from typing import List, Sequence, Tuple, Union

import numpy as np
from mpmath import mp, mpf

from kamlab.arithmetic.diophantine import require_exponent
from kamlab.config import settings
from kamlab.errors import BudgetExhaustedError, ModelValidationError, PrecisionError, ResonanceNotFoundError
from kamlab.schemas.arithmetic import (
    DiophantineParams,
    DiophantineVerdict,
    FrequencyVector,
    LiouvilleSchedule,
    ResonancePick,
    Witness,
)

logger = logging.getLogger(__name__)

GUARD_DIGITS = 30
TAIL_FACTOR = mpf("1.12")  # sum_{i>j} 10^-m_i <= 1.12 * 10^-m_{j+1} for increasing m


def parse_decimal(text: Union[str, float, int]) -> Tuple[int, int]:
    """Exact (integer, scale) with value = integer / 10**scale, scale >= 0."""
    if not isinstance(text, str):
        text = repr(float(text)) if isinstance(text, float) else str(int(text))
    raw = text.strip().lower()
    if not raw:
        raise ModelValidationError("empty decimal literal")
    mantissa, _, exponent = raw.partition("e")
    sign = -1 if mantissa.startswith("-") else 1
    mantissa = mantissa.lstrip("+-")
    whole, _, frac = mantissa.partition(".")
    digits = (whole or "0") + frac
    if not digits.isdigit():
        raise ModelValidationError(f"not a decimal literal: {text!r}")
    scale = len(frac) - (int(exponent) if exponent else 0)
    value = sign * int(digits)
    if scale < 0:
        return value * 10 ** (-scale), 0
    return value, scale


def decimal_string(value: int, scale: int) -> str:
    sign = "-" if value < 0 else ""
    digits = str(abs(value)).rjust(scale + 1, "0")
    if scale == 0:
        return sign + digits
    return f"{sign}{digits[:-scale]}.{digits[-scale:]}"


def _exact_value(value: int, scale: int) -> str:
    return f"{value}e-{scale}" if scale else str(value)


def _log10_int(x: int) -> mpf:
    return mp.log10(mpf(abs(x))) if x else mpf("-inf")


def _witness_bound(k: Sequence[int], schedule: LiouvilleSchedule, j: int) -> mpf:
    size = max(abs(x) for x in k)
    if schedule.variant == "super":
        return mp.exp(-sum(abs(x) for x in k))
    return mpf(size) ** (-schedule.exponents[j])


def _log10_bound(k: Sequence[int], schedule: LiouvilleSchedule, j: int) -> mpf:
    if schedule.variant == "super":
        return -mpf(sum(abs(x) for x in k)) / mp.log(10)
    return -schedule.exponents[j] * _log10_int(max(abs(x) for x in k))


def build_liouville_pair(schedule: LiouvilleSchedule) -> FrequencyVector:
    """(F1, F1 * alpha) with alpha = a0 + sum_j 10^-m_j and gaps grown until each witness bound holds.

    Witness j is k = (P_j, -10^m_j) where P_j / 10^m_j truncates alpha after its j-th digit
    block; |<k, F>| = F1 * 10^m_j * sum_{i>j} 10^-m_i exactly.
    """
    count = schedule.depth or len(schedule.exponents)
    if schedule.variant == "liouville" and count > len(schedule.exponents):
        raise ModelValidationError("Liouville schedule needs one exponent per witness")
    if count < 1:
        raise ModelValidationError("at least one witness is required")
    base, base_scale = parse_decimal(schedule.base)
    if base <= 0:
        raise ModelValidationError("the first frequency must be positive")

    with mp.workdps(max(50, schedule.start_digits + len(schedule.base) + 30)):
        f1 = mpf(base) / mpf(10) ** base_scale
        target = mpf(0) if schedule.anchor is None else mpf(schedule.anchor) / f1
        m = [schedule.start_digits]
        head = int(mp.floor(target * mpf(10) ** (m[0] - 1)))
        numerators = [head * 10 + 1]
        log_f1 = mp.log10(f1 * TAIL_FACTOR)
        for j in range(count):
            k = (numerators[j], -10 ** m[j])
            needed = log_f1 + m[j] - _log10_bound(k, schedule, j)
            m_next = max(int(mp.floor(needed)) + 1, m[j] + 1)
            if m_next + base_scale > settings.MAX_DPS:
                logger.error(f"Liouville witness {j} needs {m_next} digits")
                raise PrecisionError(
                    f"witness {j + 1} requires {m_next + base_scale} decimal digits, above MAX_DPS={settings.MAX_DPS}",
                    {"digits": m_next + base_scale, "witness": j + 1})
            numerators.append(numerators[j] * 10 ** (m_next - m[j]) + 1)
            m.append(m_next)

    alpha_scale = m[-1]
    f2_num = base * numerators[-1]
    f2_scale = base_scale + alpha_scale
    dps = f2_scale + GUARD_DIGITS
    exact = [decimal_string(base, base_scale), decimal_string(f2_num, f2_scale)]

    witnesses: List[Witness] = []
    with mp.workdps(dps):
        for j in range(count):
            p, q = numerators[j], 10 ** m[j]
            # |p*F1 - q*F2| over the common scale f2_scale
            num = abs(p * base * 10 ** alpha_scale - q * f2_num)
            bound = _witness_bound((p, q), schedule, j)
            witnesses.append(Witness(k=[p, -q], value=_exact_value(num, f2_scale), bound=mp.nstr(bound, 20)))
        omega = [float(mpf(exact[0])), float(mpf(exact[1]))]
    logger.info(f"built {schedule.variant} pair with digit blocks {m}")
    return FrequencyVector(omega=omega, exact=exact, dps=dps, witnesses=witnesses)


def _vector_components(vector: FrequencyVector) -> List[mpf]:
    if vector.exact is not None:
        return [mpf(x) for x in vector.exact]
    return [mpf(x) for x in vector.omega]


def pairing(vector: FrequencyVector, k: Sequence[int]) -> mpf:
    """|<k, omega>| in extended precision."""
    with mp.workdps(vector.dps):
        comps = _vector_components(vector)
        return abs(mp.fsum(int(ki) * wi for ki, wi in zip(k, comps)))


def witness_residuals(vector: FrequencyVector) -> List[float]:
    """Absolute deviation between each stored witness value and its re-evaluation."""
    out = []
    with mp.workdps(vector.dps):
        for w in vector.witnesses:
            out.append(float(abs(pairing(vector, w.k) - mpf(w.value))))
    return out


def witness_verdict(vector: FrequencyVector, params: DiophantineParams) -> DiophantineVerdict:
    """Diophantine check restricted to the stored witnesses, at their own scale."""
    require_exponent(params, len(vector.omega))
    with mp.workdps(vector.dps):
        for w in sorted(vector.witnesses, key=lambda w: max(abs(x) for x in w.k)):
            size = max(abs(x) for x in w.k)
            value = pairing(vector, w.k)
            bound = mpf(params.kappa) / mpf(size) ** params.tau
            if value < bound:
                return DiophantineVerdict(diophantine=False, N_check=size, witness=list(w.k),
                                          value=float(value), bound=float(bound))
    scale = max((max(abs(x) for x in w.k) for w in vector.witnesses), default=params.N_check)
    return DiophantineVerdict(diophantine=True, N_check=scale)


def scale_frequency_vector(vector: FrequencyVector, lam: Union[str, float]) -> FrequencyVector:
    """(lam F1, ..., lam Fd) keeping the witnesses; values and bounds pick up |lam|."""
    lam_num, lam_scale = parse_decimal(lam)
    if lam_num == 0:
        raise ModelValidationError("scaling factor must be nonzero")
    exact = None
    if vector.exact is not None:
        exact = []
        for text in vector.exact:
            num, scale = parse_decimal(text)
            exact.append(decimal_string(num * lam_num, scale + lam_scale))
    dps = vector.dps + lam_scale
    witnesses = []
    with mp.workdps(dps):
        lam_mp = mpf(lam_num) / mpf(10) ** lam_scale
        for w in vector.witnesses:
            num, scale = parse_decimal(w.value)
            bound = None if w.bound is None else mp.nstr(mpf(w.bound) * abs(lam_mp), 20)
            witnesses.append(Witness(k=list(w.k), value=_exact_value(num * abs(lam_num), scale + lam_scale),
                                     bound=bound))
        omega = [float(mpf(x)) for x in exact] if exact else [float(x * lam_mp) for x in vector.omega]
    return FrequencyVector(omega=omega, exact=exact, dps=dps, witnesses=witnesses)


def resonance_pick(vector: FrequencyVector, A: float, delta: float, s: float, eta: float,
                   enumeration_limit: int = 100000) -> ResonancePick:
    """A pair (q1, q2) with |q_i| > A + delta and |q1 F1 + q2 F2| < eta * min(|q1|^-2s, |q2|^-2s)."""
    if len(vector.omega) != 2:
        raise ModelValidationError("resonance_pick works on frequency pairs")
    if enumeration_limit > settings.ENUMERATION_BUDGET:
        raise BudgetExhaustedError(f"enumeration limit {enumeration_limit} exceeds the budget")
    threshold = A + delta

    def bound_for(k) -> mpf:
        return mpf(eta) * mpf(max(abs(x) for x in k)) ** (-2 * s)

    with mp.workdps(vector.dps):
        for w in sorted(vector.witnesses, key=lambda w: max(abs(x) for x in w.k)):
            if min(abs(x) for x in w.k) <= threshold:
                continue
            value = pairing(vector, w.k)
            bound = bound_for(w.k)
            if value < bound:
                logger.info(f"resonance pick from stored witness {w.k}")
                return ResonancePick(k=list(w.k), value=mp.nstr(value, 20), bound=mp.nstr(bound, 20),
                                     source="witness")

        f1, f2 = vector.omega
        start = int(np.floor(threshold)) + 1
        q2 = np.arange(start, max(start, enumeration_limit) + 1, dtype=np.int64)
        q1 = -np.rint(q2 * f2 / f1).astype(np.int64)
        keep = np.abs(q1) > threshold
        size = np.maximum(np.abs(q1), q2).astype(float)
        values = np.abs(q1 * f1 + q2 * f2)
        slack = 1e-15 * q2 * (abs(f1) + abs(f2))
        hits = np.flatnonzero(keep & (values < eta * size ** (-2 * s) + slack))
        for idx in hits:
            k = [int(q1[idx]), int(q2[idx])]
            value = pairing(vector, k)
            bound = bound_for(k)
            if value < bound:
                logger.info(f"resonance pick by enumeration {k}")
                return ResonancePick(k=k, value=mp.nstr(value, 20), bound=mp.nstr(bound, 20), source="enumeration")

    logger.error(f"no resonant pair beyond {threshold} up to {enumeration_limit}")
    raise ResonanceNotFoundError(
        f"no pair with |q_i| > {threshold} meets the bound within the witnesses and {enumeration_limit} enumerated rows",
        {"A": A, "delta": delta, "s": s, "eta": eta})
