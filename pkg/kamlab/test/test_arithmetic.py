import pytest
import warnings
import numpy as np
from unittest.mock import patch
from hypothesis import given, settings as hsettings, strategies as st
from mpmath import mpf

from kamlab.arithmetic.diophantine import (
    is_diophantine_up_to,
    normalize_sign,
    small_divisor_min,
    uniform_exponent_estimate,
)
from kamlab.arithmetic.liouville import (
    build_liouville_pair,
    parse_decimal,
    decimal_string,
    resonance_pick,
    witness_residuals,
    witness_verdict,
)
from kamlab.config import settings
from kamlab.errors import BudgetExhaustedError, ConfigValidationError, ModelValidationError, PrecisionError
from kamlab.schemas.arithmetic import DiophantineParams, LiouvilleSchedule

# Suppress all warnings for this test file
warnings.filterwarnings("ignore")

GOLDEN = (np.sqrt(5.0) - 1.0) / 2.0


@pytest.fixture(scope="module")
def liouville_pair():
    return build_liouville_pair(LiouvilleSchedule(exponents=[6.0, 6.0]))


def test_golden_small_divisor_is_a_fibonacci_pair():
    sd = small_divisor_min([1.0, GOLDEN], 10)
    assert sd.k == [5, -8]
    assert sd.value == pytest.approx(abs(5 - 8 * GOLDEN), rel=1e-12)


def test_golden_uniform_exponent_is_one():
    estimate = uniform_exponent_estimate([1.0, GOLDEN], [10, 100, 1000, 10000])
    assert estimate.gamma == pytest.approx(1.0, abs=0.1)


def test_rational_vector_fails_with_witness():
    verdict = is_diophantine_up_to([1.0, 0.5], DiophantineParams(kappa=0.1, tau=1.5, N_check=20))
    assert not verdict.diophantine
    assert verdict.witness == [1, -2]
    assert verdict.value == 0.0


def test_golden_vector_passes_finite_check():
    verdict = is_diophantine_up_to([1.0, GOLDEN], DiophantineParams(kappa=0.1, tau=1.5, N_check=100))
    assert verdict.diophantine
    assert verdict.witness is None


@given(st.floats(0.1, 10.0))
@hsettings(max_examples=25, deadline=None)
def test_small_divisor_scales_with_the_vector(lam):
    base = small_divisor_min([1.0, GOLDEN], 30)
    scaled = small_divisor_min([lam, lam * GOLDEN], 30)
    assert scaled.value == pytest.approx(lam * base.value, rel=1e-9)


def test_sign_normalization():
    assert normalize_sign([0, -3, 2]) == (0, 3, -2)
    assert normalize_sign([2, -1]) == (2, -1)


def test_enumeration_budget_is_enforced():
    with patch.object(settings, "ENUMERATION_BUDGET", 10):
        with pytest.raises(BudgetExhaustedError):
            small_divisor_min([1.0, GOLDEN, np.sqrt(2.0)], 5)


def test_decimal_parsing_is_exact():
    assert parse_decimal("0.125") == (125, 3)
    assert parse_decimal("1e-3") == (1, 3)
    assert decimal_string(125, 3) == "0.125"
    with pytest.raises(ModelValidationError):
        parse_decimal("1.2.3")


def test_liouville_witnesses_reverify(liouville_pair):
    assert len(liouville_pair.witnesses) == 2
    assert max(witness_residuals(liouville_pair)) <= 1e-15
    for w in liouville_pair.witnesses:
        assert mpf(w.value) < mpf(w.bound)


def test_exponent_must_exceed_dimension_minus_one(liouville_pair):
    with pytest.raises(ConfigValidationError) as exc:
        is_diophantine_up_to([1.0, GOLDEN, np.sqrt(2.0)], DiophantineParams(kappa=0.1, tau=1.5, N_check=5))
    assert exc.value.context["field"] == "tau"
    with pytest.raises(ConfigValidationError):
        witness_verdict(liouville_pair, DiophantineParams(kappa=0.5, tau=1.0))
    verdict = is_diophantine_up_to([1.0, GOLDEN, np.sqrt(2.0)], DiophantineParams(kappa=1e-3, tau=2.5, N_check=5))
    assert verdict.N_check == 5


def test_liouville_pair_follows_its_anchor():
    vector = build_liouville_pair(LiouvilleSchedule(exponents=[3.0], anchor=repr(GOLDEN), start_digits=2))
    assert abs(vector.omega[1] / vector.omega[0] - GOLDEN) < 1e-2


def test_liouville_pair_is_not_diophantine(liouville_pair):
    verdict = witness_verdict(liouville_pair, DiophantineParams(kappa=0.5, tau=1.5))
    assert not verdict.diophantine
    assert verdict.witness == liouville_pair.witnesses[0].k


def test_scaling_keeps_witnesses_exact(liouville_pair):
    scaled = liouville_pair.scaled("2")
    assert scaled.omega == pytest.approx([2 * w for w in liouville_pair.omega])
    assert max(witness_residuals(scaled)) <= 1e-15
    assert mpf(scaled.witnesses[1].value) == 2 * mpf(liouville_pair.witnesses[1].value)


def test_super_variant_hits_the_precision_ceiling():
    single = build_liouville_pair(LiouvilleSchedule(variant="super", depth=1))
    assert mpf(single.witnesses[0].value) < mpf(single.witnesses[0].bound)
    with pytest.raises(PrecisionError):
        build_liouville_pair(LiouvilleSchedule(variant="super", depth=2))


def test_resonance_pick_uses_a_stored_witness(liouville_pair):
    pick = resonance_pick(liouville_pair, A=10.0, delta=1.0, s=2, eta=1e-4)
    assert pick.source == "witness"
    assert min(abs(x) for x in pick.k) > 11
    assert mpf(pick.value) < mpf(pick.bound)
