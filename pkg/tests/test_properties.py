"""Property suites: data processing, convexity, faithfulness, monotonicity."""

import pytest

from property_checks import (
    check_convexity,
    check_data_processing,
    check_faithfulness,
    check_monotonicity,
    monotonicity_families,
)


def test_data_processing_inequalities():
    assert check_data_processing(instances=25, seed=0) >= 25


def test_convexity_of_measures():
    assert check_convexity(instances=25, seed=1) >= 25


def test_faithfulness_of_measures():
    assert check_faithfulness(instances=25, seed=2) >= 25


@pytest.mark.parametrize(
    "fam,builder", monotonicity_families(),
    ids=lambda v: v.describe() if hasattr(v, "describe") else "",
)
def test_monotonicity_under_free_channels(fam, builder):
    # 10 verified free-preserving channels x 3 states per family
    assert check_monotonicity(fam, builder, channels=10, states=3, seed=3) == 30
