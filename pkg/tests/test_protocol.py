"""Conversion protocol: construction, decomposition identity, rates, RNG level."""

import numpy as np
import pytest

from rescomp.channels import apply_channel
from rescomp.core import (
    DensityMatrix,
    SubsystemShape,
    basis_state,
    maximally_coherent_state,
    maximally_mixed_state,
    random_density_matrix,
    tensor_power,
    trace_distance,
)
from rescomp.errors import DimensionCap, TargetIsFree
from rescomp.freesets import IncoherentFamily
from rescomp.protocol import (
    build_protocol,
    default_type1_schedule,
    eps_rng_level,
    rate_experiment,
    regularized_pair,
)

INC2 = IncoherentFamily(SubsystemShape((2,)))
INC4 = IncoherentFamily(SubsystemShape((4,)))


def test_type1_schedule_decays():
    vals = [default_type1_schedule(n) for n in range(1, 6)]
    assert all(0 < v <= 0.5 for v in vals)
    assert all(b < a for a, b in zip(vals, vals[1:]))


def test_regularized_pair_coherence():
    e4, e2 = regularized_pair(maximally_coherent_state(4), maximally_coherent_state(2), INC4)
    assert e4 == pytest.approx(2.0, abs=1e-4)
    assert e2 == pytest.approx(1.0, abs=1e-4)


def test_build_protocol_decomposition_identity():
    spec = build_protocol(
        maximally_coherent_state(4), maximally_coherent_state(2), INC4, 1
    )
    assert spec.m == 2
    # Lambda(X) = tr(A X) sigma_n + tr((I-A) X) pi_n for arbitrary X
    rng = np.random.default_rng(3)
    for seed in rng.integers(1 << 30, size=4):
        x = random_density_matrix((4,), seed=int(seed))
        p = float(np.real(np.trace(spec.test.matrix @ x.matrix)))
        expect = p * spec.sigma_n.matrix + (1 - p) * spec.pi_n.matrix
        np.testing.assert_allclose(
            apply_channel(spec.channel, x).matrix, expect, atol=1e-12
        )
    # the noise state certifies sigma_n's robustness
    mix = (spec.sigma_n.matrix + spec.r_sigma_n * spec.pi_n.matrix) / (1 + spec.r_sigma_n)
    fam_m = INC2.n_copy(spec.m)
    assert fam_m.contains(DensityMatrix(fam_m.shape, mix), tol=1e-5).is_member


def test_target_is_free_raises():
    with pytest.raises(TargetIsFree):
        build_protocol(
            maximally_coherent_state(2), maximally_mixed_state((2,)), INC2, 1
        )


def test_dimension_cap_raises():
    with pytest.raises(DimensionCap):
        build_protocol(
            maximally_coherent_state(4), maximally_coherent_state(2), INC4, 6
        )


def test_eps_rng_level_free_preserving_channel():
    # replacing with a free state is exactly RNG: level 0
    from rescomp.channels import replace_channel

    ch = replace_channel(SubsystemShape((2,)), basis_state((2,), 0))
    assert eps_rng_level(ch, INC2, INC2) == pytest.approx(0.0, abs=1e-8)


def test_self_conversion_rate_one():
    report = rate_experiment(
        maximally_coherent_state(2), maximally_coherent_state(2), INC2, 2
    )
    for entry in report.entries:
        n, m = entry[0], entry[1]
        assert m == n
    assert report.e_inf_source == pytest.approx(report.e_inf_target, abs=1e-6)


def test_rate_experiment_output_quality():
    report = rate_experiment(
        maximally_coherent_state(4), maximally_coherent_state(2), INC4, 2
    )
    for n, m, eps_n, beta, dist, rng_level, predicted, achieved in report.entries:
        assert achieved == pytest.approx(2.0, abs=1e-12)
        assert predicted == pytest.approx(2.0, abs=1e-3)
        # output error is governed by the type-1 budget
        assert dist <= eps_n + 1e-6
        assert 0.0 <= rng_level <= 0.5
    obj = report.to_obj()
    assert obj["predicted_rate"] == pytest.approx(2.0, abs=1e-3)
    assert len(obj["entries"]) == 2
