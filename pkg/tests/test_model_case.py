import math

import numpy as np
import pytest
from pydantic import ValidationError

from mtkit.config import constants
from mtkit.exceptions import InvalidArgumentError, ResourceGuardError
from mtkit.models.probe import SparseSeq
from mtkit.services.model_case import dilation_deviation, model_T, model_dilate, random_sparse


def test_model_form_of_two_points():
    alpha = SparseSeq(support=[0, 3], values=[1.0, 2.0])
    expected = -2.0 * math.sin(math.log(3.0) / (2 * math.pi)) / 3.0
    assert model_T(alpha) == pytest.approx(expected)
    assert model_T(SparseSeq(support=[5], values=[1.0])) == 0.0


def test_model_form_is_blockwise_invariant(rng):
    alpha = random_sparse(rng, 300, 3)
    assert model_T(alpha, block=7) == pytest.approx(model_T(alpha), rel=1e-9)


def test_sparse_seq_validation():
    with pytest.raises(ValidationError):
        SparseSeq(support=[0, 2, 2], values=[1, 1, 1])
    with pytest.raises(ValidationError):
        SparseSeq(support=[-1, 2], values=[1, 1])
    with pytest.raises(ValidationError):
        SparseSeq(support=[0, 2], values=[1])


def test_model_form_guard():
    alpha = SparseSeq(support=np.arange(8193), values=np.ones(8193))
    with pytest.raises(ResourceGuardError):
        model_T(alpha)


def test_dilation_floors_support():
    beta = model_dilate(SparseSeq(support=[0, 1, 2], values=[1, 2, 3]), 2.5)
    assert beta.support.tolist() == [0.0, 2.0, 5.0]
    assert beta.values.tolist() == [1.0, 2.0, 3.0]
    with pytest.raises(InvalidArgumentError):
        model_dilate(beta, 0.5)
    with pytest.raises(InvalidArgumentError):
        model_dilate(SparseSeq(support=[0, 1e9], values=[1, 1]), constants.LITERAL_DILATION)


def test_literal_dilation_flips_and_scales_the_form(rng):
    support = np.concatenate([[0], np.cumsum(rng.integers(16, 32, size=63))])
    alpha = SparseSeq(support=support, values=np.ones(64))
    report = dilation_deviation(alpha, constants.LITERAL_DILATION)
    assert report["T_alpha"] < 0.0
    assert report["T_beta"] > 0.0
    assert report["deviation"] < 1e-7


def test_random_sparse(rng):
    alpha = random_sparse(rng, 50, 4)
    gaps = np.diff(alpha.support)
    assert alpha.size == 50
    assert alpha.support[0] == 0
    assert gaps.min() >= 4 and gaps.max() < 8
    with pytest.raises(InvalidArgumentError):
        random_sparse(rng, 0, 4)


def test_literal_dilation_on_random_sequence(rng):
    alpha = random_sparse(rng, 512, 16)
    assert np.diff(alpha.support).min() >= 16
    report = dilation_deviation(alpha, constants.LITERAL_DILATION)
    assert report["deviation"] <= 0.1
