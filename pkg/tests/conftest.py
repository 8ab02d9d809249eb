"""Shared fixtures: ground-truth laws and synthetic oracle datasets.

Two Larson-Miller intercept values circulate in the literature for this
material family (22205 with slope -12, and 26000 with slope -9.3); both are
kept as named fixtures and neither is treated as canonical.
"""

import numpy as np
import pytest

from creep_uq import CreepModelKind, PolynomialLaw, synthesize_dataset

LM_AFFINE_LAW = PolynomialLaw([22205.0, -12.0])
LM_ALT_MEAN = (26000.0, -9.3)  # alternative published intercept/slope pair
LM_CONSTANT = 23.0

OSD_QUADRATIC_LAW = PolynomialLaw([-26.3, -0.002, -3e-5])
OSD_CONSTANT = 21000.0

MS_QUADRATIC_LAW = PolynomialLaw([24.8, -0.011, -2e-5])
MS_CONSTANT = 0.0289

TRUTHS = {
    CreepModelKind.LARSON_MILLER: (LM_AFFINE_LAW, LM_CONSTANT),
    CreepModelKind.ORR_SHERBY_DORN: (OSD_QUADRATIC_LAW, OSD_CONSTANT),
    CreepModelKind.MANSON_SUCCOP: (MS_QUADRATIC_LAW, MS_CONSTANT),
}

# stress/temperature grid bracketing the four study conditions
GRID_CONDITIONS = tuple(
    (s, t) for s in (47.0, 90.0, 137.0, 200.0, 260.0, 333.0)
    for t in (823.15, 873.15, 923.15)
)


def make_oracle(kind, noise_sd=0.0, seed=0, repeats=1, conditions=GRID_CONDITIONS):
    law, constant = TRUTHS[CreepModelKind.coerce(kind)]
    return synthesize_dataset(law, constant, kind, list(conditions) * repeats,
                              noise_sd=noise_sd, seed=seed)


@pytest.fixture(scope="session")
def lm_noiseless():
    return make_oracle("larson_miller")


@pytest.fixture(scope="session")
def lm_noisy():
    return make_oracle("larson_miller", noise_sd=0.05, seed=11, repeats=3)


@pytest.fixture(scope="session")
def osd_noiseless():
    return make_oracle("orr_sherby_dorn")


@pytest.fixture(scope="session")
def ms_noiseless():
    return make_oracle("manson_succop")


@pytest.fixture
def rng():
    return np.random.default_rng(20240817)
