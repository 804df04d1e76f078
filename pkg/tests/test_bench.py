import statistics

import numpy as np
import pytest

from wfrechet.bench import checksum, measure
from wfrechet.core import SupportBounds
from wfrechet.datagen import generate_zinbinom_qf
from wfrechet.frechet import fit_frechet


def test_single_rep_median_is_the_sample():
    rep = measure(lambda: 1.0, reps=1)
    assert rep.median == rep.times[0] and rep.reps == 1


def test_noop_times_non_negative():
    rep = measure(lambda: None, reps=7)
    assert len(rep.times) == 7 and min(rep.times) >= 0 and rep.median >= 0


def test_median_permutation_invariant():
    rep = measure(lambda: sum(range(1000)), reps=9)
    shuffled = list(np.random.default_rng(0).permutation(rep.times))
    assert statistics.median(shuffled) == rep.median


def test_warm_up_is_not_timed():
    calls = []
    rep = measure(lambda: calls.append(1), reps=4)
    assert len(calls) == 5 and rep.reps == 4


def test_fit_protocol_fifteen_reps():
    X, Y = generate_zinbinom_qf(100, 100, 10, seed=1)
    rep = measure(lambda: fit_frechet(X, Y, SupportBounds(0)).Qhat, name="fit", parameters={"n": 100})
    assert rep.reps == 15 and len(rep.times) == 15
    assert rep.to_dict()["parameters"] == {"n": 100}


def test_checksum_tracks_inputs():
    a = fit_frechet(*generate_zinbinom_qf(40, 20, 5, seed=1), SupportBounds(0))
    b = fit_frechet(*generate_zinbinom_qf(40, 20, 5, seed=2), SupportBounds(0))
    assert checksum(a) != checksum(b)
    assert checksum(a) == checksum(a)


def test_rejects_bad_reps():
    with pytest.raises(ValueError):
        measure(lambda: None, reps=0)


def test_task_errors_propagate():
    def boom():
        raise RuntimeError("x")

    with pytest.raises(RuntimeError):
        measure(boom)
