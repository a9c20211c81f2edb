from __future__ import annotations

import json

import numpy as np
import pytest

from bgsl.bayes import PriorSpec
from bgsl.bayes.priors import LogNormal10
from bgsl.checks import (CheckReport, HIST_BINS, posterior_predictive_check,
                         prior_predictive_check, replicate_densities)
from bgsl.synthdata import EnsembleSpec, make_dataset
from bgsl.unroll import UnrollConfig, forward

SMALL = UnrollConfig(depth=50)


@pytest.fixture(scope="module")
def data():
    return make_dataset(EnsembleSpec("RG", 1 / 3, 12), 5, np.random.default_rng(8))


def test_coin_flip_prior_gives_binomial_spread(data):
    tiny = LogNormal10(-12.0, 1e-6)
    prior = PriorSpec(LogNormal10(0.0, 1e-6), tiny, tiny)
    n_rep = 2000
    rep = prior_predictive_check(prior, data.e, n_rep, SMALL, np.random.default_rng(0))
    n_labels = data.e.size
    sd = 0.5 / np.sqrt(n_labels)
    s = rep.replicated_stats
    assert abs(s.mean() - 0.5) <= 4 * sd / np.sqrt(n_rep)
    assert s.std() == pytest.approx(sd, rel=0.1)
    assert rep.counts.sum() == n_rep and rep.counts.size == HIST_BINS


def test_exact_posterior_reproduces_observed_density(data):
    # a saturating head on a dense forward pass labels every edge 1 or 0 deterministically
    P = np.array([[1e-3, 1e9, 1e-9]] * 50)
    assert all(forward(e, 1e-3, SMALL).min() > 0 for e in data.e)
    full = data.subset(range(data.T))
    full.a[:] = 1.0
    rep = posterior_predictive_check(P, full, SMALL, np.random.default_rng(0))
    assert rep.observed_stat == 1.0
    assert np.all(rep.replicated_stats == 1.0)


def test_reports_are_reproducible(data, tmp_path):
    prior = PriorSpec(LogNormal10(0.0, 0.5), LogNormal10(1.0, 0.5), LogNormal10(0.5, 0.5))
    for d in ("a", "b"):
        prior_predictive_check(prior, data.e, 200, SMALL, np.random.default_rng(3)).save(tmp_path / d)
    for name in ("replicates.csv", "summary.json"):
        assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()
    summary = json.loads((tmp_path / "a" / "summary.json").read_text())
    assert summary["n_rep"] == 200 and "[0.75,1]" in summary["band_fractions"]


def test_statistic_is_exchangeable_over_inputs(data):
    P = np.array([[0.8, 10.0, 3.0]])
    P = np.repeat(P, 300, axis=0)
    a = replicate_densities(data.e, P, SMALL, np.random.default_rng(0))
    b = replicate_densities(data.e[::-1], P, SMALL, np.random.default_rng(1))
    # same distribution: means agree within sampling error
    assert abs(a.mean() - b.mean()) <= 5 * np.sqrt(a.var() / 300 + b.var() / 300) + 1e-12
    assert np.all((a >= 0) & (a <= 1))


def test_band_fraction_closed_interval():
    rep = CheckReport.from_stats([0.75, 1.0, 0.2, 0.5])
    assert rep.band_fraction(0.75, 1.0) == 0.5


def test_empty_inputs_rejected():
    with pytest.raises(ValueError):
        replicate_densities(np.zeros((0, 3)), np.ones((2, 3)))
