from __future__ import annotations

import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from bgsl.scaling import (SCALE_COLUMNS, ScaleAnchor, fit_trend, scale_alpha, scale_beta,
                          scale_delta, scale_table, scale_theta, write_scale_csv)

ANCHOR = ScaleAnchor(20, 1.0, 3.0, 0.7, 0.2)


def test_identity_at_anchor_size():
    assert scale_theta(ANCHOR, 20) == 1.0
    assert scale_delta(ANCHOR, 20) == 3.0
    assert scale_alpha(ANCHOR, 20) == 0.7
    assert scale_beta(ANCHOR, 20) == 0.2


def test_n77_example():
    assert scale_theta(ANCHOR, 77) == pytest.approx(0.5, rel=1e-15)
    assert scale_delta(ANCHOR, 77) == pytest.approx(6.0, rel=1e-15)
    assert scale_alpha(ANCHOR, 77) == pytest.approx(0.7 * 4, rel=1e-15)


@given(st.integers(2, 10_000), st.integers(2, 500), st.floats(1e-3, 1e3), st.floats(1e-3, 1e3))
def test_product_invariance(n, n_i, th, de):
    a = ScaleAnchor(n_i, th, de, 1.0, 1.0)
    assert scale_theta(a, n) * scale_delta(a, n) == pytest.approx(th * de, rel=1e-12)


@given(st.integers(2, 5000), st.integers(1, 500))
def test_monotone_in_size(n, step):
    assert scale_theta(ANCHOR, n + step) < scale_theta(ANCHOR, n)
    assert scale_delta(ANCHOR, n + step) > scale_delta(ANCHOR, n)


def test_invalid_sizes_and_anchors():
    with pytest.raises(ValueError):
        scale_theta(ANCHOR, 1)
    with pytest.raises(ValueError):
        ScaleAnchor(20, 0.0, 1.0, 1.0, 1.0)
    with pytest.raises(ValueError):
        ScaleAnchor(1, 1.0, 1.0, 1.0, 1.0)


def test_from_dpg_consistency():
    a = ScaleAnchor.from_dpg(20, 0.5, 4.0)
    assert a.alpha_i == pytest.approx(8.0) and a.beta_i == pytest.approx(0.5)
    # the alpha/beta law is the theta/delta law written in the other parameterization
    for n in (50, 200):
        th, de = scale_theta(a, n), scale_delta(a, n)
        assert de / th == pytest.approx(scale_alpha(a, n), rel=1e-12)
        assert 1 / (th * de) == pytest.approx(scale_beta(a, n), rel=1e-12)


def test_table_and_csv(tmp_path):
    rows = scale_table(ANCHOR, [20, 77])
    path = tmp_path / "s.csv"
    write_scale_csv(rows, path)
    lines = path.read_text().splitlines()
    assert lines[0] == ",".join(SCALE_COLUMNS) and len(lines) == 3


@pytest.mark.parametrize("form,truth", [
    ("log", lambda n: 1.0 + 2.0 * np.log(n)),
    ("linear", lambda n: 3.0 - 0.01 * n),
    ("power", lambda n: 5.0 * n ** -0.5),
])
def test_trend_fits_recover_exact_curves(form, truth):
    ns = np.array([20, 50, 100, 200, 500], dtype=float)
    fit = fit_trend(ns, truth(ns), form)
    assert fit.rss < 1e-12
    assert fit(1000) == pytest.approx(truth(1000.0), rel=1e-6)


def test_trend_rejects_bad_input():
    with pytest.raises(ValueError):
        fit_trend([1.0], [1.0])
    with pytest.raises(ValueError):
        fit_trend([1.0, 2.0], [1.0, 2.0], "cubic")


def test_sqrt_law_matches_closed_form():
    assert scale_theta(ANCHOR, 200) == pytest.approx(math.sqrt(19 / 199))
