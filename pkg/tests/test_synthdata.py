from __future__ import annotations

import json

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from oracles import effective_resistance

from bgsl.graph import count_components, laplacian, laplacian_pinv
from bgsl.synthdata import (Dataset, DegenerateInputError, EnsembleSpec, PreconditionError,
                            analytic_distance, distance_from_signals, empirical_distance,
                            gen_graph, load_signal_csv, make_dataset, sample_smooth_signals)


def connected_graph(seed, n=10):
    return gen_graph(EnsembleSpec("RG", 0.5, n), np.random.default_rng(seed), connected=True)


def test_er_full_is_complete():
    a = gen_graph(EnsembleSpec("ER", 1.0, 5), np.random.default_rng(0))
    assert a.sum() == 10


def test_ba_is_tree():
    a = gen_graph(EnsembleSpec("BA", 1, 30), np.random.default_rng(0))
    assert a.sum() == 29 and count_components(a) == 1


def test_er_density_concentrates():
    rng = np.random.default_rng(5)
    spec = EnsembleSpec("ER", 0.25, 100)
    dens = np.array([gen_graph(spec, rng).mean() for _ in range(200)])
    k = 4950 * 200
    assert abs(dens.mean() - 0.25) <= 3 * np.sqrt(0.25 * 0.75 / k)


def test_rg_respects_radius():
    a = gen_graph(EnsembleSpec("RG", 1e-9, 8), np.random.default_rng(0))
    assert a.sum() == 0


@pytest.mark.parametrize("kind,param,n", [("RG", 0.0, 5), ("ER", 1.5, 5), ("BA", 5, 5),
                                          ("BA", 1.5, 5), ("XX", 1, 5), ("ER", 0.5, 1)])
def test_invalid_specs(kind, param, n):
    with pytest.raises(ValueError):
        EnsembleSpec(kind, param, n)


def test_spec_parse():
    s = EnsembleSpec.parse("rg:1/3", 20)
    assert s.kind == "RG" and s.param == pytest.approx(1 / 3) and s.n == 20


def test_signal_covariance_matches_pinv():
    a = connected_graph(1)
    X = sample_smooth_signals(a, 100_000, np.random.default_rng(2))
    C = X @ X.T / X.shape[1]
    Lp = laplacian_pinv(a)
    assert np.linalg.norm(C - Lp) / np.linalg.norm(Lp) <= 0.05


def test_signals_orthogonal_to_constant():
    X = sample_smooth_signals(connected_graph(3), 50, np.random.default_rng(4))
    assert np.all(np.abs(X.sum(axis=0)) <= 1e-8 * np.linalg.norm(X, axis=0))


def test_spectral_power_matches_inverse_eigenvalues():
    a = connected_graph(6)
    w, U = np.linalg.eigh(laplacian(a))
    P = 100_000
    X = sample_smooth_signals(a, P, np.random.default_rng(7))
    power = ((U.T @ X) ** 2).mean(axis=1)
    expected = 1.0 / w[1:]
    # chi-square(1) power: relative standard error sqrt(2 / P)
    assert np.all(np.abs(power[1:] / expected - 1) <= 5 * np.sqrt(2 / P))
    assert power[0] < 1e-12 * power[1:].min()


def test_disconnected_graph_preconditions():
    a = np.zeros(6)
    with pytest.raises(PreconditionError):
        sample_smooth_signals(a, 3, np.random.default_rng(0))
    with pytest.raises(PreconditionError):
        analytic_distance(a)


def test_analytic_distance_examples():
    assert analytic_distance(np.array([1.0])) == pytest.approx([1.0])
    tri = analytic_distance(np.ones(3))
    assert np.allclose(tri, tri[0])


@settings(max_examples=25)
@given(st.integers(2, 14), st.integers(0, 2**31 - 1))
def test_analytic_distance_is_effective_resistance(n, seed):
    a = gen_graph(EnsembleSpec("ER", 0.5, n), np.random.default_rng(seed), connected=True)
    assert np.allclose(analytic_distance(a), effective_resistance(a, n), rtol=0, atol=1e-10)


def test_empirical_distance_examples():
    X = np.array([[1.0, 2.0], [1.0, 2.0], [0.0, 0.0]])
    assert empirical_distance(X)[0] == 0.0
    x = np.array([1.0, 4.0, 6.0])
    assert np.allclose(empirical_distance(x[:, None]), [9.0, 25.0, 4.0])
    assert np.allclose(empirical_distance(np.c_[x, x], normalize=False), [18.0, 50.0, 8.0])


def test_normalized_empirical_distance_converges():
    a = connected_graph(8)
    X = sample_smooth_signals(a, 100_000, np.random.default_rng(9))
    e_hat, e = empirical_distance(X), analytic_distance(a)
    assert np.linalg.norm(e_hat - e) / np.linalg.norm(e) <= 0.05


def test_correlation_distance():
    x = np.random.default_rng(0).standard_normal(20)
    X = np.vstack([x, 2 * x + 1, -x])
    assert np.allclose(distance_from_signals(X, "one_minus_abs_corr"), 0, atol=1e-12)
    with pytest.raises(DegenerateInputError):
        distance_from_signals(np.vstack([x, np.ones(20)]), "one_minus_abs_corr")


def test_log_euclidean_distance():
    X = np.random.default_rng(1).standard_normal((6, 30))
    assert np.allclose(distance_from_signals(X, "log_euclidean"),
                       np.log(np.sqrt(distance_from_signals(X, "euclidean"))), atol=1e-12)
    with pytest.raises(DegenerateInputError):
        distance_from_signals(np.vstack([X[0], X[0], X[1]]), "log_euclidean")
    with pytest.raises(ValueError):
        distance_from_signals(X, "cosine")


def test_make_dataset_empty():
    ds = make_dataset(EnsembleSpec("RG", 1 / 3, 6), 0, np.random.default_rng(0))
    assert ds.T == 0 and ds.e.shape == (0, 15)


def test_make_dataset_deterministic(tmp_path):
    spec = EnsembleSpec("RG", 1 / 3, 10)
    p1, p2 = tmp_path / "a.json", tmp_path / "b.json"
    make_dataset(spec, 4, np.random.default_rng(3)).save(p1)
    make_dataset(spec, 4, np.random.default_rng(3)).save(p2)
    assert p1.read_bytes() == p2.read_bytes()


def test_rg_label_density_band():
    ds = make_dataset(EnsembleSpec("RG", 1 / 3, 20), 50, np.random.default_rng(0))
    assert 0.25 <= ds.a.mean() <= 0.35


def test_empirical_dataset_is_noisy_version():
    spec = EnsembleSpec("RG", 1 / 3, 12)
    ds = make_dataset(spec, 2, np.random.default_rng(1), n_signals=10)
    assert ds.e.shape == (2, 66) and np.all(ds.e >= 0)


def test_dataset_json_round_trip(tmp_path):
    ds = make_dataset(EnsembleSpec("ER", 0.5, 7), 3, np.random.default_rng(2))
    obj = ds.to_json()
    assert obj["ordering"] == "upper-row-major" and obj["T"] == 3
    path = tmp_path / "d.json"
    ds.save(path)
    back = Dataset.load(path)
    assert np.array_equal(back.e, ds.e) and np.array_equal(back.a, ds.a)
    json.loads(path.read_text())


def test_dataset_validation_and_io_errors(tmp_path):
    with pytest.raises(ValueError):
        Dataset(3, np.ones((1, 3)), np.full((1, 3), 0.5))
    with pytest.raises(ValueError):
        Dataset(3, -np.ones((1, 3)), np.ones((1, 3)))
    missing = tmp_path / "nope" / "d.json"
    with pytest.raises(OSError, match="nope"):
        Dataset.load(missing)
    with pytest.raises(OSError, match="nope"):
        Dataset(3, np.ones((1, 3)), np.ones((1, 3))).save(missing)


def test_subset_and_concat():
    ds = make_dataset(EnsembleSpec("ER", 0.5, 5), 4, np.random.default_rng(0))
    both = ds.subset([0, 1]).concat(ds.subset([2, 3]))
    assert np.array_equal(both.e, ds.e)


def test_load_signal_csv(tmp_path):
    X = np.arange(12.0).reshape(3, 4)
    path = tmp_path / "x.csv"
    np.savetxt(path, X, delimiter=",")
    assert np.array_equal(load_signal_csv(path), X)
