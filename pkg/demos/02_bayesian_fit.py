"""Fitting the three-parameter Bayesian model and reading its uncertainty.

Training pairs (distances, true graph) come from the RG_{1/3} ensemble.  HMC
samples (theta, delta, b) of the unrolled solver; the posterior predictive
then gives every test edge a mean and a standard deviation, and we check
that the standard deviation tracks the actual error.

The defaults mirror the full experiment and take a few minutes; ``--quick``
shrinks everything for a fast look.
"""
from __future__ import annotations

import argparse

import numpy as np

from bgsl.bayes import HmcConfig, altered_prior, fit_posterior, map_estimate
from bgsl.predict import evaluate
from bgsl.synthdata import EnsembleSpec, make_dataset
from bgsl.unroll import UnrollConfig


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--quick", action="store_true", help="small data, short chains, shallow unrolling")
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()

    n_train, n_test = (10, 20) if args.quick else (50, 100)
    hmc = HmcConfig(n_chains=2, n_warmup=150, n_samples=200, seed=args.seed) if args.quick \
        else HmcConfig(seed=args.seed)
    depth = UnrollConfig(depth=50 if args.quick else 200)

    rng = np.random.default_rng(args.seed)
    spec = EnsembleSpec("RG", 1 / 3, 20)
    train, test = make_dataset(spec, n_train, rng), make_dataset(spec, n_test, rng)

    point = map_estimate(train, altered_prior(), unroll_cfg=depth)
    print("MAP estimate  theta={:.3f} delta={:.1f} b={:.2f}".format(*point.params))

    samples = fit_posterior(train, altered_prior(), hmc, depth)
    print(f"sampled {len(samples)} draws in {samples.elapsed:.0f}s")
    for name, d in samples.diagnostics().items():
        q = np.quantile(samples.draws[:, samples.names.index(name)], [0.05, 0.5, 0.95])
        print(f"  {name:5s} median {q[1]:8.3f}  90% [{q[0]:.3f}, {q[2]:.3f}]  "
              f"R-hat {d['rhat']:.3f}  ESS {d['ess']:.0f}")

    report = evaluate(test, samples, depth, np.random.default_rng(1))
    s = report.summary()
    print(f"\ntest NLL {s['nll_mean']:.2f}  Brier {s['brier_mean']:.4f}  "
          f"error {s['error_mean']:.2f}%  ECE {s['ece']:.4f}")
    print(f"error vs predictive stdv: r = {s['correlation']['overall']:.2f}")

    # edges the model is least sure about, on the first test graph
    worst = np.argsort(report.pred_stdv[0])[::-1][:5]
    print("\nmost uncertain edges of test graph 0 (mean, stdv, label):")
    for k in worst:
        print(f"  edge {k:3d}: {report.pred_mean[0, k]:.2f}  {report.pred_stdv[0, k]:.2f}  "
              f"{int(test.a[0, k])}")


if __name__ == "__main__":
    main()
