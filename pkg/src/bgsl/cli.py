"""Command-line driver: generate data, fit, evaluate, check, sweep and rescale.

Every command resolves its configuration (defaults, then ``--config``, then
flags), writes it to ``<out>/<command>_config.json`` and can be rerun from
that file to reproduce its outputs.
"""
from __future__ import annotations

import argparse
import json
import logging
import sys
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path

import numpy as np

from .bayes import (HmcConfig, MapConfig, PosteriorSamples, PriorSpec, SamplerError, fit_posterior,
                    map_estimate)
from .bayes.priors import PRESETS
from .checks import posterior_predictive_check, prior_predictive_check
from .predict import evaluate
from .scaling import ScaleAnchor, scale_table, write_scale_csv
from .solvers import SolveConfig, theta_sweep, write_sweep_csv
from .synthdata import Dataset, EnsembleSpec, make_dataset
from .unroll import UnrollConfig

log = logging.getLogger("bgsl")

EXIT_OK, EXIT_CONFIG, EXIT_SAMPLER, EXIT_IO = 0, 2, 3, 4


class ConfigError(ValueError):
    pass


@dataclass
class DataConfig:
    ensemble: str = "RG:1/3"
    n: int = 20
    n_train: int = 50
    n_test: int = 100
    # 0 means analytic distances; otherwise the number of smooth signals
    signals: int = 0
    train: str = "train.json"
    test: str = "test.json"


@dataclass
class CheckConfig:
    stage: str = "prior"
    n_rep: int = 10_000
    n_inputs: int = 5


@dataclass
class SweepConfig:
    theta_min: float = 1e-2
    theta_max: float = 1e2
    num: int = 41
    n_inputs: int = 5


@dataclass
class ScaleConfig:
    anchor_n: int = 20
    anchor_theta: float = 1.0
    anchor_delta: float = 1.0
    targets: list = field(default_factory=lambda: [50, 100, 200])


@dataclass
class RunConfig:
    seed: int = 0
    depth: int = 200
    out: str = "out"
    prior: object = "altered"
    map: bool = False
    posterior: str = "posterior.csv"
    n_bins: int = 10
    data: DataConfig = field(default_factory=DataConfig)
    hmc: dict = field(default_factory=dict)
    check: CheckConfig = field(default_factory=CheckConfig)
    sweep: SweepConfig = field(default_factory=SweepConfig)
    scale: ScaleConfig = field(default_factory=ScaleConfig)

    # --- derived objects -------------------------------------------------
    def prior_spec(self) -> PriorSpec:
        if isinstance(self.prior, str):
            if self.prior not in PRESETS:
                raise ConfigError(f"unknown prior preset {self.prior!r}; choose from {sorted(PRESETS)}")
            return PRESETS[self.prior]()
        try:
            return PriorSpec.from_json(self.prior)
        except (KeyError, TypeError, ValueError) as err:
            raise ConfigError(f"invalid prior specification: {err}") from err

    def hmc_config(self) -> HmcConfig:
        try:
            return HmcConfig(**{"seed": self.seed, **self.hmc})
        except (TypeError, ValueError) as err:
            raise ConfigError(f"invalid hmc settings: {err}") from err

    def unroll_config(self) -> UnrollConfig:
        return UnrollConfig(depth=self.depth)

    def ensemble(self) -> EnsembleSpec:
        try:
            return EnsembleSpec.parse(self.data.ensemble, self.data.n)
        except ValueError as err:
            raise ConfigError(f"invalid ensemble: {err}") from err

    def path(self, name: str) -> Path:
        p = Path(name)
        return p if p.is_absolute() else Path(self.out) / p

    def validate(self) -> None:
        if self.depth < 1:
            raise ConfigError("depth must be at least 1")
        if self.check.stage not in ("prior", "posterior"):
            raise ConfigError("check.stage must be 'prior' or 'posterior'")
        if self.data.n_train < 0 or self.data.n_test < 0 or self.data.signals < 0:
            raise ConfigError("dataset sizes must be non-negative")
        if not 0 < self.sweep.theta_min < self.sweep.theta_max or self.sweep.num < 1:
            raise ConfigError("sweep needs 0 < theta_min < theta_max and num >= 1")
        if self.n_bins < 1:
            raise ConfigError("n_bins must be at least 1")
        self.prior_spec()
        self.hmc_config()
        self.ensemble()

    def to_json(self) -> dict:
        return asdict(self)


_SECTIONS = {"data": DataConfig, "check": CheckConfig, "sweep": SweepConfig, "scale": ScaleConfig}


def config_from_dict(obj: dict) -> RunConfig:
    known = {f.name for f in fields(RunConfig)}
    unknown = set(obj) - known
    if unknown:
        raise ConfigError(f"unknown config keys: {sorted(unknown)}")
    kwargs = {}
    for key, val in obj.items():
        if key in _SECTIONS:
            cls = _SECTIONS[key]
            bad = set(val) - {f.name for f in fields(cls)}
            if bad:
                raise ConfigError(f"unknown keys in [{key}]: {sorted(bad)}")
            kwargs[key] = cls(**val)
        else:
            kwargs[key] = val
    return RunConfig(**kwargs)


def load_config(path) -> RunConfig:
    path = Path(path)
    try:
        text = path.read_bytes()
    except OSError as err:
        raise ConfigError(f"cannot read config {path}: {err}") from err
    try:
        if path.suffix == ".toml":
            import tomli
            obj = tomli.loads(text.decode())
        else:
            obj = json.loads(text)
    except ValueError as err:
        raise ConfigError(f"cannot parse config {path}: {err}") from err
    return config_from_dict(obj)


def _write_config(cfg: RunConfig, command: str) -> None:
    out = Path(cfg.out)
    out.mkdir(parents=True, exist_ok=True)
    (out / f"{command}_config.json").write_text(json.dumps(cfg.to_json(), indent=2))


def _rng(cfg: RunConfig, stream: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence([cfg.seed, stream]))


def _load_dataset(cfg: RunConfig, name: str) -> Dataset:
    path = cfg.path(name)
    if not path.exists():
        raise FileNotFoundError(f"dataset {path} not found; run 'gen' first or set data.{'train' if name == cfg.data.train else 'test'}")
    return Dataset.load(path)


# --- commands -------------------------------------------------------------

def cmd_gen(cfg: RunConfig) -> None:
    spec = cfg.ensemble()
    signals = cfg.data.signals or None
    train = make_dataset(spec, cfg.data.n_train, _rng(cfg, 0), signals)
    test = make_dataset(spec, cfg.data.n_test, _rng(cfg, 1), signals)
    Path(cfg.out).mkdir(parents=True, exist_ok=True)
    train.save(cfg.path(cfg.data.train))
    test.save(cfg.path(cfg.data.test))
    log.info("wrote %d training and %d test pairs to %s", train.T, test.T, cfg.out)


def cmd_fit(cfg: RunConfig) -> None:
    train = _load_dataset(cfg, cfg.data.train)
    prior = cfg.prior_spec()
    if cfg.map:
        res = map_estimate(train, prior, MapConfig(), cfg.unroll_config())
        theta, delta, b = res.params
        out = {"theta": theta, "delta": delta, "b": b, "log_post": res.log_post,
               "n_steps": res.n_steps, "converged": res.converged}
        cfg.path("map.json").write_text(json.dumps(out, indent=2))
        log.info("MAP theta=%.4g delta=%.4g b=%.4g", theta, delta, b)
        return
    samples = fit_posterior(train, prior, cfg.hmc_config(), cfg.unroll_config())
    samples.save(cfg.path(cfg.posterior))
    diag = samples.diagnostics()
    log.info("sampled %d draws in %.1fs; rhat %s", len(samples), samples.elapsed,
             {k: round(v["rhat"], 3) for k, v in diag.items()})


def _load_samples(cfg: RunConfig) -> PosteriorSamples:
    path = cfg.path(cfg.posterior)
    if not path.exists():
        raise FileNotFoundError(f"posterior {path} not found; run 'fit' first")
    return PosteriorSamples.load(path)


def cmd_predict(cfg: RunConfig) -> None:
    samples = _load_samples(cfg)
    test = _load_dataset(cfg, cfg.data.test)
    report = evaluate(test, samples, cfg.unroll_config(), _rng(cfg, 2), cfg.n_bins)
    report.save(cfg.out)
    s = report.summary()
    log.info("NLL %.3f  Brier %.4g  Error %.2f%%  ECE %.4g", s["nll_mean"], s["brier_mean"],
             s["error_mean"], s["ece"])


def cmd_check(cfg: RunConfig) -> None:
    train = _load_dataset(cfg, cfg.data.train)
    if cfg.check.stage == "prior":
        E = train.e[: cfg.check.n_inputs]
        rep = prior_predictive_check(cfg.prior_spec(), E, cfg.check.n_rep, cfg.unroll_config(),
                                     _rng(cfg, 3))
    else:
        rep = posterior_predictive_check(_load_samples(cfg), train, cfg.unroll_config(), _rng(cfg, 3))
    rep.save(cfg.out, prefix=f"check_{cfg.check.stage}_")
    log.info("%s check: %s", cfg.check.stage, rep.summary()["band_fractions"])


def cmd_sweep(cfg: RunConfig) -> None:
    train = _load_dataset(cfg, cfg.data.train)
    grid = np.geomspace(cfg.sweep.theta_min, cfg.sweep.theta_max, cfg.sweep.num)
    rows = theta_sweep(list(train.e[: cfg.sweep.n_inputs]), grid, SolveConfig())
    Path(cfg.out).mkdir(parents=True, exist_ok=True)
    write_sweep_csv(rows, cfg.path("sweep.csv"))


def cmd_scale(cfg: RunConfig) -> None:
    sc = cfg.scale
    try:
        anchor = ScaleAnchor.from_dpg(sc.anchor_n, sc.anchor_theta, sc.anchor_delta)
        rows = scale_table(anchor, sc.targets)
    except ValueError as err:
        raise ConfigError(str(err)) from err
    Path(cfg.out).mkdir(parents=True, exist_ok=True)
    write_scale_csv(rows, cfg.path("scale.csv"))
    for r in rows:
        print(",".join(str(x) for x in r))


COMMANDS = {
    "gen": cmd_gen, "fit": cmd_fit, "predict": cmd_predict, "eval": cmd_predict,
    "check": cmd_check, "sweep": cmd_sweep, "scale": cmd_scale,
}


def _parse_anchor(text: str) -> dict:
    out = {}
    for part in text.split(","):
        key, _, val = part.partition("=")
        key = key.strip()
        if key not in ("n", "theta", "delta"):
            raise ConfigError(f"bad anchor field {key!r}; use n=..,theta=..,delta=..")
        out[f"anchor_{key}"] = int(val) if key == "n" else float(val)
    return out


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="TOML or JSON run configuration")
    common.add_argument("--seed", type=int)
    common.add_argument("--depth", type=int, help="unrolling depth")
    common.add_argument("--chains", type=int)
    common.add_argument("--warmup", type=int)
    common.add_argument("--samples", type=int)
    common.add_argument("--out", help="output directory")
    common.add_argument("-v", "--verbose", action="store_true")

    parser = argparse.ArgumentParser(prog="bgsl", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("gen", parents=[common], help="generate train/test datasets")
    fit = sub.add_parser("fit", parents=[common], help="sample the posterior")
    fit.add_argument("--map", action="store_true", help="emit a MAP point estimate instead")
    for name in ("predict", "eval"):
        sub.add_parser(name, parents=[common], help="evaluate the posterior on the test set")
    chk = sub.add_parser("check", parents=[common], help="prior or posterior predictive check")
    chk.add_argument("--stage", choices=("prior", "posterior"))
    sub.add_parser("sweep", parents=[common], help="graph statistics over a theta grid")
    sc = sub.add_parser("scale", parents=[common], help="rescale parameters to other graph sizes")
    sc.add_argument("--anchor", help="e.g. n=20,theta=0.8,delta=50")
    sc.add_argument("--targets", help="comma-separated node counts")
    return parser


def resolve_config(args: argparse.Namespace) -> RunConfig:
    cfg = load_config(args.config) if args.config else RunConfig()
    for name in ("seed", "depth", "out"):
        if getattr(args, name) is not None:
            setattr(cfg, name, getattr(args, name))
    hmc_flags = {"n_chains": args.chains, "n_warmup": args.warmup, "n_samples": args.samples}
    cfg.hmc = {**cfg.hmc, **{k: v for k, v in hmc_flags.items() if v is not None}}
    if getattr(args, "map", False):
        cfg.map = True
    if getattr(args, "stage", None):
        cfg.check.stage = args.stage
    if getattr(args, "anchor", None):
        for k, v in _parse_anchor(args.anchor).items():
            setattr(cfg.scale, k, v)
    if getattr(args, "targets", None):
        try:
            cfg.scale.targets = [int(x) for x in args.targets.split(",")]
        except ValueError as err:
            raise ConfigError(f"bad --targets: {err}") from err
    cfg.validate()
    return cfg


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.INFO,
                        format="%(levelname)s %(message)s")
    try:
        cfg = resolve_config(args)
        _write_config(cfg, args.command)
        COMMANDS[args.command](cfg)
    except ConfigError as err:
        log.error("config error: %s", err)
        return EXIT_CONFIG
    except SamplerError as err:
        log.error("sampler failure: %s", err)
        return EXIT_SAMPLER
    except OSError as err:
        log.error("I/O error: %s", err)
        return EXIT_IO
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
