"""Priors, likelihood, HMC sampling, MAP estimation and chain diagnostics."""
from __future__ import annotations

from .diagnostics import ChainDiagnostics, diagnose, ess, split_rhat
from .hmc import HmcConfig, PosteriorSamples, SamplerError, hmc_sample
from .inference import MapConfig, MapResult, fit_posterior, map_estimate
from .model import Posterior, edge_log_likelihood, log_likelihood
from .priors import (LogNormal10, LogUniform, Normal, PriorSpec, altered_prior, original_prior,
                     uninformative_prior)

__all__ = [
    "ChainDiagnostics", "diagnose", "ess", "split_rhat", "HmcConfig", "PosteriorSamples",
    "SamplerError", "hmc_sample", "MapConfig", "MapResult", "fit_posterior", "map_estimate",
    "Posterior", "edge_log_likelihood", "log_likelihood", "LogNormal10", "LogUniform", "Normal",
    "PriorSpec", "altered_prior", "original_prior", "uninformative_prior",
]
