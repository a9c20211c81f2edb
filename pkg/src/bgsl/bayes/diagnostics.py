"""Split R-hat and effective sample size for MCMC output."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass
class ChainDiagnostics:
    rhat: float
    ess: float
    degenerate: bool = False


def _split(chains: np.ndarray) -> np.ndarray:
    chains = np.asarray(chains, dtype=float)
    if chains.ndim != 2 or chains.shape[0] < 2 or chains.shape[1] < 4:
        raise ValueError("diagnostics need at least 2 chains of at least 4 draws")
    half = chains.shape[1] // 2
    return np.concatenate([chains[:, :half], chains[:, -half:]], axis=0)


def _autocov(x: np.ndarray) -> np.ndarray:
    """Biased autocovariance of each row, via FFT."""
    n = x.shape[-1]
    xc = x - x.mean(axis=-1, keepdims=True)
    size = 1 << (2 * n - 1).bit_length()
    f = np.fft.rfft(xc, size)
    return np.fft.irfft(f * np.conj(f), size)[..., :n] / n


def split_rhat(chains) -> ChainDiagnostics:
    """Potential scale reduction over split chains; ``chains`` has shape ``(C, N)``."""
    s = _split(chains)
    n = s.shape[1]
    W = s.var(axis=1, ddof=1).mean()
    B_over_n = s.mean(axis=1).var(ddof=1)
    if W == 0:
        return ChainDiagnostics(1.0, np.nan, degenerate=True)
    var_plus = (n - 1) / n * W + B_over_n
    return ChainDiagnostics(float(np.sqrt(var_plus / W)), np.nan)


def ess(chains) -> float:
    """Effective sample size with Geyer's initial monotone positive sequence."""
    s = _split(chains)
    m, n = s.shape
    acov = _autocov(s)
    W = s.var(axis=1, ddof=1).mean()
    if W == 0:
        return float("nan")
    var_plus = (n - 1) / n * W + s.mean(axis=1).var(ddof=1)
    rho = 1.0 - (W - acov.mean(axis=0)) / var_plus
    rho[0] = 1.0
    # pair sums P_k = rho_{2k} + rho_{2k+1}, truncated at the first negative
    npairs = n // 2
    pairs = rho[: 2 * npairs].reshape(npairs, 2).sum(axis=1)
    neg = np.nonzero(pairs < 0)[0]
    k = neg[0] if neg.size else npairs
    pairs = np.minimum.accumulate(pairs[:k])
    tau = -1.0 + 2.0 * pairs.sum()
    tau = max(tau, 1.0 / np.log10(m * n))
    return float(m * n / tau)


def diagnose(chains) -> ChainDiagnostics:
    """R-hat and ESS together; zero-variance chains give R-hat 1 and a flag."""
    r = split_rhat(chains)
    r.ess = ess(chains)
    return r
