"""Serving-AP selection, diversity combining weights, SINR/INR and data rate.

Gains enter as an (n_ap, n_pd) matrix of total DC channel gains.  In
double-source (DS) mode each entry is the signed per-AP gain difference
delta_H between the antipodal sources and the per-source transmit power is
half the AP power; combining weights then carry the sign of the serving-AP
delta_H so the bipolar signal adds coherently.

The per-subcarrier SINR for weights w is

    gamma = (tau P sum_p w_p g_s,p)^2
            / (sum_p w_p^2 kappa^2 N0 B_L (M-2)/M
               + sum_{a != s} (tau P sum_p w_p g_a,p)^2)

and the flat DCO-OFDM data rate over the M/2 - 1 information subcarriers is
(M/2 - 1)/M * B_L * log2(1 + gamma).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

EGC = "egc"
SBC = "sbc"
MRC = "mrc"
COMBINERS = (EGC, SBC, MRC)


class NoCoverageError(RuntimeError):
    """All channel gains are zero; no AP can serve this sample."""


@dataclass(eq=False)
class LinkGains:
    """Per-(AP, PD) total DC gains for one UE sample; signed delta_H in DS mode."""

    gains: np.ndarray  # (n_ap, n_pd)
    ds: bool = False

    def __post_init__(self):
        self.gains = np.atleast_2d(np.asarray(self.gains, dtype=float))
        if not np.all(np.isfinite(self.gains)):
            raise ValueError("gains must be finite")
        if not self.ds and np.any(self.gains < 0.0):
            raise ValueError("single-source gains must be nonnegative")

    @property
    def n_ap(self) -> int:
        return self.gains.shape[0]

    @property
    def n_pd(self) -> int:
        return self.gains.shape[1]


@dataclass(frozen=True)
class PhyParams:
    """Electrical-layer constants shared by every SINR evaluation."""

    tau: float = 0.5  # PD responsivity, A/W
    p_tx: float = 10.0  # optical power per AP, W
    kappa: float = 3.0  # DC-bias to signal-RMS ratio of DCO-OFDM
    n0: float = 1e-21  # noise PSD, A^2/Hz
    b_l: float = 1e8  # baseband modulation bandwidth, Hz
    m_sub: int = 512  # OFDM subcarriers (even)

    def __post_init__(self):
        for name in ("tau", "p_tx", "kappa", "n0", "b_l"):
            if getattr(self, name) <= 0.0:
                raise ValueError(f"{name} must be positive")
        if self.m_sub < 4 or self.m_sub % 2:
            raise ValueError("m_sub must be an even integer >= 4")

    @property
    def noise_power(self) -> float:
        """Per-PD noise term kappa^2 N0 B_L (M-2)/M."""
        return self.kappa**2 * self.n0 * self.b_l * (self.m_sub - 2) / self.m_sub

    def p_eff(self, ds: bool) -> float:
        """Per-emitter optical power: halved in DS mode for a fair power budget."""
        return self.p_tx / 2.0 if ds else self.p_tx


def serving_ap(lg: LinkGains) -> int:
    """Signal-strength AP selection: argmax_a sum_p g_a,p^2, ties to lowest index."""
    energy = np.sum(lg.gains**2, axis=1)
    if energy.max() == 0.0:
        raise NoCoverageError("no coverage: all channel gains are zero")
    return int(np.argmax(energy))


def _per_pd_denominators(lg: LinkGains, phy: PhyParams, serving: int) -> np.ndarray:
    """Noise plus per-PD interference power from every non-serving AP."""
    amp = phy.tau * phy.p_eff(lg.ds) * lg.gains
    interf = np.sum(amp**2, axis=0) - amp[serving] ** 2
    return phy.noise_power + interf


def weights(kind: str, lg: LinkGains, phy: PhyParams, serving: int) -> np.ndarray:
    """Combining weight vector for the serving AP.

    EGC uses unit weights; SBC selects the PD with the best individual SINR;
    MRC weights each PD by signal amplitude over its noise-plus-interference
    power (the matched filter for independent per-PD impairments).  In DS
    mode the weights carry the sign of the serving delta_H.
    """
    if kind not in COMBINERS:
        raise ValueError(f"unknown combiner {kind!r}, expected one of {COMBINERS}")
    g_s = lg.gains[serving]
    sign = np.where(g_s < 0.0, -1.0, 1.0) if lg.ds else np.ones(lg.n_pd)
    if kind == EGC:
        return sign
    denom = _per_pd_denominators(lg, phy, serving)
    amp_s = phy.tau * phy.p_eff(lg.ds) * g_s
    if kind == SBC:
        w = np.zeros(lg.n_pd)
        w[int(np.argmax(amp_s**2 / denom))] = 1.0
        return w * sign
    return amp_s / denom  # MRC; already signed through g_s


def sinr_components(lg: LinkGains, phy: PhyParams, kind: str):
    """(signal, noise, interference) powers entering the SINR ratio."""
    s = serving_ap(lg)
    w = weights(kind, lg, phy, s)
    amp = phy.tau * phy.p_eff(lg.ds) * (lg.gains @ w)  # per-AP combined amplitude
    signal = amp[s] ** 2
    noise = np.sum(w**2) * phy.noise_power
    interference = float(np.sum(amp**2) - signal)
    return float(signal), float(noise), interference


def sinr(lg: LinkGains, phy: PhyParams, kind: str = MRC) -> float:
    """Per-subcarrier SINR of the combined signal."""
    signal, noise, interference = sinr_components(lg, phy, kind)
    return signal / (noise + interference)


def inr(lg: LinkGains, phy: PhyParams, kind: str = MRC) -> float:
    """Interference-to-noise ratio under the same combining weights."""
    _, noise, interference = sinr_components(lg, phy, kind)
    return interference / noise


def ds_sinr_approx(lg: LinkGains, phy: PhyParams, kind: str = MRC) -> float:
    """DS SINR neglecting residual interference (upper bound on the exact value)."""
    if not lg.ds:
        raise ValueError("approximation is defined for DS link gains")
    signal, noise, _ = sinr_components(lg, phy, kind)
    return signal / noise


def data_rate(gamma, phy: PhyParams):
    """Achievable rate in bit/s: flat channel over the M/2 - 1 data subcarriers."""
    gamma = np.asarray(gamma, dtype=float)
    if np.any(gamma < 0.0):
        raise ValueError("gamma must be nonnegative")
    rate = (phy.m_sub / 2 - 1) / phy.m_sub * phy.b_l * np.log2(1.0 + gamma)
    return float(rate) if rate.ndim == 0 else rate


def sinr_inr_batch(gains: np.ndarray, phy: PhyParams, kind: str, ds: bool = False):
    """Vectorized SINR/INR over a batch of samples.

    gains has shape (n_samples, n_ap, n_pd); returns (sinr, inr, valid) where
    valid flags samples with at least one nonzero gain.  Must agree with the
    scalar path sample-for-sample.
    """
    if kind not in COMBINERS:
        raise ValueError(f"unknown combiner {kind!r}, expected one of {COMBINERS}")
    g = np.asarray(gains, dtype=float)
    n_samples, n_ap, n_pd = g.shape
    p_eff = phy.p_eff(ds)
    amp = phy.tau * p_eff * g  # (U, A, P)

    energy = np.sum(g**2, axis=2)  # (U, A)
    valid = energy.max(axis=1) > 0.0
    serving = np.argmax(energy, axis=1)  # (U,)

    idx = np.arange(n_samples)
    amp_s = amp[idx, serving, :]  # (U, P)
    denom = phy.noise_power + np.sum(amp**2, axis=1) - amp_s**2  # (U, P)

    if ds:
        sign = np.where(amp_s < 0.0, -1.0, 1.0)
    else:
        sign = np.ones_like(amp_s)
    if kind == EGC:
        w = sign
    elif kind == SBC:
        w = np.zeros_like(amp_s)
        best = np.argmax(amp_s**2 / denom, axis=1)
        w[idx, best] = sign[idx, best]
    else:
        w = amp_s / denom

    combined = np.einsum("uap,up->ua", amp, w)  # (U, A)
    signal = combined[idx, serving] ** 2
    noise = np.sum(w**2, axis=1) * phy.noise_power
    interference = np.sum(combined**2, axis=1) - signal
    interference = np.clip(interference, 0.0, None)  # guard tiny negative round-off
    with np.errstate(invalid="ignore", divide="ignore"):
        gamma = np.where(valid, signal / (noise + interference), 0.0)
        inr_lin = np.where(valid, interference / noise, 0.0)
    return gamma, inr_lin, valid
