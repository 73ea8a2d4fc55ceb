"""Image-pair quality scores: RMSE, windowed SSIM, and PSNR.

All three operate on equal-shape gray images, conventionally scaled
to [0, 1] with peak value 1. SSIM follows the factorized
luminance/contrast/structure form with configurable exponents; the
default exponents drop the luminance term entirely.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.ndimage import correlate1d

from .errors import ConfigurationError, ShapeError


@dataclass(frozen=True)
class SsimParams:
    """Exponents, stabilizing constants, and window for SSIM.

    The constants default to the conventional (0.01*peak)^2 and
    (0.03*peak)^2 with m3 = m2/2, at peak 1. The window is Gaussian of
    the given size and standard deviation; a nonpositive
    ``window_sigma`` selects a uniform window instead.
    """

    alpha: float = 0.0
    beta: float = 1.0
    gamma: float = 1.0
    m1: float = 1e-4
    m2: float = 9e-4
    m3: float = 4.5e-4
    window_size: int = 11
    window_sigma: float = 1.5

    @classmethod
    def for_peak(cls, peak: float, **overrides: float) -> "SsimParams":
        if peak <= 0:
            raise ConfigurationError(f"peak value must be positive, got {peak:g}")
        m2 = (0.03 * peak) ** 2
        defaults = {"m1": (0.01 * peak) ** 2, "m2": m2, "m3": m2 / 2.0}
        defaults.update(overrides)
        return cls(**defaults)

    def validate(self) -> None:
        if min(self.alpha, self.beta, self.gamma) < 0:
            raise ConfigurationError("SSIM exponents must be >= 0")
        if min(self.m1, self.m2, self.m3) <= 0:
            raise ConfigurationError("SSIM stabilizing constants must be positive")
        if self.window_size < 1 or self.window_size % 2 == 0:
            raise ConfigurationError(
                f"window size must be odd and >= 1, got {self.window_size}"
            )


@dataclass(frozen=True)
class MetricReport:
    rmse: float
    ssim: float
    psnr: float
    peakval: float = 1.0


def _check_pair(truth: np.ndarray, estimate: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    a = np.asarray(truth, dtype=np.float64)
    b = np.asarray(estimate, dtype=np.float64)
    if a.shape != b.shape:
        raise ShapeError(f"image shapes differ: {a.shape} vs {b.shape}")
    return a, b


def rmse(truth: np.ndarray, estimate: np.ndarray) -> float:
    """Root mean squared pixel difference."""
    a, b = _check_pair(truth, estimate)
    return float(np.sqrt(np.mean((a - b) ** 2)))


def psnr(truth: np.ndarray, estimate: np.ndarray, peakval: float = 1.0) -> float:
    """Peak signal-to-noise ratio in dB; identical images give +inf."""
    a, b = _check_pair(truth, estimate)
    if peakval <= 0:
        raise ConfigurationError(f"peak value must be positive, got {peakval:g}")
    mse = float(np.mean((a - b) ** 2))
    if mse == 0.0:
        return math.inf
    return 10.0 * math.log10(peakval * peakval / mse)


def _window_kernel(params: SsimParams) -> np.ndarray:
    n = params.window_size
    if params.window_sigma <= 0:
        k = np.ones(n)
    else:
        offsets = np.arange(n) - (n - 1) / 2.0
        k = np.exp(-(offsets ** 2) / (2.0 * params.window_sigma ** 2))
    return k / k.sum()


def _window_mean(img: np.ndarray, kernel: np.ndarray) -> np.ndarray:
    # Separable correlation, then crop to fully interior windows so
    # the boundary mode never matters.
    half = kernel.shape[0] // 2
    out = correlate1d(img, kernel, axis=0, mode="constant")
    out = correlate1d(out, kernel, axis=1, mode="constant")
    if half:
        out = out[half:-half, half:-half]
    return out


def _signed_power(base: np.ndarray, exponent: float) -> np.ndarray:
    if exponent == 1.0:
        return base
    return np.sign(base) * np.abs(base) ** exponent


def ssim(truth: np.ndarray, estimate: np.ndarray,
         params: SsimParams = SsimParams()) -> float:
    """Mean structural similarity over sliding windows.

    Per window the luminance, contrast, and structure comparisons are
    raised to the configured exponents and multiplied; a zero exponent
    removes its factor entirely, so the default (alpha = 0) scores
    contrast and structure only. Negative structure terms keep their
    sign under fractional exponents.
    """
    a, b = _check_pair(truth, estimate)
    params.validate()
    if a.ndim != 2 or min(a.shape) < params.window_size:
        raise ShapeError(
            f"images of shape {a.shape} cannot host {params.window_size}-pixel windows"
        )
    kernel = _window_kernel(params)
    mu_a = _window_mean(a, kernel)
    mu_b = _window_mean(b, kernel)
    # Weighted second moments; clip the tiny negatives roundoff leaves.
    var_a = np.maximum(_window_mean(a * a, kernel) - mu_a * mu_a, 0.0)
    var_b = np.maximum(_window_mean(b * b, kernel) - mu_b * mu_b, 0.0)
    cov = _window_mean(a * b, kernel) - mu_a * mu_b
    sd_a = np.sqrt(var_a)
    sd_b = np.sqrt(var_b)

    factors = []
    if params.alpha != 0.0:
        luminance = (2.0 * mu_a * mu_b + params.m1) / (mu_a ** 2 + mu_b ** 2 + params.m1)
        factors.append(_signed_power(luminance, params.alpha))
    if params.beta != 0.0:
        contrast = (2.0 * sd_a * sd_b + params.m2) / (var_a + var_b + params.m2)
        factors.append(_signed_power(contrast, params.beta))
    if params.gamma != 0.0:
        structure = (cov + params.m3) / (sd_a * sd_b + params.m3)
        factors.append(_signed_power(structure, params.gamma))
    if not factors:
        return 1.0
    score = factors[0]
    for f in factors[1:]:
        score = score * f
    return float(np.mean(score))


def evaluate_pair(truth: np.ndarray, estimate: np.ndarray,
                  peakval: float = 1.0,
                  ssim_params: SsimParams | None = None) -> MetricReport:
    """Bundle all three scores for one image pair."""
    if ssim_params is None:
        ssim_params = SsimParams.for_peak(peakval)
    return MetricReport(
        rmse=rmse(truth, estimate),
        ssim=ssim(truth, estimate, ssim_params),
        psnr=psnr(truth, estimate, peakval),
        peakval=peakval,
    )
