"""Uniform quantizer, its error-variance laws and backhaul bit accounting."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .config import levels

CASE1, CASE2 = "case1", "case2"


@dataclass(frozen=True)
class QuantizerSpec:
    """Midrise quantizer with ``2**alpha`` levels per real dimension.

    The range is ``[-w*sigma_re, w*sigma_re]`` with ``sigma_re = sigma/sqrt(2)``,
    ``sigma`` being the standard deviation of the complex input. ``sigma``
    may be an array broadcastable against the input.
    """

    alpha: float
    w: float
    sigma: object = 1.0

    @property
    def Q(self):
        return levels(self.alpha)

    @property
    def step(self):
        sigma_re = np.asarray(self.sigma, dtype=float) / np.sqrt(2)
        return 2 * self.w * sigma_re / self.Q


def _quantize_real(x, step, Q):
    half = Q / 2
    idx = np.clip(np.floor(x / step), -half, half - 1)
    return (idx + 0.5) * step


def uniform_quantize(x, spec):
    """Quantize real and imaginary parts independently; clip outside the range."""
    x = np.asarray(x)
    Q = spec.Q
    if math.isinf(Q):
        return x.astype(complex)
    step = spec.step
    return _quantize_real(x.real, step, Q) + 1j * _quantize_real(x.imag, step, Q)


def dithered_quantize(x, spec, rng):
    """Subtractive-dither quantization: Q(x + d) - d with d uniform over one step.

    The error is then uniform on [-step/2, step/2] and independent of ``x``
    regardless of how coarse the step is relative to the input spread.
    """
    x = np.asarray(x)
    Q = spec.Q
    if math.isinf(Q):
        return x.astype(complex)
    step = np.broadcast_to(spec.step, x.shape)
    d_re = (rng.random(x.shape) - 0.5) * step
    d_im = (rng.random(x.shape) - 0.5) * step
    out_re = _quantize_real(x.real + d_re, step, Q) - d_re
    out_im = _quantize_real(x.imag + d_im, step, Q) - d_im
    return out_re + 1j * out_im


def distortion_factor(w, Q):
    """w**2 / (3 Q**2): complex error power per unit input power."""
    return np.asarray(w, dtype=float) ** 2 / (3.0 * np.asarray(Q, dtype=float) ** 2)


def error_variance_y(rho, q, beta_m, w_y, Q):
    """Error power of the quantized received signal at one AP antenna."""
    power = rho * np.dot(np.asarray(q, dtype=float), np.asarray(beta_m, dtype=float)) + 1.0
    return distortion_factor(w_y, Q) * power


def error_variance_g(gamma_mk, w_g, Q):
    """Error power of one quantized channel-estimate entry."""
    return distortion_factor(w_g, Q) * np.asarray(gamma_mk, dtype=float)


def c_tot(w_y, w_g, Q):
    """Aggregate distortion constant a + b + ab for quantized (signal, CSI)."""
    a = distortion_factor(w_y, Q)
    b = distortion_factor(w_g, Q)
    return a + b + a * b


def backhaul_bits(case_id, N, K, tau_f, alpha):
    """Bits one AP forwards per coherence interval (exact integers)."""
    N, K, tau_f, alpha = (int(v) for v in (N, K, tau_f, alpha))
    if case_id == CASE1:
        return 2 * alpha * (N * K + N * tau_f)
    if case_id == CASE2:
        return 2 * alpha * K * tau_f
    raise ValueError(f"unknown case {case_id!r}")


def required_capacity(bits, T_c):
    """Backhaul rate in bits/s for ``bits`` per coherence time ``T_c`` seconds."""
    if not T_c > 0:
        raise ValueError("coherence time must be positive")
    return bits / T_c


def matched_alpha(N, K, tau_f, alpha1):
    """Case-2 bit width carrying the same backhaul load as Case 1 at ``alpha1``.

    Returns ``(alpha2, exact)``; when the match is not an integer, ``alpha2``
    is rounded down and ``exact`` is False.
    """
    num = int(alpha1) * (N * K + N * tau_f)
    den = K * tau_f
    alpha2, rem = divmod(num, den)
    return alpha2, rem == 0
