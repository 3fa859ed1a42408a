"""Szegő transfer cocycle: one-step matrices, products, SL(2,C)
normalization, truncated solution norms and power-law exponent fits.

The one-step matrix at site n is

    A(n, z) = (1/rho(n)) [[z, -conj(alpha(n))], [-alpha(n) z, 1]],

with det A = z, so the L-step product has determinant z^L and
M_L = T_L / z^(L/2) lies in SL(2,C) once a branch of the square root is
fixed.
"""

from __future__ import annotations

import cmath
import csv
import json
import math
from dataclasses import dataclass

import numpy as np

from .coeffs import VerblunskySequence
from .errors import (DegenerateRhoError, InsufficientDataError,
                     NormalizationError, SpectralPointError)

_RENORM_EVERY = 64


@dataclass(frozen=True)
class Mat2C:
    """2x2 complex matrix with determinant bookkeeping.

    The cached determinant is propagated multiplicatively through
    products, which avoids the catastrophic cancellation that direct
    evaluation of a*d - b*c suffers for long cocycle products.
    """

    a: complex
    b: complex
    c: complex
    d: complex
    det: complex

    @classmethod
    def of(cls, a, b, c, d) -> "Mat2C":
        return cls(a, b, c, d, a * d - b * c)

    @classmethod
    def identity(cls) -> "Mat2C":
        return cls(1.0, 0.0, 0.0, 1.0, 1.0)

    def __matmul__(self, other: "Mat2C") -> "Mat2C":
        return Mat2C(
            self.a * other.a + self.b * other.c,
            self.a * other.b + self.b * other.d,
            self.c * other.a + self.d * other.c,
            self.c * other.b + self.d * other.d,
            self.det * other.det,
        )

    def scaled(self, s: complex) -> "Mat2C":
        return Mat2C(self.a * s, self.b * s, self.c * s, self.d * s,
                     self.det * s * s)

    def recomputed_det(self) -> complex:
        return self.a * self.d - self.b * self.c

    @property
    def array(self) -> np.ndarray:
        return np.array([[self.a, self.b], [self.c, self.d]], dtype=complex)

    def norm(self) -> float:
        """Spectral norm.  Computed by SVD: the 2x2 closed form loses half
        the working precision when the singular values nearly coincide."""
        return float(np.linalg.svd(self.array, compute_uv=False)[0])

    def max_abs(self) -> float:
        return max(abs(self.a), abs(self.b), abs(self.c), abs(self.d))


def branch_sqrt(z: complex) -> complex:
    """sqrt with the branch  |z|^(1/2) exp(i arg(z)/2),  arg in [0, 2pi)."""
    if z == 0:
        raise SpectralPointError("square-root branch undefined at z = 0")
    theta = cmath.phase(z) % (2.0 * math.pi)
    return math.sqrt(abs(z)) * cmath.exp(0.5j * theta)


def one_step(seq: VerblunskySequence, z: complex, n: int) -> Mat2C:
    """One-step Szegő matrix at site n; det equals z."""
    a = seq.alpha(n)
    r = seq.rho(n)
    if r <= 1e-12:
        raise DegenerateRhoError(f"rho({n}) vanished")
    inv = 1.0 / r
    return Mat2C.of(z * inv, -a.conjugate() * inv, -a * z * inv, inv)


def cocycle_product(seq: VerblunskySequence, z: complex, L: int,
                    start: int = 0) -> Mat2C:
    """Ordered product A(start+L-1) ... A(start), renormalized internally.

    Entries are rescaled every few steps and the scale reattached at the
    end; OverflowError is raised only if the final matrix itself exceeds
    the floating-point range.
    """
    if L < 0:
        raise ValueError("L must be nonnegative")
    acc = Mat2C.identity()
    log_scale = 0.0
    for j in range(L):
        acc = one_step(seq, z, start + j) @ acc
        if (j + 1) % _RENORM_EVERY == 0:
            m = acc.max_abs()
            if m > 1e100 or (0.0 < m < 1e-100):
                acc = acc.scaled(1.0 / m)
                log_scale += math.log(m)
    if log_scale != 0.0:
        if log_scale > 700.0:
            raise OverflowError("cocycle product exceeds floating-point range")
        acc = acc.scaled(math.exp(log_scale))
    if not math.isfinite(acc.max_abs()):
        raise OverflowError("cocycle product exceeds floating-point range")
    return acc


def normalize_sl2(T: Mat2C, z: complex, n: int) -> Mat2C:
    """M_n = T_n / z^(n/2) with the fixed square-root branch; det M = 1."""
    s = branch_sqrt(z) ** (-n)
    return T.scaled(s)


def pair_orbit(seq: VerblunskySequence, z: complex, initial, n_max: int) -> np.ndarray:
    """Propagate the pair (eta_j, eta_j^*) for j = 0..n_max; shape (n_max+1, 2).

    Exponentially escaping orbits saturate to inf once they leave the
    floating-point range instead of degrading into NaNs.
    """
    out = np.empty((n_max + 1, 2), dtype=complex)
    u, v = complex(initial[0]), complex(initial[1])
    out[0] = (u, v)
    for j in range(n_max):
        a = seq.alpha(j)
        r = seq.rho(j)
        if r <= 1e-12:
            raise DegenerateRhoError(f"rho({j}) vanished")
        u, v = (z * u - a.conjugate() * v) / r, (-a * z * u + v) / r
        if max(abs(u), abs(v)) > 1e150:
            out[j + 1:] = complex(math.inf, 0.0)
            return out
        out[j + 1] = (u, v)
    return out


def norm_profile(seq: VerblunskySequence, z: complex, initial, n_max: int) -> np.ndarray:
    """Cumulative squared norms S[n] = sum_{j<=n} (|eta_j|^2 + |eta_j^*|^2)/2."""
    orbit = pair_orbit(seq, z, initial, n_max)
    weights = 0.5 * (np.abs(orbit[:, 0]) ** 2 + np.abs(orbit[:, 1]) ** 2)
    return np.cumsum(weights)


def norm_profile_batch(seq: VerblunskySequence, zs, initials, n_max: int) -> np.ndarray:
    """Batched cumulative squared norms, shape (batch, n_max + 1).

    zs and initials broadcast elementwise over the batch; the coefficient
    sequence is shared, which is what grid sweeps over the spectral
    parameter need.
    """
    zs = np.asarray(zs, dtype=complex)
    init = np.asarray(initials, dtype=complex)
    B = max(len(zs), len(init))
    zs = np.broadcast_to(zs, (B,))
    u = np.broadcast_to(init[..., 0], (B,)).astype(complex).copy()
    v = np.broadcast_to(init[..., 1], (B,)).astype(complex).copy()
    alphas = seq.alpha_array(0, n_max)
    rhos = np.sqrt(np.maximum(1.0 - np.abs(alphas) ** 2, 0.0))
    if np.any(rhos <= 1e-12):
        raise DegenerateRhoError("rho vanished inside the propagation range")
    out = np.empty((B, n_max + 1))
    out[:, 0] = 0.5 * (np.abs(u) ** 2 + np.abs(v) ** 2)
    dead = np.zeros(B, dtype=bool)
    for j in range(n_max):
        a, r = alphas[j], rhos[j]
        u, v = (zs * u - np.conj(a) * v) / r, (-a * zs * u + v) / r
        escaped = (np.abs(u) > 1e150) | (np.abs(v) > 1e150)
        if escaped.any():
            # freeze escaped elements; their partial sums saturate to inf
            u[escaped] = 0.0
            v[escaped] = 0.0
            dead |= escaped
        out[:, j + 1] = out[:, j] + 0.5 * (np.abs(u) ** 2 + np.abs(v) ** 2)
        out[dead, j + 1] = np.inf
    return out


def _interp_squared(profile: np.ndarray, L: float) -> float:
    # linear interpolation acts on the squared norms
    if L <= 0:
        return float(profile[0]) if L == 0 else math.nan
    n = int(math.floor(L))
    if n >= len(profile) - 1:
        if L <= len(profile) - 1:
            return float(profile[-1])
        raise ValueError("norm profile shorter than requested L")
    frac = L - n
    return float((1.0 - frac) * profile[n] + frac * profile[n + 1])


def solution_norm(seq: VerblunskySequence, z: complex, initial, L: float) -> float:
    """||eta||_L for the pair orbit started from `initial`.

    The initial pair must satisfy |eta_0|^2 + |eta_1|^2 = 2; squared norms
    are interpolated linearly between integer L.
    """
    s = abs(complex(initial[0])) ** 2 + abs(complex(initial[1])) ** 2
    if abs(s - 2.0) > 1e-10:
        raise NormalizationError(f"|eta0|^2 + |eta1|^2 = {s}, expected 2")
    if L < 0:
        raise ValueError("L must be nonnegative")
    profile = norm_profile(seq, z, initial, int(math.ceil(L)))
    return math.sqrt(_interp_squared(profile, L))


@dataclass(frozen=True)
class FitResult:
    """Two-sided power-law envelope of ||eta||_L on a sampled range."""

    gamma_low: float
    gamma_high: float
    c_low: float
    c_high: float

    @property
    def beta(self) -> float:
        return 2.0 * self.gamma_low / (self.gamma_low + self.gamma_high)


def fit_power_law(samples) -> FitResult:
    """Envelope exponents from (L, norm) samples at geometrically spaced L.

    gamma_high / gamma_low are the extreme pairwise slopes of log norm
    against log L over pairs separated by at least half the sampled log
    range (closer pairs measure local oscillation, not the envelope).
    The constants are pinned so the two-sided bound
    c_low * L^gamma_low <= norm <= c_high * L^gamma_high holds at every
    sample.
    """
    pts = [(float(L), float(v)) for L, v in samples]
    if len(pts) < 8:
        raise InsufficientDataError(f"need >= 8 samples, got {len(pts)}")
    if any(L <= 0 or v <= 0 for L, v in pts):
        raise InsufficientDataError("samples must have positive L and norm")
    pts.sort()
    logs = [(math.log(L), math.log(v)) for L, v in pts]
    span = logs[-1][0] - logs[0][0]
    if span <= 0:
        raise InsufficientDataError("samples need distinct L values")
    slopes = []
    for i in range(len(logs)):
        for j in range(i + 1, len(logs)):
            dx = logs[j][0] - logs[i][0]
            if dx < 0.5 * span:
                continue
            slopes.append((logs[j][1] - logs[i][1]) / dx)
    g_low = min(slopes)
    g_high = max(slopes)
    c_low = min(v / L ** g_low for L, v in pts)
    c_high = max(v / L ** g_high for L, v in pts)
    return FitResult(g_low, g_high, c_low, c_high)


def write_norm_csv(samples, path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["L", "norm", "log_L", "log_norm"])
        for L, v in samples:
            writer.writerow([repr(float(L)), repr(float(v)),
                             repr(math.log(L)), repr(math.log(v))])


def fit_to_json(fit: FitResult, path=None):
    record = {
        "gamma_low": fit.gamma_low,
        "gamma_high": fit.gamma_high,
        "c_low": fit.c_low,
        "c_high": fit.c_high,
        "beta": fit.beta,
    }
    if path is not None:
        with open(path, "w", encoding="utf-8") as fh:
            json.dump(record, fh, indent=2)
    return record
