"""CMV operators: finite unitary truncations, extended (two-sided) band
application, origin splitting, a dense-truncation resolvent oracle,
spectral-basis reconstructions and quantum-walk evolution.

Band conventions.  The extended matrix has the pentadiagonal pattern

    E(2k,   2k-1) =  conj(a(2k)) r(2k-1)      E(2k,   2k)   = -conj(a(2k)) a(2k-1)
    E(2k,   2k+1) =  conj(a(2k+1)) r(2k)      E(2k,   2k+2) =  r(2k+1) r(2k)
    E(2k+1, 2k-1) =  r(2k) r(2k-1)            E(2k+1, 2k)   = -r(2k) a(2k-1)
    E(2k+1, 2k+1) = -conj(a(2k+1)) a(2k)      E(2k+1, 2k+2) = -r(2k+1) a(2k)

with a(n) the Verblunsky coefficients and r(n) = rho(n).  The one-sided
matrix is this pattern restricted to n >= 0 with the boundary value
a(-1) = -1, and a finite window is closed unitarily by placing a
unimodular coefficient at each cut (which forces rho = 0 there and
decouples the block).
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np
import scipy.linalg

from .coeffs import (ConjugateReflectedSequence, ShiftedSequence,
                     VerblunskySequence)
from .errors import (DegenerateRhoError, ModulusError, SingularError,
                     SizeError, SpectralPointError, SupportError, WindowError)


def _closure_alpha(seq: VerblunskySequence, overrides: dict) -> Callable[[int], complex]:
    def alpha(n: int) -> complex:
        if n in overrides:
            return overrides[n]
        return seq.alpha(n)
    return alpha


def band_diagonals(alpha: Callable[[int], complex], r0: int, r1: int) -> dict:
    """Five diagonals of the CMV pattern for rows r0 <= m < r1.

    Returns arrays keyed by column offset in {-2, -1, 0, 1, 2}; entry
    [m - r0] of diagonal k is E(m, m + k).  Coefficients outside a
    sequence's stored range are treated as zero: beyond a unitary closure
    they are multiplied by rho = 0 and never matter, and for finite
    explicit lists this realizes the same zero-extension the truncated
    Schur algorithm uses.
    """
    n = r1 - r0

    def fetch(m):
        try:
            return alpha(m)
        except (SupportError, WindowError):
            return 0.0

    a = np.array([fetch(m) for m in range(r0 - 2, r1 + 2)], dtype=complex)
    r = np.sqrt(np.maximum(1.0 - np.abs(a) ** 2, 0.0))

    def A(off):  # a(m + off) aligned with rows r0..r1
        return a[2 + off:2 + off + n]

    def R(off):
        return r[2 + off:2 + off + n]

    m = np.arange(r0, r1)
    even = (m % 2 == 0)
    diag = {}
    diag[0] = -np.conj(A(0)) * A(-1)
    diag[1] = np.where(even, np.conj(A(1)) * R(0), -R(0) * A(-1))
    diag[-1] = np.where(even, np.conj(A(0)) * R(-1), -R(-1) * A(-2))
    diag[2] = np.where(even, R(1) * R(0), 0.0)
    diag[-2] = np.where(even, 0.0, R(-1) * R(-2))
    return diag


def _dense_from_diagonals(diag: dict, r0: int, r1: int, c0: int, c1: int) -> np.ndarray:
    out = np.zeros((r1 - r0, c1 - c0), dtype=complex)
    for off, arr in diag.items():
        for i, m in enumerate(range(r0, r1)):
            j = m + off
            if c0 <= j < c1:
                out[i, j - c0] = arr[i]
    return out


@dataclass(frozen=True)
class ExtendedCMVWindow:
    """Rows [lo, hi] of the extended matrix, optionally closed unitarily."""

    lo: int
    hi: int
    diagonals: dict = field(repr=False)
    closed: bool

    def dense(self) -> np.ndarray:
        return _dense_from_diagonals(self.diagonals, self.lo, self.hi + 1,
                                     self.lo, self.hi + 1)

    def banded(self) -> np.ndarray:
        """LAPACK banded storage (l = u = 2) for scipy.linalg.solve_banded."""
        n = self.hi - self.lo + 1
        ab = np.zeros((5, n), dtype=complex)
        for off, arr in self.diagonals.items():
            for i in range(n):
                j = i + off
                if 0 <= j < n:
                    ab[2 - off, j] = arr[i]
        return ab


def extended_window(seq: VerblunskySequence, lo: int, hi: int,
                    closure: Optional[complex] = 1.0) -> ExtendedCMVWindow:
    """Extract rows/columns [lo, hi].  With a unimodular `closure` the cut
    coefficients a(lo-1) and a(hi) are replaced so the block is unitary;
    closure=None keeps the raw doubly-infinite entries."""
    if hi < lo + 1:
        raise SizeError("window must contain at least two sites")
    overrides = {}
    if closure is not None:
        if abs(abs(closure) - 1.0) > 1e-12:
            raise ModulusError("closure coefficient must be unimodular")
        overrides = {lo - 1: closure, hi: closure}
    alpha = _closure_alpha(seq, overrides)
    return ExtendedCMVWindow(lo, hi, band_diagonals(alpha, lo, hi + 1),
                             closure is not None)


@dataclass(frozen=True)
class FiniteCMV:
    """N x N unitary truncation with boundary coefficient eta_b at N-1."""

    size: int
    eta_b: complex
    diagonals: dict = field(repr=False)

    def dense(self) -> np.ndarray:
        return _dense_from_diagonals(self.diagonals, 0, self.size, 0, self.size)


def build_finite_cmv(seq: VerblunskySequence, N: int, eta_b: complex = 1.0) -> FiniteCMV:
    """Finite CMV matrix from a(0..N-2) closed with the unimodular eta_b."""
    if N < 2:
        raise SizeError(f"N = {N} < 2")
    if abs(abs(eta_b) - 1.0) > 1e-12:
        raise ModulusError(f"|eta_b| = {abs(eta_b)} != 1")
    overrides = {-1: -1.0, N - 1: complex(eta_b)}
    alpha = _closure_alpha(seq, overrides)
    return FiniteCMV(N, complex(eta_b), band_diagonals(alpha, 0, N))


@dataclass(frozen=True)
class State:
    """Finitely supported vector: values[i] sits at site offset + i."""

    offset: int
    values: np.ndarray

    @classmethod
    def delta(cls, n: int) -> "State":
        return cls(n, np.array([1.0 + 0.0j]))

    @classmethod
    def from_dict(cls, entries: dict) -> "State":
        lo, hi = min(entries), max(entries)
        vals = np.zeros(hi - lo + 1, dtype=complex)
        for n, v in entries.items():
            vals[n - lo] = v
        return cls(lo, vals)

    def __getitem__(self, n: int) -> complex:
        i = n - self.offset
        if 0 <= i < len(self.values):
            return complex(self.values[i])
        return 0.0 + 0.0j

    def norm(self) -> float:
        return float(np.linalg.norm(self.values))

    def trimmed(self, tol: float = 0.0) -> "State":
        mask = np.abs(self.values) > tol
        if not mask.any():
            return State(self.offset, np.zeros(1, dtype=complex))
        i0, i1 = np.argmax(mask), len(mask) - np.argmax(mask[::-1])
        return State(self.offset + int(i0), self.values[i0:i1].copy())


def _apply_diagonals(diag: dict, x: np.ndarray) -> np.ndarray:
    # rows and x share the same index range; columns m+off gather from x
    n = len(x)
    y = np.zeros(n, dtype=complex)
    for off, arr in diag.items():
        if off >= 0:
            y[:n - off] += arr[:n - off] * x[off:]
        else:
            y[-off:] += arr[-off:] * x[:off]
    return y


def _apply_diagonals_adjoint(diag: dict, x: np.ndarray, conj: bool = True) -> np.ndarray:
    # y[m] = sum_j Ebar(j, m) x[j]; E(j, m) lives on diagonal off = m - j
    n = len(x)
    y = np.zeros(n, dtype=complex)
    for off, arr in diag.items():
        a = np.conj(arr) if conj else arr
        if off >= 0:
            y[off:] += a[:n - off] * x[:n - off]
        else:
            y[:off] += a[-off:] * x[-off:]
    return y


def _padded_window(seq: VerblunskySequence, state: State) -> tuple:
    lo = state.offset - 2
    hi = state.offset + len(state.values) + 2
    x = np.zeros(hi - lo, dtype=complex)
    x[2:2 + len(state.values)] = state.values
    return lo, hi, x


def apply_extended(seq: VerblunskySequence, state: State) -> State:
    """Apply the extended matrix to a finitely supported vector, exactly."""
    if not seq.is_two_sided:
        raise SupportError("extended application needs a two-sided sequence")
    lo, hi, x = _padded_window(seq, state)
    diag = band_diagonals(seq.alpha, lo, hi)
    return State(lo, _apply_diagonals(diag, x)).trimmed(0.0)


def apply_extended_adjoint(seq: VerblunskySequence, state: State) -> State:
    """Apply the adjoint (= inverse) of the extended matrix."""
    if not seq.is_two_sided:
        raise SupportError("extended application needs a two-sided sequence")
    lo, hi, x = _padded_window(seq, state)
    diag = band_diagonals(seq.alpha, lo, hi)
    return State(lo, _apply_diagonals_adjoint(diag, x, conj=True)).trimmed(0.0)


def apply_extended_transpose(seq: VerblunskySequence, state: State) -> State:
    lo, hi, x = _padded_window(seq, state)
    diag = band_diagonals(seq.alpha, lo, hi)
    return State(lo, _apply_diagonals_adjoint(diag, x, conj=False)).trimmed(0.0)


def split_at_origin(seq: VerblunskySequence):
    """Split a two-sided sequence at the origin (boundary value a(-1) = -1).

    Returns (right, left):  right carries a(0), a(1), ... unchanged; left is
    the negative block in standard one-sided form, which works out to
    left(j) = conj(a(-2-j)) after the diagonal gauge (-1)^j.  The gauge fixes
    the first basis vector, so spectral data of the left block is preserved.
    """
    if not seq.is_two_sided:
        raise SupportError("split_at_origin needs a two-sided sequence")
    right = ShiftedSequence(seq, 0, "half")
    left = ConjugateReflectedSequence(seq, -2, "half")
    return right, left


def resolvent_oracle_block(seq: VerblunskySequence, z: complex, half_width: int,
                           xs, ys) -> np.ndarray:
    """Entries (x, y) of the inverse of the closed truncation of (E - z)."""
    if z == 0:
        raise SpectralPointError("z = 0 is excluded")
    W = int(half_width)
    xs = list(xs)
    ys = list(ys)
    limit = W // 2
    if any(abs(x) > limit for x in xs) or any(abs(y) > limit for y in ys):
        raise WindowError("requested entries outside the safe interior")
    window = extended_window(seq, -W, W, closure=1.0)
    ab = window.banded()
    n = 2 * W + 1
    ab[2, :] -= z
    rhs = np.zeros((n, len(ys)), dtype=complex)
    for j, y in enumerate(ys):
        rhs[y + W, j] = 1.0
    try:
        sol = scipy.linalg.solve_banded((2, 2), ab, rhs)
    except np.linalg.LinAlgError as exc:
        raise SingularError(str(exc)) from exc
    if not np.all(np.isfinite(sol)):
        raise SingularError("truncated system numerically singular")
    return sol[[x + W for x in xs], :]


def resolvent_oracle(seq: VerblunskySequence, z: complex, half_width: int,
                     x: int, y: int) -> complex:
    return complex(resolvent_oracle_block(seq, z, half_width, [x], [y])[0, 0])


@dataclass(frozen=True)
class BasisReachReport:
    residuals: dict

    @property
    def max_residual(self) -> float:
        return max(self.residuals.values())


def spectral_basis_reach(seq: VerblunskySequence, n: int) -> BasisReachReport:
    """Rebuild the four neighbours of the pair (delta_{2n}, delta_{2n+1})
    from band applications, reporting sup-norm reconstruction residuals.

    Each reconstruction follows the explicit eliminations in the spectral
    basis argument; one inverse application enters through the adjoint.
    """
    if not seq.is_two_sided:
        raise SupportError("spectral basis check needs a two-sided sequence")
    a = {k: seq.alpha(k) for k in range(2 * n - 2, 2 * n + 3)}
    r = {k: seq.rho(k) for k in range(2 * n - 2, 2 * n + 3)}
    for k in (2 * n - 2, 2 * n - 1, 2 * n + 1, 2 * n + 2):
        if r[k] <= 1e-12:
            raise DegenerateRhoError(f"rho({k}) vanished")

    def E(st):
        return apply_extended(seq, st)

    def Einv(st):
        return apply_extended_adjoint(seq, st)

    def combo(*pairs):
        entries = {}
        for coeff, st in pairs:
            for i, v in enumerate(st.values):
                key = st.offset + i
                entries[key] = entries.get(key, 0.0) + coeff * v
        return State.from_dict(entries)

    def residual(st: State, target: int) -> float:
        err = dict((st.offset + i, v) for i, v in enumerate(st.values))
        err[target] = err.get(target, 0.0) - 1.0
        return max(abs(v) for v in err.values())

    res = {}

    # delta_{2n+2}: invert the combination that lands on span{2n, 2n+1}
    y = combo((r[2 * n] / r[2 * n + 1], State.delta(2 * n)),
              (-a[2 * n] / r[2 * n + 1], State.delta(2 * n + 1)))
    rec = combo((1.0, Einv(y)),
                (-a[2 * n + 1] / r[2 * n + 1], State.delta(2 * n + 1)))
    res["2n+2"] = residual(rec, 2 * n + 2)

    # delta_{2n+3}: eliminate the left terms of E d_{2n+1}, E d_{2n+2}
    lhs = combo((1.0, E(State.delta(2 * n + 1))),
                (-a[2 * n + 1].conjugate() / r[2 * n + 1],
                 E(State.delta(2 * n + 2))))
    rec = combo((r[2 * n + 1] / r[2 * n + 2], lhs),
                (-a[2 * n + 2].conjugate() / r[2 * n + 2],
                 State.delta(2 * n + 2)))
    res["2n+3"] = residual(rec, 2 * n + 3)

    # delta_{2n-1}: E d_{2n-1} lies in known span; apply the inverse
    rhs = combo((a[2 * n - 1].conjugate() / r[2 * n - 1], E(State.delta(2 * n))),
                (a[2 * n].conjugate() / r[2 * n - 1], State.delta(2 * n)),
                (r[2 * n] / r[2 * n - 1], State.delta(2 * n + 1)))
    res["2n-1"] = residual(Einv(rhs), 2 * n - 1)

    # delta_{2n-2}: eliminate the right terms of E d_{2n-1}, E d_{2n}
    yp = combo((a[2 * n - 1] / r[2 * n - 1], E(State.delta(2 * n - 1))),
               (1.0, E(State.delta(2 * n))))
    rec = combo((r[2 * n - 1] / r[2 * n - 2], yp),
                (a[2 * n - 2] / r[2 * n - 2], State.delta(2 * n - 1)))
    res["2n-2"] = residual(rec, 2 * n - 2)

    return BasisReachReport(res)


def evolve_walk(seq: VerblunskySequence, psi0: State, k: int) -> State:
    """k-fold band application; the support grows by at most two per step."""
    if k < 0:
        raise ValueError("k must be nonnegative")
    if k == 0:
        return State(psi0.offset, psi0.values.copy())
    lo = psi0.offset - 2 * k - 2
    hi = psi0.offset + len(psi0.values) + 2 * k + 2
    diag = band_diagonals(seq.alpha, lo, hi)
    x = np.zeros(hi - lo, dtype=complex)
    x[psi0.offset - lo: psi0.offset - lo + len(psi0.values)] = psi0.values
    for _ in range(k):
        x = _apply_diagonals(diag, x)
    return State(lo, x).trimmed(0.0)


def write_state_csv(state: State, path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["n", "re", "im", "abs2"])
        for i, v in enumerate(state.values):
            writer.writerow([state.offset + i, repr(float(v.real)),
                             repr(float(v.imag)), repr(float(abs(v) ** 2))])


def write_bands_csv(dense: np.ndarray, path, row_offset: int = 0) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["row", "col", "re", "im"])
        rows, cols = dense.shape
        for i in range(rows):
            for j in range(cols):
                v = dense[i, j]
                if v != 0:
                    writer.writerow([i + row_offset, j + row_offset,
                                     repr(float(v.real)), repr(float(v.imag))])
