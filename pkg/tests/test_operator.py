import cmath
import math

import numpy as np
import pytest

from cmvkit import coeffs, operator
from cmvkit.errors import (ModulusError, SizeError, SpectralPointError,
                           SupportError, WindowError)

GOLDEN = coeffs.GOLDEN_MEAN


def random_half(rng, n, rad=0.8):
    mods = rng.uniform(0.0, rad, n)
    phases = rng.uniform(0.0, 2.0 * math.pi, n)
    return coeffs.make_explicit(mods * np.exp(1j * phases))


def random_two_sided(rng, n=256, rad=0.8):
    return coeffs.extend_two_sided(random_half(rng, n, rad),
                                   random_half(rng, n, rad))


FREE2 = coeffs.extend_two_sided(coeffs.make_constant(0.0),
                                coeffs.make_constant(0.0))


def test_free_finite_cmv_first_column():
    C = operator.build_finite_cmv(coeffs.make_constant(0.0), 8).dense()
    col = np.zeros(8)
    col[1] = 1.0
    assert np.allclose(C[:, 0], col)


def test_finite_cmv_unitary():
    rng = np.random.default_rng(1)
    seq = random_half(rng, 49, rad=0.9)
    C = operator.build_finite_cmv(seq, 50, cmath.exp(0.3j)).dense()
    eye = np.eye(50)
    assert np.max(np.abs(C.conj().T @ C - eye)) < 1e-12
    assert np.max(np.abs(C @ C.conj().T - eye)) < 1e-12


def test_finite_cmv_validation():
    with pytest.raises(ModulusError):
        operator.build_finite_cmv(coeffs.make_constant(0.0), 8, 1.2)
    with pytest.raises(SizeError):
        operator.build_finite_cmv(coeffs.make_constant(0.0), 1)


def test_band_pattern_matches_theta_factorization():
    # independent construction: E = L M with 2x2 rotation-like blocks
    # Theta(j) = [[conj(a_j), rho_j], [rho_j, -a_j]] placed at (j, j+1),
    # L carrying even j and M odd j
    rng = np.random.default_rng(2)
    seq = random_two_sided(rng, 32)
    lo, hi = -10, 11
    pad = 4
    n = hi - lo + 1 + 2 * pad
    Lmat = np.eye(n, dtype=complex)
    Mmat = np.eye(n, dtype=complex)
    for j in range(lo - pad, hi + pad):
        i = j - (lo - pad)
        if i + 1 >= n:
            continue
        a = seq.alpha(j)
        r = seq.rho(j)
        block = np.array([[np.conj(a), r], [r, -a]])
        target = Lmat if j % 2 == 0 else Mmat
        target[i:i + 2, i:i + 2] = block
    Efac = (Lmat @ Mmat)[pad:pad + (hi - lo + 1), pad:pad + (hi - lo + 1)]
    window = operator.extended_window(seq, lo, hi, closure=None).dense()
    assert np.max(np.abs(Efac - window)) < 1e-14


def test_extended_window_interior_matches_raw():
    rng = np.random.default_rng(3)
    seq = random_two_sided(rng, 64)
    closed = operator.extended_window(seq, -12, 12, closure=1.0).dense()
    raw = operator.extended_window(seq, -12, 12, closure=None).dense()
    assert np.max(np.abs(closed[3:-3, 3:-3] - raw[3:-3, 3:-3])) == 0.0


def test_apply_extended_free_shifts():
    out = operator.apply_extended(FREE2, operator.State.delta(2))
    assert out.offset == 0 and np.allclose(out.values, [1.0])
    out = operator.apply_extended(FREE2, operator.State.delta(1))
    assert out.offset == 3 and np.allclose(out.values, [1.0])
    zero = operator.State(0, np.zeros(3, dtype=complex))
    assert operator.apply_extended(FREE2, zero).norm() == 0.0


def test_apply_extended_isometry_and_inverse():
    rng = np.random.default_rng(4)
    seq = random_two_sided(rng)
    vec = operator.State(-7, rng.normal(size=15) + 1j * rng.normal(size=15))
    out = operator.apply_extended(seq, vec)
    assert abs(out.norm() - vec.norm()) < 1e-12 * vec.norm()
    back = operator.apply_extended_adjoint(seq, out)
    assert abs((back[-3]) - vec[-3]) < 1e-12
    diff = max(abs(back[n] - vec[n]) for n in range(-12, 12))
    assert diff < 1e-12


def test_apply_requires_two_sided():
    with pytest.raises(SupportError):
        operator.apply_extended(coeffs.make_constant(0.0),
                                operator.State.delta(0))


def test_split_at_origin_values_and_decoupling():
    rng = np.random.default_rng(5)
    seq = random_two_sided(rng, 32)
    right, left = operator.split_at_origin(seq)
    assert right.alpha(3) == seq.alpha(3)
    assert left.alpha(0) == np.conj(seq.alpha(-2))
    assert left.alpha(4) == np.conj(seq.alpha(-6))
    with pytest.raises(SupportError):
        operator.split_at_origin(right)
    # the modified operator decouples exactly at the origin
    modified = operator._closure_alpha(seq, {-1: -1.0})
    diag = operator.band_diagonals(modified, -10, 11)
    dense = operator._dense_from_diagonals(diag, -10, 11, -10, 11)
    assert np.max(np.abs(dense[:10, 10:])) == 0.0
    assert np.max(np.abs(dense[10:, :10])) == 0.0
    # and the left block is the standard matrix of the reflected
    # coefficients after the alternating-sign gauge
    block = dense[:10, :10][::-1, ::-1]
    gauge = np.diag([(-1.0) ** j for j in range(10)])
    left_matrix = operator.build_finite_cmv(left, 10, 1.0).dense()
    assert np.max(np.abs((gauge @ block @ gauge - left_matrix)[:8, :8])) < 1e-14


def test_resolvent_oracle_guards():
    with pytest.raises(SpectralPointError):
        operator.resolvent_oracle(FREE2, 0.0, 50, 0, 0)
    with pytest.raises(WindowError):
        operator.resolvent_oracle(FREE2, 0.5, 50, 40, 0)


def test_resolvent_oracle_residual():
    rng = np.random.default_rng(6)
    seq = random_two_sided(rng)
    z = 0.6 * cmath.exp(0.4j)
    W = 80
    ys = list(range(-4, 5))
    # independent dense solve for the same closed truncation
    window = operator.extended_window(seq, -W, W, closure=1.0).dense()
    A = window - z * np.eye(2 * W + 1)
    rhs = np.zeros((2 * W + 1, len(ys)), dtype=complex)
    for j, y in enumerate(ys):
        rhs[y + W, j] = 1.0
    Gfull = np.linalg.solve(A, rhs)
    resid = A @ Gfull - rhs
    assert np.max(np.abs(resid)) < 1e-10
    # the banded oracle agrees with the dense solve on the safe interior
    xs = list(range(-10, 11))
    G = operator.resolvent_oracle_block(seq, z, W, xs, ys)
    assert np.max(np.abs(G - Gfull[[x + W for x in xs], :])) < 1e-11


def test_resolvent_oracle_doubling_stability():
    rng = np.random.default_rng(7)
    seq = random_two_sided(rng, 1024)
    for z in (0.9 * cmath.exp(0.8j), 1.1 * cmath.exp(2.0j)):
        a = operator.resolvent_oracle(seq, z, 400, 2, -1)
        b = operator.resolvent_oracle(seq, z, 800, 2, -1)
        assert abs(a - b) < 1e-8


def test_spectral_basis_free_reduction():
    # with alpha = 0 the first combination collapses to a single delta
    out = operator.apply_extended(FREE2, operator.State.delta(4))
    assert out.offset == 2 and np.allclose(out.values, [1.0])
    report = operator.spectral_basis_reach(FREE2, 1)
    assert report.max_residual < 1e-15


def test_spectral_basis_random_and_near_unit():
    rng = np.random.default_rng(8)
    for n in (-2, 0, 3):
        seq = random_two_sided(rng, 64, rad=0.9)
        assert operator.spectral_basis_reach(seq, n).max_residual < 1e-10
    # conditioning probe: one coefficient nearly unimodular
    vals = [0.3] * 16
    vals[2 * 0 + 1] = 0.999999  # rho small but nonzero at 2n+1, n = 0
    seq = coeffs.extend_two_sided(coeffs.make_explicit(vals),
                                  coeffs.make_constant(0.0))
    assert operator.spectral_basis_reach(seq, 0).max_residual < 1e-8


def test_evolve_walk_basics():
    psi = operator.State.delta(1)
    same = operator.evolve_walk(FREE2, psi, 0)
    assert same.offset == 1 and np.allclose(same.values, [1.0])
    step = operator.evolve_walk(FREE2, psi, 1)
    assert step.offset == 3 and np.allclose(step.values, [1.0])
    rng = np.random.default_rng(9)
    seq = random_two_sided(rng, 2100)
    out = operator.evolve_walk(seq, operator.State.delta(0), 1000)
    assert abs(out.norm() - 1.0) < 1e-12


def test_state_csv(tmp_path):
    path = tmp_path / "state.csv"
    operator.write_state_csv(operator.State.delta(-2), path)
    lines = path.read_text().strip().splitlines()
    assert lines[0] == "n,re,im,abs2"
    assert lines[1].startswith("-2,")
