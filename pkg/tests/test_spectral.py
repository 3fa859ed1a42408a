import cmath
import math

import numpy as np
import pytest

from cmvkit import caratheodory as cara
from cmvkit import coeffs, operator, spectral
from cmvkit.errors import (InsufficientDataError, SpectralPointError,
                           SupportError, WindowError)

GOLDEN = coeffs.GOLDEN_MEAN

FREE2 = coeffs.extend_two_sided(coeffs.make_constant(0.0),
                                coeffs.make_constant(0.0))
FIB2 = coeffs.extend_two_sided(coeffs.make_sturmian(0.5, -0.5, GOLDEN),
                               coeffs.make_constant(0.0))


def random_two_sided(seed=11, n=2048, lo=0.1, hi=0.7):
    rng = np.random.default_rng(seed)
    pos = coeffs.make_explicit(rng.uniform(lo, hi, n)
                               * np.exp(1j * rng.uniform(0, 2 * math.pi, n)))
    neg = coeffs.make_explicit(rng.uniform(lo, hi, n)
                               * np.exp(1j * rng.uniform(0, 2 * math.pi, n)))
    return coeffs.extend_two_sided(pos, neg)


RANDOM2 = random_two_sided()


def test_convention_resolution():
    assert spectral.resolve_m_minus_convention(RANDOM2) == "split-site"
    assert spectral.resolve_m_minus_convention(FREE2) == "split-site"


@pytest.mark.parametrize("z", [0.45 + 0.2j, 0.9 * cmath.exp(0.7j),
                               1.1 * cmath.exp(2.1j)])
def test_gz_matches_oracle_random_model(z):
    ctx = spectral.build_gz_context(RANDOM2, z, 200)
    xs = list(range(-4, 5))
    G = operator.resolvent_oracle_block(RANDOM2, z, 300, xs, xs)
    floor = 1e-9 * float(np.max(np.abs(G)))
    for i, x in enumerate(xs):
        for j, y in enumerate(xs):
            g = spectral.gz_entry(ctx, x, y)
            assert abs(g - G[i, j]) / max(abs(G[i, j]), floor) < 1e-8


def test_corner_trace_identity_and_symmetry():
    for z in (0.7 * cmath.exp(0.3j), 0.45 + 0.2j, 1.15 * cmath.exp(1.9j)):
        ctx = spectral.build_gz_context(RANDOM2, z, 160)
        ct = spectral.corner_trace(ctx)
        diag = spectral.gz_entry(ctx, 0, 0) + spectral.gz_entry(ctx, 1, 1)
        assert abs(ct - diag) / abs(diag) < 1e-9
    # real coefficients and real z give a real corner trace
    rng = np.random.default_rng(3)
    real_seq = coeffs.extend_two_sided(
        coeffs.make_explicit(rng.uniform(-0.6, 0.6, 256)),
        coeffs.make_explicit(rng.uniform(-0.6, 0.6, 256)))
    ctx = spectral.build_gz_context(real_seq, 0.55, 120)
    assert abs(spectral.corner_trace(ctx).imag) < 1e-12


def test_free_case_entries():
    ctx = spectral.build_gz_context(FREE2, 0.5, 100)
    assert abs(spectral.corner_trace(ctx)) < 1e-14
    assert abs(spectral.F_extended(ctx) - 1.0) < 1e-14
    assert abs(spectral.gz_entry(ctx, 2, 0) - 1.0) < 1e-12
    assert abs(spectral.gz_entry(ctx, 0, 2)) < 1e-12
    assert abs(spectral.gz_entry(ctx, 0, 0)) < 1e-12
    assert abs(spectral.gz_entry(ctx, 1, 1)) < 1e-12
    # lower even part G(2j, 2m) = z^(j-m-1)
    assert abs(spectral.gz_entry(ctx, 6, 0) - 0.5 ** 2) < 1e-12


def test_moment_normalization_near_origin():
    ctx = spectral.build_gz_context(FIB2, 1e-5, 64)
    assert abs(spectral.F_extended(ctx) - 1.0) < 1e-4


def test_positivity_grid():
    thetas = np.linspace(0.0, 2 * math.pi, 32, endpoint=False)
    for r in np.linspace(0.1, 0.9, 8):
        F = spectral.F_extended_batch(FIB2, r * np.exp(1j * thetas))
        assert np.all(F.real > 0.0)


def test_context_normalization_and_decay():
    z = 0.5 * cmath.exp(0.4j)
    ctx = spectral.build_gz_context(FIB2, z, 200)
    assert ctx.normalization_mismatch < 1e-9
    # origin values satisfy the stated normalizations exactly
    assert abs(ctx.u_plus[0] - ctx.z * (1 + ctx.F_plus)) < 1e-12
    assert abs(ctx.v_plus[0] - (-1 + ctx.F_plus)) < 1e-12
    assert abs(ctx.u_minus[0] - ctx.z * (1 + ctx.M_minus)) < 1e-12
    assert abs(ctx.v_minus[0] - (-1 + ctx.M_minus)) < 1e-12
    # u_plus decays toward +inf at rate |z| per double step
    mags = [abs(ctx.u_plus[n]) + abs(ctx.u_plus[n + 1]) for n in (20, 40, 60)]
    ratio = (mags[2] / mags[0]) ** (1.0 / 40.0)
    assert abs(ratio - math.sqrt(abs(z))) < 0.1
    # residual of the recurrence on the stored window, locally normalized
    for n in range(-20, 20):
        row = 0.0
        for off in (-2, -1, 0, 1, 2):
            diag = operator.band_diagonals(FIB2.alpha, n, n + 1)
            row += complex(diag[off][0]) * ctx.u_plus.get(n + off, 0.0)
        scale = max(abs(ctx.u_plus.get(n, 0.0)), 1e-30)
        assert abs(row - z * ctx.u_plus[n]) / scale < 1e-9


def test_v_solutions_satisfy_transpose_equation():
    # the v families are built from their own two-site recurrences; check
    # them against an independent band application of the transpose
    z = 0.6 * cmath.exp(0.9j)
    ctx = spectral.build_gz_context(RANDOM2, z, 160)
    for sol in (ctx.v_plus, ctx.v_minus):
        vec = operator.State.from_dict(
            {n: sol[n] for n in range(-30, 31)})
        out = operator.apply_extended_transpose(RANDOM2, vec)
        for n in range(-25, 26):
            scale = max(abs(sol[n]), 1e-30)
            assert abs(out[n] - z * sol[n]) / scale < 1e-9


def test_guards():
    with pytest.raises(SpectralPointError):
        spectral.build_gz_context(FREE2, 0.0, 100)
    with pytest.raises(SpectralPointError):
        spectral.build_gz_context(FREE2, cmath.exp(0.3j) * 1.0001, 100)
    with pytest.raises(SupportError):
        spectral.build_gz_context(coeffs.make_constant(0.0), 0.5, 100)
    ctx = spectral.build_gz_context(FREE2, 0.5, 100)
    with pytest.raises(WindowError):
        spectral.gz_entry(ctx, 10 ** 4, 0)


def test_free_profile_uniform():
    thetas = np.linspace(0.0, 2 * math.pi, 128, endpoint=False)
    prof = spectral.lambda_r_profile(FREE2, 0.9, thetas)
    assert np.max(np.abs(prof.density - 1.0 / (2 * math.pi))) < 1e-12
    assert abs(prof.total_mass - 1.0) < 1e-12


def test_fibonacci_profile_mass():
    thetas = np.linspace(0.0, 2 * math.pi, 4096, endpoint=False)
    prof = spectral.lambda_r_profile(FIB2, 0.99, thetas)
    assert abs(prof.total_mass - 1.0) < 1e-3
    assert prof.density.min() > -1e-12


def test_weak_convergence_probe():
    thetas = np.linspace(0.0, 2 * math.pi, 1024, endpoint=False)
    theta0, eps = 0.25, 0.5
    masses = []
    for r in (0.9, 0.99, 0.999):
        prof = spectral.lambda_r_profile(FIB2, r, thetas)
        masses.append(spectral.arc_mass(prof, theta0, eps))
    assert abs(masses[2] - masses[1]) < abs(masses[1] - masses[0])
    assert abs(masses[2] - masses[1]) < 5e-3


def test_arc_mass_wrapping():
    thetas = np.linspace(0.0, 2 * math.pi, 256, endpoint=False)
    prof = spectral.lambda_r_profile(FREE2, 0.8, thetas)
    direct = spectral.arc_mass(prof, 0.0, 0.3)
    wrapped = spectral.arc_mass(prof, 2 * math.pi, 0.3)
    assert abs(direct - wrapped) < 1e-12
    assert abs(direct - 0.6 / (2 * math.pi)) < 1e-12


def test_free_arc_bound():
    # the proof-style bound: arc mass <= 2 eps (Re F((1-eps) z) + 1)
    thetas = np.linspace(0.0, 2 * math.pi, 512, endpoint=False)
    for theta0 in (0.0, 1.2, 3.9):
        for eps in (1e-3, 1e-2, 1e-1):
            prof = spectral.lambda_r_profile(FREE2, 1 - eps, thetas)
            mass = spectral.arc_mass(prof, theta0, eps)
            F = spectral.F_extended_batch(
                FREE2, np.array([(1 - eps) * cmath.exp(1j * theta0)]))[0]
            assert mass <= 2 * eps * (F.real + 1.0)


def test_free_holder_exponent():
    thetas = np.linspace(0.0, 2 * math.pi, 512, endpoint=False)
    eps = np.geomspace(1e-3, 1e-1, 6)
    profiles = [spectral.lambda_r_profile(FREE2, 1 - e, thetas) for e in eps]
    fit = spectral.holder_exponent(profiles, 2.0, eps)
    assert abs(fit.beta_hat - 1.0) < 0.02
    assert abs(fit.envelope_beta - 1.0) < 0.02
    with pytest.raises(InsufficientDataError):
        spectral.holder_exponent(profiles[:2], 2.0, eps[:2])


def test_corner_vs_mobius_diagnostic():
    # |G00 + G11| is controlled by the boundary Möbius supremum of F_plus;
    # the constant is reported rather than asserted, but it must be finite
    # and stable across the sampled radii
    right, _ = operator.split_at_origin(FIB2)
    worst = 0.0
    for r in (0.9, 0.95, 0.99):
        for theta in np.linspace(0.0, 2 * math.pi, 16, endpoint=False):
            z = r * cmath.exp(1j * theta)
            ctx = spectral.build_gz_context(FIB2, z, 64)
            ratio = abs(spectral.corner_trace(ctx)) / cara.mobius_sup(ctx.F_plus)
            worst = max(worst, ratio)
    assert math.isfinite(worst)
    print(f"fitted corner/mobius constant C4 = {worst:.4f}")
