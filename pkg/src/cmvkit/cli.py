"""Command-line front end.

Subcommands: coeffs | spectrum | measure | holder | walk | verify.
Every run writes into a timestamped directory under --out with the fully
resolved configuration echoed as config.json, so results are reproducible
from the emitted artifacts alone.
"""

from __future__ import annotations

import argparse
import dataclasses
import datetime
import json
import math
import sys
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import caratheodory as cara
from . import coeffs, operator, spectral, tracemap, transfer, verify
from .errors import CMVKitError


@dataclass(frozen=True)
class RunConfig:
    command: str
    model: str = "sturmian"            # constant | sturmian | explicit
    value: complex = 0.0               # constant model coefficient
    alphabet: tuple = (0.5, -0.5)      # sturmian letters
    omega: float = coeffs.GOLDEN_MEAN
    coeff_file: str = ""               # explicit model source
    left_value: complex = 0.0          # two-sided filler on the left half
    left_model: str = ""               # "constant" | "word"; "" = per-command default
    theta_count: int = 1024
    r_list: tuple = (0.9, 0.99, 0.999)
    eps_list: tuple = (1e-3, 3.16e-3, 1e-2, 3.16e-2, 1e-1)
    depth: int = 1 << 15
    window: int = 400
    n_range: tuple = (0, 64)
    trace_levels: int = 10
    steps: int = 1000
    snapshots: int = 5
    start: int = 0
    theta: float | None = None
    seed: int = 0
    out: str = "runs"
    criteria: tuple = ()

    def validated(self) -> "RunConfig":
        if self.model == "constant" and abs(self.value) >= 1.0:
            raise CMVKitError(f"|alpha| = {abs(self.value)} >= 1")
        if self.model == "sturmian":
            if not 0.0 < self.omega < 1.0:
                raise CMVKitError(f"omega = {self.omega} outside (0, 1)")
            if any(abs(a) >= 1.0 for a in self.alphabet):
                raise CMVKitError("alphabet letter outside the unit disk")
        if any(not 0.0 < r < 1.0 for r in self.r_list):
            raise CMVKitError("every r must lie in (0, 1)")
        if any(not 0.0 < e < math.pi for e in self.eps_list):
            raise CMVKitError("every eps must lie in (0, pi)")
        if self.theta_count < 8:
            raise CMVKitError("theta-count must be at least 8")
        if self.steps < 0 or self.depth < 1 or self.window < 16:
            raise CMVKitError("steps/depth/window out of range")
        return self


def _parse_complex(text: str) -> complex:
    return complex(text.replace(" ", "").replace("i", "j"))


def _one_sided_model(cfg: RunConfig):
    if cfg.model == "constant":
        return coeffs.make_constant(cfg.value)
    if cfg.model == "sturmian":
        return coeffs.make_sturmian(cfg.alphabet[0], cfg.alphabet[1], cfg.omega)
    if cfg.model == "explicit":
        values = []
        with open(cfg.coeff_file, encoding="utf-8") as fh:
            for line in fh:
                line = line.strip()
                if line and not line.startswith("#"):
                    values.append(_parse_complex(line.split(",")[0]))
        return coeffs.make_explicit(values)
    raise CMVKitError(f"unknown model {cfg.model!r}")


def _two_sided_model(cfg: RunConfig, default_left: str = "constant"):
    left = cfg.left_model or default_left
    if left == "word" and cfg.model == "sturmian":
        # continue the Sturmian formula to negative indices
        return coeffs.make_sturmian(cfg.alphabet[0], cfg.alphabet[1],
                                    cfg.omega, support="full")
    return coeffs.extend_two_sided(_one_sided_model(cfg),
                                   coeffs.make_constant(cfg.left_value))


def _run_dir(cfg: RunConfig) -> Path:
    stamp = datetime.datetime.now().strftime("%Y%m%d-%H%M%S")
    path = Path(cfg.out) / f"{cfg.command}-{stamp}"
    n = 0
    while path.exists():
        n += 1
        path = Path(cfg.out) / f"{cfg.command}-{stamp}-{n}"
    path.mkdir(parents=True)

    def encode(v):
        if isinstance(v, complex):
            return str(v)
        if isinstance(v, (list, tuple)):
            return [encode(x) for x in v]
        return v

    payload = {k: encode(v) for k, v in dataclasses.asdict(cfg).items()}
    with open(path / "config.json", "w", encoding="utf-8") as fh:
        json.dump(payload, fh, indent=2)
    return path


def cmd_coeffs(cfg: RunConfig) -> int:
    out = _run_dir(cfg)
    seq = _two_sided_model(cfg)
    lo, hi = cfg.n_range
    coeffs.write_coeffs_csv(seq, lo, hi, out / "coefficients.csv")
    matrix = operator.build_finite_cmv(seq, max(hi - max(lo, 0), 8)).dense()
    operator.write_bands_csv(matrix, out / "bands.csv")
    print(f"wrote {out / 'coefficients.csv'} and {out / 'bands.csv'}")
    return 0


def cmd_spectrum(cfg: RunConfig) -> int:
    out = _run_dir(cfg)
    cf = tracemap.golden_cf(max(22, cfg.trace_levels + 2))
    thetas = np.linspace(0.0, 2.0 * math.pi, cfg.theta_count, endpoint=False)
    alphabet = cfg.alphabet if cfg.model == "sturmian" else (cfg.value, cfg.value)
    I_sup = tracemap.invariant_sup(alphabet, cf, thetas)
    K = tracemap.default_trace_bound(I_sup)
    sweep = tracemap.orbit_sweep(alphabet, cf, np.exp(1j * thetas), cfg.trace_levels)
    mask = tracemap.spectrum_approx(alphabet, cf, thetas, cfg.trace_levels, K)
    tracemap.write_orbit_csv(sweep, cf, thetas, mask, out / "orbit_atlas.csv")
    seed_sups = tuple(float(np.max(sweep.seed_norms[i])) for i in range(3))
    gc = tracemap.gamma_constants(alphabet, cf, I_sup, seed_sups)
    tracemap.constants_to_json(gc, out / "growth_constants.json")
    print(f"mask fraction {mask.mean():.4f}; beta = {gc.beta:.3e}")
    print(f"wrote {out / 'orbit_atlas.csv'} and {out / 'growth_constants.json'}")
    return 0


def cmd_measure(cfg: RunConfig) -> int:
    out = _run_dir(cfg)
    seq = _two_sided_model(cfg)
    thetas = np.linspace(0.0, 2.0 * math.pi, cfg.theta_count, endpoint=False)
    profiles = [spectral.lambda_r_profile(seq, r, thetas, max_depth=cfg.depth)
                for r in cfg.r_list]
    spectral.write_density_csv(profiles, out / "density.csv")
    for r, p in zip(cfg.r_list, profiles):
        print(f"r = {r}: total mass {p.total_mass:.6f}, "
              f"min density {p.density.min():.3e}")
    print(f"wrote {out / 'density.csv'}")
    return 0


def cmd_holder(cfg: RunConfig) -> int:
    out = _run_dir(cfg)
    seq2 = _two_sided_model(cfg, default_left="word")
    seq1 = _one_sided_model(cfg)
    eps = np.asarray(sorted(cfg.eps_list))
    thetas = np.linspace(0.0, 2.0 * math.pi, cfg.theta_count, endpoint=False)
    profiles = [spectral.lambda_r_profile(seq2, 1.0 - e, thetas,
                                          max_depth=cfg.depth) for e in eps]
    if cfg.theta is not None:
        theta0 = float(cfg.theta)
    else:
        alphabet = cfg.alphabet if cfg.model == "sturmian" else (cfg.value, cfg.value)
        theta0 = float(verify.certified_spectrum_points(alphabet, 1)[0])
    fit = spectral.holder_exponent(profiles, theta0, eps)
    spectral.write_arcmass_csv(fit, out / "arc_mass.csv")
    Ls = [2 ** k for k in range(6, 14)]
    lx = np.log(np.array(Ls, dtype=float))
    slopes = []
    env_lo, env_hi = math.inf, -math.inf
    z = complex(np.exp(1j * theta0))
    for lam in (1.0, 1j):
        for sign in (1.0, -1.0):
            prof = transfer.norm_profile_batch(
                seq1, [z], [[1.0, sign * np.conj(lam)]], Ls[-1])[0]
            slopes.append(float(np.polyfit(lx, 0.5 * np.log(prof[Ls]), 1)[0]))
            pfit = transfer.fit_power_law([(L, math.sqrt(prof[L])) for L in Ls])
            env_lo = min(env_lo, pfit.gamma_low)
            env_hi = max(env_hi, pfit.gamma_high)
    g_lo, g_hi = min(slopes), max(slopes)
    prof0 = transfer.norm_profile_batch(seq1, [z], [[1.0, 1.0]], Ls[-1])[0]
    norm_samples = [(L, math.sqrt(prof0[L])) for L in Ls]
    transfer.write_norm_csv(norm_samples, out / "norm_samples.csv")
    transfer.fit_to_json(transfer.fit_power_law(norm_samples),
                         out / "norm_fit.json")
    rows = []
    for r in cfg.r_list:
        F0 = cara.schur_eval_F_adaptive(seq1, r * z)
        xr = cara.solve_x_of_r(seq1, 1.0, z, r).x
        ratio = cara.jl_ratio(seq1, 1.0, z, r)
        rows.append((r, theta0, F0, xr, ratio, cara.mobius_sup(F0)))
    cara.write_boundary_csv(rows, out / "boundary.csv")
    record = {
        "theta": theta0,
        "beta_hat": fit.beta_hat,
        "envelope_beta": fit.envelope_beta,
        "gamma_low": g_lo,
        "gamma_high": g_hi,
        "gamma_cross_check": 2.0 * g_lo / (g_lo + g_hi),
        "gamma_envelope_cross_check": 2.0 * env_lo / (env_lo + env_hi),
    }
    with open(out / "holder.json", "w", encoding="utf-8") as fh:
        json.dump(record, fh, indent=2)
    print(json.dumps(record, indent=2))
    print(f"wrote {out / 'arc_mass.csv'}, {out / 'boundary.csv'}, "
          f"{out / 'norm_samples.csv'} and {out / 'holder.json'}")
    return 0


def cmd_walk(cfg: RunConfig) -> int:
    out = _run_dir(cfg)
    seq = _two_sided_model(cfg)
    kmax = cfg.steps
    snaps = sorted({int(round(k)) for k in
                    np.linspace(0, kmax, max(cfg.snapshots, 2))})
    cur = operator.State.delta(cfg.start)
    done = 0
    for k in snaps:
        cur = operator.evolve_walk(seq, cur, k - done)
        done = k
        operator.write_state_csv(cur, out / f"state_{k:06d}.csv")
        print(f"k = {k}: norm {cur.norm():.12f}, support "
              f"[{cur.offset}, {cur.offset + len(cur.values) - 1}]")
    print(f"wrote {len(snaps)} snapshots into {out}")
    return 0


def cmd_verify(cfg: RunConfig) -> int:
    out = _run_dir(cfg)
    numbers = set(cfg.criteria) if cfg.criteria else None
    results = verify.run_all(numbers=numbers, echo=True, window=cfg.window)
    record = verify.report_to_json(results, out / "verification.json")
    print(f"wrote {out / 'verification.json'}")
    return 0 if record["all_hard_passed"] else 1


_COMMANDS = {
    "coeffs": cmd_coeffs,
    "spectrum": cmd_spectrum,
    "measure": cmd_measure,
    "holder": cmd_holder,
    "walk": cmd_walk,
    "verify": cmd_verify,
}


def _add_common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", type=str, default=None,
                   help="JSON file with RunConfig fields; flags override it")
    p.add_argument("--out", type=str, default=None, help="output directory")
    p.add_argument("--model", choices=("constant", "sturmian", "explicit"),
                   default=None)
    p.add_argument("--value", type=str, default=None,
                   help="constant-model coefficient, e.g. 0.5 or 0.3+0.2j")
    p.add_argument("--alphabet", type=str, default=None,
                   help="two letters a,b for the sturmian model")
    p.add_argument("--omega", type=float, default=None)
    p.add_argument("--coeff-file", type=str, default=None)
    p.add_argument("--theta-count", type=int, default=None)
    p.add_argument("--r", type=str, default=None, help="comma list of radii")
    p.add_argument("--eps", type=str, default=None, help="comma list of arc scales")
    p.add_argument("--depth", type=int, default=None)
    p.add_argument("--window", type=int, default=None)
    p.add_argument("--theta", type=float, default=None)
    p.add_argument("--seed", type=int, default=None)


def _build_config(command: str, args: argparse.Namespace) -> RunConfig:
    fields = {"command": command}
    if args.config:
        with open(args.config, encoding="utf-8") as fh:
            fields.update(json.load(fh))
    overrides = {
        "out": args.out,
        "model": args.model,
        "omega": args.omega,
        "coeff_file": getattr(args, "coeff_file", None),
        "theta_count": getattr(args, "theta_count", None),
        "depth": args.depth,
        "window": args.window,
        "theta": args.theta,
        "seed": args.seed,
    }
    if args.value is not None:
        overrides["value"] = _parse_complex(args.value)
    if args.alphabet is not None:
        a, b = args.alphabet.split(",")
        overrides["alphabet"] = (_parse_complex(a), _parse_complex(b))
    if args.r is not None:
        overrides["r_list"] = tuple(float(x) for x in args.r.split(","))
    if args.eps is not None:
        overrides["eps_list"] = tuple(float(x) for x in args.eps.split(","))
    for extra in ("steps", "snapshots", "criteria", "n_range",
                  "trace_levels", "start"):
        if hasattr(args, extra) and getattr(args, extra) is not None:
            fields[extra] = getattr(args, extra)
    fields.update({k: v for k, v in overrides.items() if v is not None})
    if "alphabet" in fields and not isinstance(fields["alphabet"], tuple):
        fields["alphabet"] = tuple(_parse_complex(str(x))
                                   for x in fields["alphabet"])
    if "value" in fields and isinstance(fields["value"], str):
        fields["value"] = _parse_complex(fields["value"])
    known = {f.name for f in dataclasses.fields(RunConfig)}
    unknown = set(fields) - known
    if unknown:
        raise CMVKitError(f"unknown config fields: {sorted(unknown)}")
    return RunConfig(**fields).validated()


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="cmvkit",
        description="spectral toolkit for CMV and extended CMV operators")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("coeffs", help="dump Verblunsky coefficients as CSV")
    _add_common(p)
    p.add_argument("--n-range", type=str, default=None, help="lo,hi index range")

    p = sub.add_parser("spectrum", help="trace-map atlas and growth constants")
    _add_common(p)
    p.add_argument("--trace-levels", type=int, default=None)

    p = sub.add_parser("measure", help="boundary density profiles")
    _add_common(p)

    p = sub.add_parser("holder", help="arc-mass Hölder fit with cross-check")
    _add_common(p)

    p = sub.add_parser("walk", help="evolve a quantum walk and dump snapshots")
    _add_common(p)
    p.add_argument("--steps", type=int, default=None)
    p.add_argument("--snapshots", type=int, default=None)
    p.add_argument("--start", type=int, default=None,
                   help="site of the initial delta state")

    p = sub.add_parser("verify", help="run the acceptance criteria")
    _add_common(p)
    p.add_argument("--criteria", type=str, default=None,
                   help="comma list of criterion numbers (default: all)")

    args = parser.parse_args(argv)
    if getattr(args, "n_range", None) is not None:
        lo, hi = args.n_range.split(",")
        args.n_range = (int(lo), int(hi))
    if getattr(args, "criteria", None) is not None:
        args.criteria = tuple(int(x) for x in args.criteria.split(","))
    try:
        cfg = _build_config(args.command, args)
        return _COMMANDS[args.command](cfg)
    except CMVKitError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
