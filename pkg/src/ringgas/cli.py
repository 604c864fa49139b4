"""Command-line front end.

Subcommands: validate, limits, finite-n, converge, extremes, sample, ward.
Every artifact is written atomically (temp file + rename), carries a header
with the ensemble hash and parameter echo, and is byte-deterministic for a
fixed (config, seed).

Exit codes: 0 success, 2 config error, 3 tolerance failure,
4 numerical-consistency error.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
from concurrent.futures import ThreadPoolExecutor

import numpy as np

from . import __version__, extremes, finitekernel, limits, radialnorms, sampler, ward
from .extremes import ConsistencyError
from .potentials import DomainError, EnsembleSpec, UnsupportedError, load_spec, spec_hash

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_TOLERANCE = 3
EXIT_CONSISTENCY = 4


# ---------------------------------------------------------------------------
# output plumbing


def _fmt(v) -> str:
    if isinstance(v, float):
        return repr(v)
    return str(v)


def write_atomic(path: str, data: str) -> None:
    os.makedirs(os.path.dirname(os.path.abspath(path)), exist_ok=True)
    tmp = path + ".tmp"
    with open(tmp, "w") as fh:
        fh.write(data)
    os.replace(tmp, path)


def csv_document(header: dict, columns: list[str], rows) -> str:
    lines = [f"# {k}={_fmt(v)}" for k, v in header.items()]
    lines.append(",".join(columns))
    for row in rows:
        lines.append(",".join(_fmt(v) for v in row))
    return "\n".join(lines) + "\n"


def json_document(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=True) + "\n"


def emit_svg(series: list[tuple[str, np.ndarray, np.ndarray]],
             title: str = "") -> str:
    """Standalone deterministic SVG: one polyline per (label, x, y) series,
    axis ticks, legend in input order; non-finite points are dropped and
    counted in a comment node."""
    if not series:
        raise DomainError("emit_svg needs at least one series")
    width, height, pad = 800, 500, 60
    dropped = 0
    clean = []
    for label, xs, ys in series:
        xs = np.asarray(xs, dtype=float)
        ys = np.asarray(ys, dtype=float)
        ok = np.isfinite(xs) & np.isfinite(ys)
        dropped += int(np.sum(~ok))
        clean.append((label, xs[ok], ys[ok]))
    allx = np.concatenate([c[1] for c in clean])
    ally = np.concatenate([c[2] for c in clean])
    if allx.size == 0:
        raise DomainError("emit_svg: no finite points")
    x0, x1 = float(np.min(allx)), float(np.max(allx))
    y0, y1 = float(np.min(ally)), float(np.max(ally))
    if x1 == x0:
        x1 = x0 + 1.0
    if y1 == y0:
        y1 = y0 + 1.0

    def sx(v):
        return pad + (v - x0) / (x1 - x0) * (width - 2 * pad)

    def sy(v):
        return height - pad - (v - y0) / (y1 - y0) * (height - 2 * pad)

    colors = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"]
    out = [f'<svg xmlns="http://www.w3.org/2000/svg" viewBox="0 0 {width} {height}">']
    out.append(f"<!-- dropped_nonfinite={dropped} -->")
    if title:
        out.append(f'<text x="{width // 2}" y="24" text-anchor="middle" '
                   f'font-size="16">{title}</text>')
    out.append(f'<rect x="{pad}" y="{pad}" width="{width - 2 * pad}" '
               f'height="{height - 2 * pad}" fill="none" stroke="#000"/>')
    for i in range(5):
        xv = x0 + (x1 - x0) * i / 4
        yv = y0 + (y1 - y0) * i / 4
        out.append(f'<line x1="{sx(xv):.2f}" y1="{height - pad}" x2="{sx(xv):.2f}" '
                   f'y2="{height - pad + 6}" stroke="#000"/>')
        out.append(f'<text x="{sx(xv):.2f}" y="{height - pad + 20}" '
                   f'text-anchor="middle" font-size="11">{xv:.3g}</text>')
        out.append(f'<line x1="{pad - 6}" y1="{sy(yv):.2f}" x2="{pad}" '
                   f'y2="{sy(yv):.2f}" stroke="#000"/>')
        out.append(f'<text x="{pad - 10}" y="{sy(yv):.2f}" text-anchor="end" '
                   f'font-size="11">{yv:.3g}</text>')
    for i, (label, xs, ys) in enumerate(clean):
        color = colors[i % len(colors)]
        pts = " ".join(f"{sx(a):.2f},{sy(b):.2f}" for a, b in zip(xs, ys))
        out.append(f'<polyline points="{pts}" fill="none" stroke="{color}" '
                   f'stroke-width="1.5"/>')
        ly = pad + 16 + 18 * i
        out.append(f'<line x1="{width - pad - 150}" y1="{ly}" '
                   f'x2="{width - pad - 120}" y2="{ly}" stroke="{color}" '
                   f'stroke-width="1.5"/>')
        out.append(f'<text x="{width - pad - 114}" y="{ly + 4}" '
                   f'font-size="12">{label}</text>')
    out.append("</svg>")
    return "\n".join(out) + "\n"


def _pmap(fn, items, workers: int):
    if workers <= 1 or len(items) <= 1:
        return [fn(it) for it in items]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items))


# ---------------------------------------------------------------------------
# argument helpers


def _parse_grid(text: str) -> np.ndarray:
    try:
        lo_s, hi_s, step_s = text.split(":")
        lo, hi, step = float(lo_s), float(hi_s), float(step_s)
    except ValueError as exc:
        raise DomainError(f"grid must be lo:hi:step, got {text!r}") from exc
    if step <= 0 or hi < lo:
        raise DomainError(f"bad grid {text!r}")
    count = int(round((hi - lo) / step))
    return lo + step * np.arange(count + 1)


def _parse_ladder(text: str) -> list[int]:
    try:
        vals = [int(v) for v in text.split(",")]
    except ValueError as exc:
        raise DomainError(f"ladder must be comma-separated integers, got {text!r}") from exc
    if not vals or any(v <= 0 for v in vals):
        raise DomainError(f"bad ladder {text!r}")
    return vals


def _limit_profile_for(spec: EnsembleSpec) -> limits.LimitProfile:
    bc = spec.bc
    if bc.kind == "free":
        return limits.LimitProfile.free(spec.rho)
    if bc.kind == "interpolated":
        if math.isinf(bc.c1) and math.isinf(bc.c2):
            return limits.LimitProfile.soft_hard(spec.rho)
        return limits.LimitProfile.interpolated(spec.rho, bc.c1, bc.c2)
    if bc.kind == "hard-annulus":
        return limits.LimitProfile.hard_annulus(spec.rho, bc.tau1, bc.tau2)
    if bc.kind == "hard-disk":
        return limits.LimitProfile.hard_disk_rescaled(spec.rho, bc.tau)
    raise UnsupportedError(bc.kind)


def _variant_profile(args) -> limits.LimitProfile:
    v = args.variant
    if v == "free":
        return limits.LimitProfile.free(args.rho)
    if v == "soft-hard":
        return limits.LimitProfile.soft_hard(args.rho)
    if v == "interpolated":
        return limits.LimitProfile.interpolated(args.rho, args.c1, args.c2)
    if v == "hard-annulus":
        return limits.LimitProfile.hard_annulus(args.rho, args.tau1, args.tau2)
    if v == "hard-disk-outer":
        return limits.LimitProfile.hard_disk_outer(args.rho, args.tau)
    if v == "hard-disk-rescaled":
        return limits.LimitProfile.hard_disk_rescaled(args.rho, args.tau)
    if v == "ginibre-soft-hard":
        return limits.LimitProfile.ginibre_soft_hard()
    if v == "ginibre-hard":
        return limits.LimitProfile.ginibre_hard()
    raise DomainError(f"unknown variant {v!r}")


def _header(spec: EnsembleSpec | None, **extra) -> dict:
    h = {"tool": "ringgas", "version": __version__}
    if spec is not None:
        h["spec_hash"] = spec_hash(spec)
        h["n"] = spec.n
        h["rho"] = spec.rho
        h["bc"] = spec.bc.kind
    h.update(extra)
    return h


# ---------------------------------------------------------------------------
# subcommands


def _cmd_validate(args) -> int:
    spec = load_spec(args.spec)
    from .potentials import validate_spec
    report = validate_spec(spec)
    doc = {"spec_hash": spec_hash(spec), "passed": report.passed,
           "flags": dict(report.flags),
           "metrics": {
               "min_subharmonicity": report.min_subharmonicity,
               "g_at_one": report.g_at_one,
               "slope_at_one_minus_one": report.slope_at_one_minus_one,
               "third_derivative_ratio": report.third_derivative_ratio,
               "growth_margin": report.growth_margin,
               "rho_estimated": report.rho_estimated,
               "rho_declared": report.rho_declared,
           }}
    write_atomic(os.path.join(args.out, "validate.json"), json_document(doc))
    return EXIT_OK if report.passed else EXIT_TOLERANCE


def _cmd_limits(args) -> int:
    prof = _variant_profile(args)
    x = _parse_grid(args.grid)
    dens = np.atleast_1d(prof.density(x))
    rows = list(zip(x.tolist(), dens.tolist()))
    hdr = _header(None, variant=prof.variant, rho=prof.rho)
    write_atomic(os.path.join(args.out, "limits.csv"),
                 csv_document(hdr, ["x", "R_limit"], rows))
    if "svg" in args.formats:
        write_atomic(os.path.join(args.out, "limits.svg"),
                     emit_svg([(prof.variant, x, dens)], title="limit profile"))
    return EXIT_OK


def _cmd_finite_n(args) -> int:
    spec = load_spec(args.spec)
    table = radialnorms.norm_table(spec)
    ctx = finitekernel.kernel_context(spec, table)
    prof = _limit_profile_for(spec)
    x = _parse_grid(args.grid)
    rn = finitekernel.profile(ctx, x)
    rl = np.atleast_1d(prof.density(x))
    rows = [(float(a), float(b), float(c), float(abs(b - c)))
            for a, b, c in zip(x, rn, rl)]
    hdr = _header(spec, variant=prof.variant)
    write_atomic(os.path.join(args.out, "profile.csv"),
                 csv_document(hdr, ["x", "R_n", "R_limit", "abs_error"], rows))
    if "svg" in args.formats:
        write_atomic(os.path.join(args.out, "profile.svg"),
                     emit_svg([("finite-n", x, rn), ("limit", x, rl)],
                              title=f"n={spec.n}"))
    return EXIT_OK


def _cmd_converge(args) -> int:
    spec = load_spec(args.spec)
    ladder = _parse_ladder(args.ladder)
    x = _parse_grid(args.grid)
    prof = _limit_profile_for(spec)

    def one(n: int) -> float:
        s = spec.with_n(n)
        ctx = finitekernel.kernel_context(s, radialnorms.norm_table(s))
        return finitekernel.sup_error(ctx, prof, x)

    sups = _pmap(one, ladder, args.workers)
    rows = list(zip(ladder, sups))
    hdr = _header(spec, variant=prof.variant, ladder=args.ladder)
    write_atomic(os.path.join(args.out, "converge.csv"),
                 csv_document(hdr, ["n", "sup_error"], rows))
    decreasing = all(b < a for a, b in zip(sups[:-1], sups[1:]))
    write_atomic(os.path.join(args.out, "converge.json"), json_document(
        {"ladder": ladder, "sup_errors": sups, "strictly_decreasing": decreasing}))
    return EXIT_OK if decreasing else EXIT_TOLERANCE


def _cmd_extremes(args) -> int:
    spec = load_spec(args.spec)
    ladder = _parse_ladder(args.ladder) if args.ladder else [spec.n]
    x = _parse_grid(args.xgrid)
    summary = {}
    for n in ladder:
        s = spec.with_n(n)
        table = radialnorms.norm_table(s)
        curve = extremes.gap_curve(s, table, x)
        rows = [(float(xv), float(mx), float(mn), float(rf),
                 float(max(abs(mx - rf), abs(mn - rf))))
                for xv, mx, mn, rf in zip(curve.x, curve.max_cdf,
                                          curve.min_cdf, curve.reference)]
        hdr = _header(s, regime=curve.regime)
        write_atomic(os.path.join(args.out, f"extremes-n{n}.csv"),
                     csv_document(hdr, ["x", "max_cdf", "min_cdf",
                                        "reference_law", "gap"], rows))
        summary[str(n)] = {"sup_max": curve.sup_distance_max,
                           "sup_min": curve.sup_distance_min,
                           "regime": curve.regime}
    write_atomic(os.path.join(args.out, "extremes.json"), json_document(summary))
    return EXIT_OK


def _cmd_sample(args) -> int:
    spec = load_spec(args.spec)
    table = radialnorms.norm_table(spec)
    sm = sampler.moduli_sampler(spec, table, seed=args.seed)
    radii = sampler.sample_batch(sm, args.trials)
    sc = extremes.scaling_constants(spec)
    rmax = radii.max(axis=1)
    rmin = radii.min(axis=1)
    if sc.regime == extremes.GUMBEL:
        om = sc.a_out * (rmax - sc.b_out)
        uv = sc.a_in * (sc.b_in - rmin)
    else:
        om = sc.slope_out * spec.n**2 / spec.rho**2 * (rmax - sc.wall_out)
        uv = sc.slope_in * spec.n**2 / spec.rho**2 * (sc.wall_in - rmin)
    rows = [(t, float(rmax[t]), float(rmin[t]), float(om[t]), float(uv[t]))
            for t in range(args.trials)]
    hdr = _header(spec, seed=args.seed, trials=args.trials, regime=sc.regime)
    write_atomic(os.path.join(args.out, "samples.csv"),
                 csv_document(hdr, ["trial", "max_modulus", "min_modulus",
                                    "omega", "u"], rows))
    if args.dump_moduli:
        dump = csv_document(hdr, ["trial"] + [f"r{j}" for j in range(spec.n)],
                            [(t, *radii[t].tolist()) for t in range(args.trials)])
        write_atomic(os.path.join(args.out, "moduli.csv"), dump)
    return EXIT_OK


def _cmd_ward(args) -> int:
    prof = _variant_profile(args)
    x = _parse_grid(args.grid)
    y = _parse_grid(args.ygrid) if args.ygrid else np.array([0.0])
    rep = ward.ward_residual(prof, x, y, h=args.h, L=args.L,
                             include_indicator_terms=not args.drop_indicators)
    rows = []
    for iy, yv in enumerate(rep.y):
        for ix, xv in enumerate(rep.x):
            r = rep.residual[iy, ix]
            if np.isfinite(r):
                rows.append((float(xv), float(yv), float(r.real), float(r.imag)))
    hdr = _header(None, variant=prof.variant, h=args.h, L=args.L)
    write_atomic(os.path.join(args.out, "ward.csv"),
                 csv_document(hdr, ["x", "y", "re_residual", "im_residual"], rows))
    write_atomic(os.path.join(args.out, "ward.json"), json_document(
        {"variant": prof.variant, "max_abs_residual": rep.max_abs,
         "h": rep.h, "L": rep.L, "n_excluded": rep.n_excluded}))
    return EXIT_OK if rep.max_abs <= args.tolerance else EXIT_TOLERANCE


# ---------------------------------------------------------------------------
# parser


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="ringgas",
                                description="thin-annulus determinantal ensembles")
    p.add_argument("--workers", type=int, default=os.cpu_count() or 1)
    sub = p.add_subparsers(dest="command", required=True)

    def add_common(sp, spec_file=True):
        sp.add_argument("--out", default=".")
        sp.add_argument("--formats", default="csv",
                        help="comma list of csv,json,svg")
        if spec_file:
            sp.add_argument("--spec", required=True)

    sp = sub.add_parser("validate")
    add_common(sp)
    sp.set_defaults(fn=_cmd_validate)

    def add_variant_flags(sp):
        sp.add_argument("--variant", required=True, choices=limits.VARIANTS)
        sp.add_argument("--rho", type=float, default=math.nan)
        sp.add_argument("--c1", type=float, default=1.0)
        sp.add_argument("--c2", type=float, default=1.0)
        sp.add_argument("--tau1", type=float, default=0.0)
        sp.add_argument("--tau2", type=float, default=1.0)
        sp.add_argument("--tau", type=float, default=1.0)

    sp = sub.add_parser("limits")
    add_common(sp, spec_file=False)
    add_variant_flags(sp)
    sp.add_argument("--grid", required=True)
    sp.set_defaults(fn=_cmd_limits)

    sp = sub.add_parser("finite-n")
    add_common(sp)
    sp.add_argument("--grid", required=True)
    sp.set_defaults(fn=_cmd_finite_n)

    sp = sub.add_parser("converge")
    add_common(sp)
    sp.add_argument("--grid", default="-2:2:0.05")
    sp.add_argument("--ladder", required=True)
    sp.set_defaults(fn=_cmd_converge)

    sp = sub.add_parser("extremes")
    add_common(sp)
    sp.add_argument("--xgrid", default="-2:4:0.25")
    sp.add_argument("--ladder", default=None)
    sp.set_defaults(fn=_cmd_extremes)

    sp = sub.add_parser("sample")
    add_common(sp)
    sp.add_argument("--trials", type=int, default=1000)
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--dump-moduli", action="store_true")
    sp.set_defaults(fn=_cmd_sample)

    sp = sub.add_parser("ward")
    add_common(sp, spec_file=False)
    add_variant_flags(sp)
    sp.add_argument("--grid", required=True)
    sp.add_argument("--ygrid", default=None)
    sp.add_argument("--h", type=float, default=0.02)
    sp.add_argument("--L", type=float, default=8.0)
    sp.add_argument("--tolerance", type=float, default=5e-3)
    sp.add_argument("--drop-indicators", action="store_true")
    sp.set_defaults(fn=_cmd_ward)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_CONFIG if exc.code not in (0, None) else 0
    if hasattr(args, "formats"):
        args.formats = set(args.formats.split(","))
    try:
        return args.fn(args)
    except ConsistencyError as exc:
        print(f"consistency error: {exc}", file=sys.stderr)
        return EXIT_CONSISTENCY
    except (DomainError, UnsupportedError, OSError, KeyError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
