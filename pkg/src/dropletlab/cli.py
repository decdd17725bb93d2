"""Command-line front end: reproducible batch runs over every estimator.

One binary, subcommand style::

    dropletlab energy       --body ball --radius 1
    dropletlab santalo      --body ellipsoid --semi-axes 1,1,2
    dropletlab stationarity --body ball --radius 0.5
    dropletlab flow         --volume 1 --coeff 2,0=0.1
    dropletlab proofcheck   --chain binding
    dropletlab sweep        --check minkowski --volumes 0.1:2.43:0.1

The machine-readable artifact (JSON, or CSV for tabular commands) is
printed to stdout and, with ``--out``, written byte-identically to a file.
Human summaries go to stderr so stdout stays parseable.  Every artifact
embeds the package version, the resolved configuration, and the seed; no
timestamps, so identical (config, seed) runs produce identical bytes.

Exit status: 0 on success, 1 when a verification fails (an inequality
violated beyond tolerance, a proof chain not passing, a flow that does not
converge), 2 on usage, configuration, or I/O errors.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys

import numpy as np

from . import __version__, energy, flow, proofcheck, santalo, variation
from .shapes import (
    Ball,
    Body,
    Ellipsoid,
    StarShape,
    TwoBalls,
    cube_mesh,
    load_off,
)

_BODY_KINDS = ("ball", "ellipsoid", "star", "twoballs", "cube", "mesh")


# ---------------------------------------------------------------------------
# small parsing helpers


def _floats_csv(text: str, count: int, flag: str, parser: argparse.ArgumentParser):
    parts = [p for p in str(text).split(",") if p != ""]
    try:
        vals = [float(p) for p in parts]
    except ValueError:
        parser.error(f"{flag}: expected comma-separated numbers, got {text!r}")
    if len(vals) != count:
        parser.error(f"{flag}: expected {count} comma-separated numbers, got {text!r}")
    return vals


def _parse_coeff(text: str, parser: argparse.ArgumentParser):
    """Parse one ``l,m=value`` token into ((l, m), value)."""
    try:
        key, _, val = text.partition("=")
        l_str, m_str = key.split(",")
        l, m = int(l_str), int(m_str)
        c = float(val)
    except ValueError:
        parser.error(f"--coeff: expected L,M=VALUE, got {text!r}")
    if l < 0 or abs(m) > l:
        parser.error(f"--coeff: need l >= 0 and |m| <= l, got {text!r}")
    return (l, m), c


def _parse_range(text: str, flag: str, parser: argparse.ArgumentParser) -> list[float]:
    """Inclusive ``start:end:step`` range; an empty range is a usage error."""
    parts = str(text).split(":")
    if len(parts) != 3:
        parser.error(f"{flag}: expected START:END:STEP, got {text!r}")
    try:
        start, end, step = (float(p) for p in parts)
    except ValueError:
        parser.error(f"{flag}: expected numeric START:END:STEP, got {text!r}")
    if step <= 0:
        parser.error(f"{flag}: step must be positive, got {step}")
    count = int(np.floor((end - start) / step + 1e-9)) + 1
    if count < 1:
        parser.error(f"{flag}: empty range {text!r}")
    return [round(start + i * step, 12) for i in range(count)]


def _jsonable(obj):
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, np.floating):
        return float(obj)
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    raise TypeError(f"not JSON serializable: {type(obj).__name__}")


def _json_text(payload: dict) -> str:
    return json.dumps(payload, indent=2, sort_keys=True, default=_jsonable) + "\n"


def _csv_text(fields: list[str], rows: list[list]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(fields)
    for row in rows:
        writer.writerow([v.item() if isinstance(v, np.generic) else v for v in row])
    return buf.getvalue()


def _emit(text: str, out_path: str | None, summary: list[str]) -> None:
    for line in summary:
        print(line, file=sys.stderr)
    sys.stdout.write(text)
    if out_path:
        with open(out_path, "w", encoding="utf-8") as fh:
            fh.write(text)
        print(f"wrote {out_path}", file=sys.stderr)


def _envelope(command: str, seed: int, config: dict, results) -> dict:
    return {
        "package": "dropletlab",
        "version": __version__,
        "command": command,
        "seed": seed,
        "config": config,
        "results": results,
    }


# ---------------------------------------------------------------------------
# config file expansion

_REPEATABLE_FLAGS = {"--coeff"}


def _expand_config(argv: list[str]) -> list[str]:
    """Inline a ``--config file.json`` as flag tokens before the real flags.

    The config file is a JSON object keyed by long option names.  Its
    entries are inserted immediately after the subcommand, so explicitly
    passed flags (parsed later) override them.  Unknown keys surface as
    argparse "unrecognized arguments" usage errors (exit 2).
    """
    if "--config" not in argv:
        return argv
    idx = argv.index("--config")
    if idx + 1 >= len(argv):
        print("error: --config: expected a file path", file=sys.stderr)
        raise SystemExit(2)
    path = argv[idx + 1]
    try:
        with open(path, encoding="utf-8") as fh:
            cfg = json.load(fh)
    except OSError as exc:
        print(f"error: --config: {exc}", file=sys.stderr)
        raise SystemExit(2)
    except json.JSONDecodeError as exc:
        print(f"error: --config: {path}: invalid JSON ({exc})", file=sys.stderr)
        raise SystemExit(2)
    if not isinstance(cfg, dict):
        print(f"error: --config: {path}: expected a JSON object", file=sys.stderr)
        raise SystemExit(2)

    tokens: list[str] = []
    for key in sorted(cfg):
        flag = "--" + str(key).replace("_", "-")
        value = cfg[key]
        if isinstance(value, bool):
            if value:
                tokens.append(flag)
        elif isinstance(value, (list, tuple)):
            if flag in _REPEATABLE_FLAGS:
                for item in value:
                    tokens.extend([flag, str(item)])
            else:
                tokens.extend([flag, ",".join(str(v) for v in value)])
        else:
            tokens.extend([flag, str(value)])

    sub_at = next((i for i, tok in enumerate(argv) if not tok.startswith("-")), None)
    if sub_at is None:
        return argv
    return argv[: sub_at + 1] + tokens + argv[sub_at + 1 :]


# ---------------------------------------------------------------------------
# body construction


def _add_body_flags(parser: argparse.ArgumentParser) -> None:
    g = parser.add_argument_group("body selection")
    g.add_argument("--body", choices=_BODY_KINDS, default="ball")
    g.add_argument("--radius", type=float, default=1.0, help="ball radius")
    g.add_argument("--semi-axes", dest="semi_axes", metavar="A,B,C",
                   help="ellipsoid semi-axes")
    g.add_argument("--star-file", metavar="PATH",
                   help="star shape JSON (as written by flow --final-shape)")
    g.add_argument("--base-radius", type=float, default=1.0,
                   help="star base radius for inline --coeff shapes")
    g.add_argument("--coeff", action="append", metavar="L,M=VALUE",
                   help="star harmonic coefficient; repeatable")
    g.add_argument("--lmax", type=int, default=4, help="star basis degree")
    g.add_argument("--radii", metavar="R1,R2", help="two-ball radii")
    g.add_argument("--separation", type=float, help="two-ball center distance")
    g.add_argument("--side", type=float, default=1.0, help="cube side")
    g.add_argument("--file", metavar="PATH", help="OFF mesh path")
    g.add_argument("--center", default="0,0,0", metavar="X,Y,Z")


def _add_run_flags(parser: argparse.ArgumentParser,
                   samples_default: int = 200_000,
                   formats: tuple[str, ...] = ("json",)) -> None:
    g = parser.add_argument_group("run control")
    g.add_argument("--samples", type=int, default=samples_default)
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--workers", type=int, default=1)
    g.add_argument("--out", metavar="PATH", help="also write the artifact here")
    g.add_argument("--format", choices=list(formats), default=formats[0])
    g.add_argument("--config", metavar="PATH",
                   help="JSON object of flag defaults; explicit flags win")


def _star_spec(star: StarShape) -> dict:
    return {
        "kind": "star",
        "base_radius": star.base_radius,
        "coeffs": [
            {"l": l, "m": m, "c": c}
            for (l, m), c in sorted(star.coeff_dict().items())
        ],
        "lmax": star.lmax,
        "center": star.center.tolist(),
    }


def build_body(args, parser: argparse.ArgumentParser) -> tuple[Body, dict]:
    """Construct the requested body and its round-trippable spec dict."""
    center = _floats_csv(args.center, 3, "--center", parser)
    kind = args.body
    try:
        if kind == "ball":
            if args.radius <= 0:
                parser.error(f"--radius must be positive, got {args.radius}")
            body = Ball(args.radius, center)
            spec = {"kind": kind, "radius": args.radius, "center": center}
        elif kind == "ellipsoid":
            if args.semi_axes is None:
                parser.error("--semi-axes is required for --body ellipsoid")
            axes = _floats_csv(args.semi_axes, 3, "--semi-axes", parser)
            body = Ellipsoid(axes, center)
            spec = {"kind": kind, "semi_axes": axes, "center": center}
        elif kind == "star":
            if args.star_file and args.coeff:
                parser.error("--star-file and --coeff are mutually exclusive")
            if args.star_file:
                try:
                    body = StarShape.from_json(args.star_file)
                except OSError as exc:
                    parser.error(f"--star-file: {exc}")
            else:
                coeffs = dict(_parse_coeff(c, parser) for c in args.coeff or [])
                max_l = max((l for (l, _m) in coeffs), default=0)
                body = StarShape(args.base_radius, coeffs, center,
                                 lmax=max(args.lmax, max_l))
            spec = _star_spec(body)
        elif kind == "twoballs":
            if args.radii is None or args.separation is None:
                parser.error("--radii and --separation are required for --body twoballs")
            r1, r2 = _floats_csv(args.radii, 2, "--radii", parser)
            body = TwoBalls(r1, r2, args.separation, center)
            spec = {"kind": kind, "radii": [r1, r2],
                    "separation": args.separation, "center": center}
        elif kind == "cube":
            if args.side <= 0:
                parser.error(f"--side must be positive, got {args.side}")
            body = cube_mesh(args.side, center)
            spec = {"kind": kind, "side": args.side, "center": center}
        else:  # mesh
            if args.file is None:
                parser.error("--file is required for --body mesh")
            try:
                body = load_off(args.file)
            except OSError as exc:
                parser.error(f"--file: {exc}")
            spec = {"kind": kind, "file": args.file}
    except ValueError as exc:
        parser.error(f"--body {kind}: {exc}")
    return body, spec


def body_from_spec(spec: dict) -> Body:
    """Rebuild a body from the spec dict embedded in an artifact."""
    kind = spec["kind"]
    center = spec.get("center", (0.0, 0.0, 0.0))
    if kind == "ball":
        return Ball(spec["radius"], center)
    if kind == "ellipsoid":
        return Ellipsoid(spec["semi_axes"], center)
    if kind == "star":
        coeffs = {(int(e["l"]), int(e["m"])): float(e["c"])
                  for e in spec.get("coeffs", [])}
        return StarShape(spec["base_radius"], coeffs, center,
                         lmax=spec.get("lmax"))
    if kind == "twoballs":
        r1, r2 = spec["radii"]
        return TwoBalls(r1, r2, spec["separation"], center)
    if kind == "cube":
        return cube_mesh(spec["side"], center)
    if kind == "mesh":
        return load_off(spec["file"])
    raise ValueError(f"unknown body kind {kind!r}")


# ---------------------------------------------------------------------------
# subcommands


def _cmd_energy(args, parser) -> int:
    body, spec = build_body(args, parser)
    report = energy.total_energy(body, args.samples, args.seed,
                                 args.method, args.workers)
    config = {"body": spec, "samples": args.samples, "workers": args.workers,
              "method": args.method, "format": args.format}
    if args.format == "csv":
        text = _csv_text(report.csv_fields(), [report.to_csv_row()])
    else:
        text = _json_text(_envelope("energy", args.seed, config, report.to_dict()))
    summary = [
        f"{report.body}: E = {report.total:.6f} +- {report.total_err:.3g}",
        f"  perimeter = {report.perimeter:.6f} +- {report.perimeter_err:.3g}",
        f"  coulomb   = {report.coulomb:.6f} +- {report.coulomb_err:.3g}",
        f"  volume    = {report.volume:.6f} +- {report.volume_err:.3g}",
    ]
    _emit(text, args.out, summary)
    return 0


def _cmd_santalo(args, parser) -> int:
    body, spec = build_body(args, parser)
    try:
        alphas = [float(a) for a in str(args.alphas).split(",") if a != ""]
    except ValueError:
        parser.error(f"--alphas: expected comma-separated numbers, got {args.alphas!r}")
    if not alphas:
        parser.error("--alphas: need at least one exponent")

    bundle = santalo.sample_bundle(body, args.samples, args.seed,
                                   law="cosine", workers=args.workers)
    moments = []
    for alpha in alphas:
        try:
            moments.append(santalo.chord_moment_identity(
                body, alpha, args.samples, args.seed, args.workers,
                bundle=bundle))
        except ValueError as exc:
            parser.error(f"--alphas: {exc}")
    inequalities = santalo.verify_main_inequalities(
        body, args.samples, args.seed, args.method, args.workers)
    bounds = santalo.chord_coulomb_bounds(
        body, args.samples, args.seed, method=args.method, workers=args.workers)
    vol_est = santalo.santalo_volume(body, args.samples, args.seed,
                                     args.workers, bundle=bundle)
    vol_ref = body.volume()

    failures = [f"moment alpha={m.alpha}" for m in moments if not m.ok]
    failures += [ineq.name for ineq in inequalities if not ineq.satisfied]
    failures += [f"bound {name}" for name, rep in
                 (("cubed", bounds.cubed), ("squared", bounds.squared))
                 if not rep.satisfied]

    results = {
        "moments": [m.to_dict() for m in moments],
        "inequalities": [r.to_dict() for r in inequalities],
        "chord_bounds": bounds.to_dict(),
        "volume_recovery": {
            "estimate": vol_est.value, "estimate_err": vol_est.error,
            "reference": vol_ref.value, "reference_err": vol_ref.error,
        },
        "failures": failures,
    }
    config = {"body": spec, "samples": args.samples, "workers": args.workers,
              "method": args.method, "alphas": alphas, "format": args.format}
    text = _json_text(_envelope("santalo", args.seed, config, results))

    summary = [f"{energy.describe(body)}: {len(moments)} moment identities, "
               f"{len(inequalities)} inequalities, 2 chord bounds"]
    for m in moments:
        summary.append(f"  alpha={m.alpha:g}: lhs={m.lhs:.5f} rhs={m.rhs:.5f} "
                       f"diff={m.diff:+.3g} ({'ok' if m.ok else 'FAIL'})")
    for r in inequalities:
        tag = "equality" if r.equality else ("ok" if r.satisfied else "FAIL")
        summary.append(f"  {r.name}: slack={r.slack:+.5g} +- {r.slack_err:.3g} ({tag})")
    _emit(text, args.out, summary)

    if failures:
        for name in failures:
            print(f"verification failed: {name}", file=sys.stderr)
        failing = [r.to_dict() for r in inequalities if not r.satisfied]
        failing += [m.to_dict() for m in moments if not m.ok]
        if failing:
            print(json.dumps(failing, indent=2, sort_keys=True, default=_jsonable),
                  file=sys.stderr)
        return 1
    return 0


def _cmd_stationarity(args, parser) -> int:
    body, spec = build_body(args, parser)
    try:
        report = variation.stationarity_residual(
            body, args.samples, args.seed, args.boundary_count,
            args.potential_method, args.workers)
    except ValueError as exc:
        parser.error(f"--boundary-count: {exc}")
    cert = variation.mean_convexity_certificate(
        body, seed=args.seed, boundary_count=args.boundary_count,
        workers=args.workers)
    results = {"stationarity": report.to_dict(),
               "mean_convexity": cert.to_dict()}
    config = {"body": spec, "samples": args.samples, "workers": args.workers,
              "boundary_count": args.boundary_count,
              "potential_method": args.potential_method,
              "require_stationary": bool(args.require_stationary),
              "format": args.format}
    text = _json_text(_envelope("stationarity", args.seed, config, results))

    # Statistical gate for sampled potentials; closed-form routes report a
    # zero stderr, where only floating-point rounding remains.
    tol = max(3.0 * report.residual_err, 1e-9 * max(1.0, abs(report.lam)))
    stationary = report.residual_max <= tol
    summary = [
        f"{energy.describe(body)}: lambda = {report.lam:.6f} +- {report.lam_err:.3g}",
        f"  residual max = {report.residual_max:.4g} (tolerance {tol:.4g})",
        f"  min mean curvature = {cert.min_mean_curvature:.6f} "
        f"(mean-convex: {cert.mean_convex})",
        f"  minkowski deficit = {report.minkowski_deficit:.6g} "
        f"+- {report.minkowski_deficit_err:.3g}",
    ]
    _emit(text, args.out, summary)
    if args.require_stationary and not stationary:
        print("verification failed: residual max exceeds 3 sigma", file=sys.stderr)
        return 1
    return 0


def _cmd_flow(args, parser) -> int:
    if args.star_file:
        if args.coeff:
            parser.error("--star-file and --coeff are mutually exclusive")
        try:
            seed_star = StarShape.from_json(args.star_file)
        except OSError as exc:
            parser.error(f"--star-file: {exc}")
        coeffs = seed_star.coeff_dict()
        lmax = max(args.lmax, seed_star.lmax)
        base_radius = seed_star.base_radius
    else:
        tokens = args.coeff if args.coeff is not None else ["2,0=0.1"]
        coeffs = dict(_parse_coeff(c, parser) for c in tokens)
        lmax = max([args.lmax] + [l for (l, _m) in coeffs])
        base_radius = None
    if args.volume <= 0:
        parser.error(f"--volume must be positive, got {args.volume}")
    try:
        state = flow.initial_state(args.volume, coeffs, lmax=lmax,
                                   step_size=args.step_size,
                                   base_radius=base_radius)
    except ValueError as exc:
        parser.error(f"--coeff: {exc}")

    initial = {"energy": state.energy, "volume": state.volume,
               "asphericity": state.asphericity,
               "coeffs": _star_spec(state.star)["coeffs"]}
    trajectory = flow.run_flow(state, max_steps=args.max_steps,
                               tolerance=args.tolerance,
                               samples=args.samples, seed=args.seed)
    final = trajectory.final
    profile = energy.ball_profile(args.volume)
    results = {
        "status": trajectory.status,
        "steps": final.step_index,
        "accepted_states": len(trajectory.states),
        "tolerance": trajectory.tolerance,
        "target_volume": args.volume,
        "ball_profile": profile,
        "initial": initial,
        "final": {
            "energy": final.energy,
            "energy_err": final.energy_err,
            "volume": final.volume,
            "asphericity": final.asphericity,
            "grad_norm": final.grad_norm,
            "step_size": final.step_size,
            "shape": _star_spec(final.star),
        },
    }
    config = {"volume": args.volume, "lmax": lmax,
              "max_steps": args.max_steps, "tolerance": args.tolerance,
              "step_size": args.step_size, "samples": args.samples,
              "star_file": args.star_file, "format": args.format}
    if args.format == "csv":
        text = _csv_text(flow.FlowTrajectory.CSV_FIELDS, trajectory.rows())
    else:
        text = _json_text(_envelope("flow", args.seed, config, results))
    if args.trajectory:
        trajectory.to_csv(args.trajectory)
    if args.final_shape:
        trajectory.save_final_shape(args.final_shape)

    summary = [
        f"flow: {trajectory.status} after {final.step_index} steps "
        f"({len(trajectory.states)} accepted)",
        f"  energy = {final.energy:.8f} +- {final.energy_err:.3g} "
        f"(round profile {profile:.8f})",
        f"  asphericity = {final.asphericity:.3g}, volume = {final.volume:.12f}",
        f"  grad norm = {final.grad_norm:.3g} (tolerance {args.tolerance:g})",
    ]
    if args.trajectory:
        summary.append(f"wrote trajectory {args.trajectory}")
    if args.final_shape:
        summary.append(f"wrote final shape {args.final_shape}")
    _emit(text, args.out, summary)
    if trajectory.status != "converged":
        print(f"verification failed: flow status {trajectory.status!r}",
              file=sys.stderr)
        return 1
    return 0


_CHAIN_NAMES = ("outer", "roundness", "binding", "twoball", "all")


def _cmd_proofcheck(args, parser) -> int:
    if args.volume is not None and args.volume <= 0:
        parser.error(f"--volume must be positive, got {args.volume}")
    if args.radius is not None and args.radius <= 0:
        parser.error(f"--radius must be positive, got {args.radius}")
    reports = []
    if args.chain in ("outer", "all"):
        if args.radius is not None and args.chain == "outer":
            reports.append(proofcheck.outer_min_chain(radius=args.radius))
        else:
            reports.append(proofcheck.outer_min_chain(volume=args.volume or 1.0))
    if args.chain in ("roundness", "all"):
        reports.append(proofcheck.roundness_polynomial_chain(args.radius or 1.0))
    if args.chain in ("binding", "all"):
        reports.append(proofcheck.binding_energy_bounds())
    if args.chain in ("twoball", "all"):
        volume = args.twoball_volume
        if volume is None:
            volume = args.volume if (args.chain == "twoball" and args.volume) \
                else energy.splitting_threshold()
        reports.append(proofcheck.two_ball_comparison(volume))

    results = {"chains": [r.to_dict() for r in reports]}
    summary = []
    for rep in reports:
        summary.extend(rep.render().splitlines())
        summary.append("")
    if args.chain in ("binding", "all"):
        summary.append(
            "binding constants: "
            f"{proofcheck.kmn_lower_bound():.4f} / "
            f"{proofcheck.chain_lower_bound():.4f} / "
            f"{proofcheck.ball_upper_bound():.4f}; printed value "
            f"{proofcheck.PRINTED_LOWER_BOUND} flagged as a decimal slip")
        results["binding_constants"] = {
            "kmn_lower_bound": proofcheck.kmn_lower_bound(),
            "isoperimetric_lower_bound": proofcheck.chain_lower_bound(),
            "ball_stationary_value": proofcheck.ball_upper_bound(),
            "printed_lower_bound": proofcheck.PRINTED_LOWER_BOUND,
        }

    config = {"chain": args.chain, "volume": args.volume,
              "radius": args.radius, "twoball_volume": args.twoball_volume,
              "format": args.format}
    text = _json_text(_envelope("proofcheck", args.seed, config, results))
    _emit(text, args.out, summary)

    bad = [r for r in reports if r.verdict != "pass"]
    if bad:
        for rep in bad:
            print(f"verification failed: chain {rep.chain!r} -> {rep.verdict}",
                  file=sys.stderr)
        return 1
    return 0


_SWEEP_CHECKS = ("minkowski", "twoball", "fprime")

_SWEEP_FIELDS = {
    "minkowski": ["volume", "radius", "seed", "min_mean_curvature",
                  "mean_convex", "within_volume_threshold", "chain_value",
                  "chain_floor", "chain_margin", "curvature_lower_bound",
                  "minkowski_deficit", "minkowski_deficit_err"],
    "twoball": ["volume", "seed", "one_ball_energy", "two_ball_energy",
                "difference", "winner"],
    "fprime": ["radius", "volume", "slope", "sign"],
}


def _sweep_rows(args, parser) -> tuple[list[str], list[list], list[str], int]:
    """Build (fields, rows, summary, status) for the requested sweep."""
    status = 0
    summary: list[str] = []
    fields = _SWEEP_FIELDS[args.check]
    rows: list[list] = []

    if args.check == "minkowski":
        if args.volumes is None:
            parser.error("--volumes is required for --check minkowski")
        volumes = _parse_range(args.volumes, "--volumes", parser)
        threshold = variation.mean_convexity_threshold()
        certified = 0
        for vol in volumes:
            radius = energy.ball_radius_for_volume(vol)
            ball = Ball(radius)
            cert = variation.mean_convexity_certificate(
                ball, seed=args.seed, boundary_count=args.boundary_count,
                workers=args.workers)
            deficit = variation.minkowski_deficit(ball)
            rows.append([vol, radius, args.seed, cert.min_mean_curvature,
                         cert.mean_convex, cert.within_volume_threshold,
                         cert.chain_value, cert.chain_floor, cert.chain_margin,
                         cert.curvature_lower_bound,
                         deficit.value, deficit.error])
            if cert.mean_convex:
                certified += 1
            if cert.within_volume_threshold and not cert.mean_convex:
                summary.append(f"verification failed: V={vol:g} inside the "
                               "volume threshold but not mean-convex")
                status = 1
        summary.insert(0, f"minkowski sweep: {certified}/{len(volumes)} rows "
                          f"mean-convex (volume threshold {threshold:.5f})")

    elif args.check == "twoball":
        if args.volumes is None:
            parser.error("--volumes is required for --check twoball")
        volumes = _parse_range(args.volumes, "--volumes", parser)
        for vol in volumes:
            one = energy.ball_profile(vol)
            two = 2.0 * energy.ball_profile(vol / 2.0)
            diff = one - two
            if abs(diff) <= 1e-12 * max(one, two):
                winner = "tie"
            else:
                winner = "one_ball" if diff < 0 else "two_balls"
            rows.append([vol, args.seed, one, two, diff, winner])
        flips = [(rows[i][0], rows[i + 1][0]) for i in range(len(rows) - 1)
                 if (rows[i][4] < 0) != (rows[i + 1][4] < 0)]
        crossover = proofcheck.splitting_crossover()
        if flips:
            lo, hi = flips[0]
            summary.append(f"twoball sweep: sign change bracketed in "
                           f"[{lo:g}, {hi:g}]; bisection crossover "
                           f"{crossover:.9f}")
        else:
            side = "below" if rows[-1][4] < 0 else "above"
            summary.append(f"twoball sweep: no sign change; range stays "
                           f"{side} the crossover {crossover:.9f}")

    else:  # fprime
        if args.radii_range is None:
            parser.error("--radii is required for --check fprime")
        radii = _parse_range(args.radii_range, "--radii", parser)
        for radius in radii:
            vol = 4.0 * np.pi * radius**3 / 3.0
            slope = proofcheck.roundness_slope(radius)
            rows.append([radius, vol, slope, int(np.sign(slope))])
        flips = [(rows[i][0], rows[i + 1][0]) for i in range(len(rows) - 1)
                 if (rows[i][2] < 0) != (rows[i + 1][2] < 0)]
        root_volume = proofcheck.roundness_root_volume()
        if flips:
            lo, hi = flips[0]
            summary.append(f"fprime sweep: sign change bracketed in "
                           f"[{lo:g}, {hi:g}]; root volume {root_volume:.9f}")
        else:
            summary.append(f"fprime sweep: no sign change in range; "
                           f"root volume {root_volume:.9f}")

    return fields, rows, summary, status


def _cmd_sweep(args, parser) -> int:
    fields, rows, summary, status = _sweep_rows(args, parser)
    if args.format == "csv":
        text = _csv_text(fields, rows)
    else:
        config = {"check": args.check, "volumes": args.volumes,
                  "radii": args.radii_range,
                  "boundary_count": args.boundary_count,
                  "workers": args.workers, "format": args.format}
        results = {"columns": fields,
                   "rows": [dict(zip(fields, row)) for row in rows]}
        text = _json_text(_envelope("sweep", args.seed, config, results))
    _emit(text, args.out, summary)
    return status


# ---------------------------------------------------------------------------
# parser assembly


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="dropletlab",
        description="Charged-drop energies, chord identities, and proof chains.")
    parser.add_argument("--version", action="version",
                        version=f"dropletlab {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p_energy = sub.add_parser("energy", help="energy decomposition of one body")
    _add_body_flags(p_energy)
    _add_run_flags(p_energy, formats=("json", "csv"))
    p_energy.add_argument("--method",
                          choices=["auto", "mc", "quadrature", "closed"],
                          default="auto")
    p_energy.set_defaults(func=_cmd_energy)

    p_san = sub.add_parser("santalo",
                           help="chord identities, inequalities, chord bounds")
    _add_body_flags(p_san)
    _add_run_flags(p_san)
    p_san.add_argument("--method",
                       choices=["auto", "mc", "quadrature", "closed"],
                       default="auto")
    p_san.add_argument("--alphas", default="0,1,2",
                       help="comma-separated chord-moment exponents")
    p_san.set_defaults(func=_cmd_santalo)

    p_stat = sub.add_parser("stationarity",
                            help="first-variation residual and convexity certificate")
    _add_body_flags(p_stat)
    _add_run_flags(p_stat)
    p_stat.add_argument("--boundary-count", type=int, default=256)
    p_stat.add_argument("--potential-method",
                        choices=["auto", "mc", "quadrature", "closed"],
                        default="auto")
    p_stat.add_argument("--require-stationary", action="store_true",
                        help="exit 1 unless the residual max stays within 3 sigma")
    p_stat.set_defaults(func=_cmd_stationarity)

    p_flow = sub.add_parser("flow", help="volume-constrained gradient descent")
    p_flow.add_argument("--volume", type=float, default=1.0)
    p_flow.add_argument("--coeff", action="append", metavar="L,M=VALUE",
                        help="initial coefficient (default 2,0=0.1); repeatable")
    p_flow.add_argument("--star-file", metavar="PATH",
                        help="start from a saved star shape")
    p_flow.add_argument("--lmax", type=int, default=4)
    p_flow.add_argument("--max-steps", type=int, default=500)
    p_flow.add_argument("--tolerance", type=float, default=1e-3)
    p_flow.add_argument("--step-size", type=float, default=1e-2)
    p_flow.add_argument("--samples", type=int, default=None)
    p_flow.add_argument("--seed", type=int, default=0)
    p_flow.add_argument("--trajectory", metavar="PATH",
                        help="write the per-step CSV here")
    p_flow.add_argument("--final-shape", metavar="PATH",
                        help="write the final star shape JSON here")
    p_flow.add_argument("--out", metavar="PATH")
    p_flow.add_argument("--format", choices=["json", "csv"], default="json")
    p_flow.add_argument("--config", metavar="PATH")
    p_flow.set_defaults(func=_cmd_flow)

    p_proof = sub.add_parser("proofcheck", help="exact-arithmetic proof chains")
    p_proof.add_argument("--chain", choices=list(_CHAIN_NAMES), default="all")
    p_proof.add_argument("--volume", type=float, default=None)
    p_proof.add_argument("--radius", type=float, default=None)
    p_proof.add_argument("--twoball-volume", type=float, default=None)
    p_proof.add_argument("--seed", type=int, default=0)
    p_proof.add_argument("--out", metavar="PATH")
    p_proof.add_argument("--format", choices=["json"], default="json")
    p_proof.add_argument("--config", metavar="PATH")
    p_proof.set_defaults(func=_cmd_proofcheck)

    p_sweep = sub.add_parser("sweep", help="parameter sweeps over closed forms")
    p_sweep.add_argument("--check", choices=list(_SWEEP_CHECKS), required=True)
    p_sweep.add_argument("--volumes", metavar="START:END:STEP")
    p_sweep.add_argument("--radii", dest="radii_range", metavar="START:END:STEP")
    p_sweep.add_argument("--boundary-count", type=int, default=256)
    p_sweep.add_argument("--seed", type=int, default=0)
    p_sweep.add_argument("--workers", type=int, default=1)
    p_sweep.add_argument("--out", metavar="PATH")
    p_sweep.add_argument("--format", choices=["csv", "json"], default="csv")
    p_sweep.add_argument("--config", metavar="PATH")
    p_sweep.set_defaults(func=_cmd_sweep)

    return parser


def main(argv: list[str] | None = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    argv = _expand_config(argv)
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args, parser)
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
