"""Command-line harness: scenario runs, certificates, gain checks, bounds.

Subcommands
    simulate --config F --out D     integrate a scenario, write CSV + report
    certify  --config F             build and print the Lyapunov certificate
    gains    --config F [--margin]  synthesize or validate gains
    bound    --config F --T x       disturbance ultimate-bound analysis
    paper    [--noise] [--out D]    run the built-in benchmark end to end

Exit codes: 0 success, 1 configuration error, 2 diverged run,
3 failed check (invalid certificate, gain inequality, or no contraction).
"""

from __future__ import annotations

import argparse
import sys
import time
from pathlib import Path

try:
    import tomllib
except ModuleNotFoundError:
    import tomli as tomllib

from .certificate import attach_lyapunov, certify, decay_check, noisy_bound
from .config import (
    ConfigError,
    ScenarioConfig,
    load_config,
    preset_paper_example,
)
from .dynamics import SimulationDiverged, Trajectory, simulate
from .gains import validate_gains
from .spectral import spectral_bounds
from .topology import coupling_matrix, is_jointly_connected


def emit_csv(traj: Trajectory, path) -> None:
    """Write a trajectory as CSV with 12 significant digits per value.

    Column order: t, leader position and velocity per dimension, then for
    each agent and dimension the position, velocity, and velocity estimate,
    then per-agent tracking error norms, then the Lyapunov sample (nan when
    no certificate was attached).
    """
    if traj.n_samples < 1:
        raise ValueError("trajectory is empty")
    n, m = traj.n, traj.m
    cols = ["t"]
    cols += [f"x0_{d + 1}" for d in range(m)]
    cols += [f"v0_{d + 1}" for d in range(m)]
    for i in range(n):
        for d in range(m):
            cols += [f"x_{i + 1}_{d + 1}", f"v_{i + 1}_{d + 1}", f"vhat_{i + 1}_{d + 1}"]
    for i in range(n):
        cols += [f"err_x_{i + 1}", f"err_v_{i + 1}"]
    cols.append("V")

    def fmt(x: float) -> str:
        return f"{x:.12g}"

    with open(path, "w", newline="") as fh:
        fh.write(",".join(cols) + "\n")
        for s in range(traj.n_samples):
            row = [fmt(traj.times[s])]
            row += [fmt(traj.x0[s, d]) for d in range(m)]
            row += [fmt(traj.v0[s, d]) for d in range(m)]
            for i in range(n):
                for d in range(m):
                    row += [
                        fmt(traj.x[s, i, d]),
                        fmt(traj.v[s, i, d]),
                        fmt(traj.vhat[s, i, d]),
                    ]
            for i in range(n):
                row += [fmt(traj.err_x[s, i]), fmt(traj.err_v[s, i])]
            row.append(fmt(traj.V[s]) if traj.V is not None else "nan")
            fh.write(",".join(row) + "\n")


def _write_run_report(traj: Trajectory, path, elapsed: float) -> None:
    meta = traj.metadata
    final = traj.n_samples - 1
    lines = [
        f"samples: {traj.n_samples}",
        f"t_final: {traj.times[final]:.12g}",
        f"h: {meta.get('h')}",
        f"n: {meta.get('n')}",
        f"m: {meta.get('m')}",
        f"gain_l: {meta['gains']['l']:.12g}",
        f"gain_k: {meta['gains']['k']:.12g}",
        f"gain_k0: {meta['gains']['k0']:.12g}",
        f"noise_mode: {meta.get('noise_mode')}",
        f"noise_delta: {meta.get('noise_delta')}",
        f"noise_seed: {meta.get('noise_seed')}",
        f"final_max_err_x: {traj.err_x[final].max():.12g}",
        f"final_max_err_v: {traj.err_v[final].max():.12g}",
        f"wall_time_seconds: {elapsed:.3f}",
    ]
    Path(path).write_text("\n".join(lines) + "\n")


def _load(args) -> ScenarioConfig:
    return load_config(args.config)


def _run_scenario(cfg: ScenarioConfig):
    gains = cfg.resolve_gains()
    traj = simulate(
        initial=cfg.initial_state(),
        sched=cfg.schedule,
        topo_family=list(cfg.topologies),
        g=gains,
        leader=cfg.leader,
        noise=cfg.build_noise(),
        h=cfg.h,
        t_final=cfg.t_final,
    )
    return gains, traj


def cmd_simulate(args) -> int:
    cfg = _load(args)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    start = time.perf_counter()
    try:
        gains, traj = _run_scenario(cfg)
    except SimulationDiverged as exc:
        print(f"diverged: {exc}", file=sys.stderr)
        return 2
    if gains.is_default_k0:
        try:
            cert = certify(list(cfg.topologies), gains)
            traj = attach_lyapunov(cert, traj)
        except ValueError:
            pass  # no connected mode: CSV carries nan in the V column
    elapsed = time.perf_counter() - start
    emit_csv(traj, out / "trajectory.csv")
    _write_run_report(traj, out / "run_report.txt", elapsed)
    print(f"wrote {out / 'trajectory.csv'}")
    print(f"wrote {out / 'run_report.txt'}")
    return 0


def _print_certificate(cert) -> None:
    print(f"verdict: {'valid' if cert.valid else 'invalid'}")
    print(f"beta: {cert.beta:.12g}")
    print(f"connected_modes: {list(cert.connected_modes)}")
    print(f"lambda_min_P: {cert.lambda_min_P:.12g}")
    print(f"lambda_max_P: {cert.lambda_max_P:.12g}")
    for c in cert.checks:
        print(
            f"check {c.name}: {'pass' if c.passed else 'fail'} "
            f"(value={c.value:.12g}, threshold={c.threshold:.12g})"
        )


def cmd_certify(args) -> int:
    cfg = _load(args)
    gains = cfg.resolve_gains()
    try:
        cert = certify(list(cfg.topologies), gains)
    except ValueError as exc:
        print("verdict: invalid")
        print(f"reason: {exc}")
        return 3
    _print_certificate(cert)
    return 0 if cert.valid else 3


def cmd_gains(args) -> int:
    cfg = _load(args)
    connected = [
        coupling_matrix(t) for t in cfg.topologies if is_jointly_connected(t)
    ]
    if not connected:
        print("error: no jointly connected mode in the family", file=sys.stderr)
        return 1
    lo, hi = spectral_bounds(connected)
    print(f"lambda_min: {lo:.12g}")
    print(f"lambda_max: {hi:.12g}")
    if cfg.synthesize:
        margin = cfg.margin if args.margin is None else args.margin
        from .gains import synthesize_gains

        g = synthesize_gains(lo, hi, margin)
        print(f"mode: synthesized (margin={margin})")
    else:
        g = cfg.gains
        print("mode: validate")
    report = validate_gains(g, lo, hi)
    print(f"l: {g.l:.12g}")
    print(f"k: {g.k:.12g}")
    print(f"k0: {g.k0:.12g}")
    print(f"k0_default: {str(report.k0_default).lower()}")
    for c in report.checks:
        print(
            f"check {c.name}: {'pass' if c.passed else 'fail'} "
            f"(required={c.required:.12g}, actual={c.actual:.12g}, "
            f"slack={c.slack:.12g})"
        )
    print(f"overall: {'pass' if report.passed else 'fail'}")
    return 0 if report.passed else 3


def _print_bound(analysis) -> None:
    print(f"T: {analysis.T:.12g}")
    print(f"t_d: {analysis.t_d:.12g}")
    print(f"subintervals: {analysis.subintervals}")
    print(f"alpha: {analysis.alpha:.12g}")
    print(f"alpha0: {analysis.alpha0:.12g}")
    print(f"beta0: {analysis.beta0:.12g}")
    print(f"epsilon: {analysis.epsilon:.12g}")
    print(f"contractive: {str(analysis.contractive).lower()}")
    print(f"g_bar: {analysis.g_bar:.12g}")
    print(f"delta: {analysis.delta:.12g}")
    print(f"v_ultimate: {analysis.v_ultimate:.12g}")
    print(f"c_delta: {analysis.c_delta:.12g}")
    print(f"note: {analysis.note}")


def cmd_bound(args) -> int:
    cfg = _load(args)
    gains = cfg.resolve_gains()
    try:
        cert = certify(list(cfg.topologies), gains)
        if not cert.valid:
            print("verdict: invalid certificate; no bound available")
            return 3
        analysis = noisy_bound(
            cert,
            list(cfg.topologies),
            cfg.schedule,
            T=args.T,
            delta=cfg.noise_delta,
            subintervals=args.subintervals,
        )
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    _print_bound(analysis)
    return 0 if analysis.contractive else 3


def cmd_paper(args) -> int:
    cfg = preset_paper_example(noise=args.noise)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    start = time.perf_counter()
    try:
        gains, traj = _run_scenario(cfg)
    except SimulationDiverged as exc:
        print(f"diverged: {exc}", file=sys.stderr)
        return 2
    cert = certify(list(cfg.topologies), gains)
    traj = attach_lyapunov(cert, traj)
    elapsed = time.perf_counter() - start

    emit_csv(traj, out / "trajectory.csv")
    _write_run_report(traj, out / "run_report.txt", elapsed)

    cert_lines = [f"verdict: {'valid' if cert.valid else 'invalid'}",
                  f"beta: {cert.beta:.12g}"]
    cert_lines += [
        f"check {c.name}: {'pass' if c.passed else 'fail'} "
        f"(value={c.value:.12g}, threshold={c.threshold:.12g})"
        for c in cert.checks
    ]
    (out / "certificate.txt").write_text("\n".join(cert_lines) + "\n")
    _print_certificate(cert)

    ok = cert.valid
    if args.noise:
        analysis = noisy_bound(
            cert, list(cfg.topologies), cfg.schedule,
            T=cfg.schedule.period, delta=cfg.noise_delta,
        )
        bound_lines = [
            f"epsilon: {analysis.epsilon:.12g}",
            f"contractive: {str(analysis.contractive).lower()}",
            f"g_bar: {analysis.g_bar:.12g}",
            f"c_delta: {analysis.c_delta:.12g}",
        ]
        (out / "bound.txt").write_text("\n".join(bound_lines) + "\n")
        _print_bound(analysis)
        ok = ok and analysis.contractive
    else:
        report = decay_check(traj, cert)
        decay_lines = [
            f"decay_check: {'pass' if report.passed else 'fail'}",
            f"beta: {report.beta:.12g}",
            f"worst_margin: {report.worst_margin:.12g}",
            f"worst_time: {report.worst_time:.12g}",
            f"samples: {report.n_samples}",
        ]
        (out / "decay_check.txt").write_text("\n".join(decay_lines) + "\n")
        for line in decay_lines:
            print(line)
        ok = ok and report.passed

    print(f"artifacts: {out}")
    return 0 if ok else 3


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="leadfollow",
        description="Leader-following consensus with distributed velocity "
        "observers: simulation and certificates",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", help="integrate a scenario and write CSV")
    p.add_argument("--config", required=True, help="scenario TOML file")
    p.add_argument("--out", required=True, help="output directory")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("certify", help="build the Lyapunov certificate")
    p.add_argument("--config", required=True)
    p.set_defaults(func=cmd_certify)

    p = sub.add_parser("gains", help="synthesize or validate gains")
    p.add_argument("--config", required=True)
    p.add_argument("--margin", type=float, default=None,
                   help="override synthesis margin")
    p.set_defaults(func=cmd_gains)

    p = sub.add_parser("bound", help="disturbance ultimate-bound analysis")
    p.add_argument("--config", required=True)
    p.add_argument("--T", type=float, required=True, dest="T",
                   help="analysis window length in seconds")
    p.add_argument("--subintervals", type=int, default=None,
                   help="override the per-window subinterval count")
    p.set_defaults(func=cmd_bound)

    p = sub.add_parser("paper", help="run the built-in benchmark end to end")
    p.add_argument("--noise", action="store_true",
                   help="use the disturbed variant")
    p.add_argument("--out", default="paper_output", help="output directory")
    p.set_defaults(func=cmd_paper)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(str(exc), file=sys.stderr)
        return 1
    except tomllib.TOMLDecodeError as exc:
        print(f"parse error: {exc}", file=sys.stderr)
        return 1
    except FileNotFoundError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
