"""Command-line front end: ``ffconsensus synthesize | run | verify``."""

import argparse
import logging
import os
import sys
from pathlib import Path

import numpy as np

from . import io
from .baseline import compare, design_baseline, run_baseline
from .errors import ConsensusError
from .sim import compute_costs, convergence_metrics, run_centralized, run_distributed
from .synthesis import synthesize
from .verify import run_verify

OUT_ENV = "FFCONSENSUS_OUT"
DEFAULT_OUT = "ffconsensus_out"
EXIT_OK, EXIT_FAILED, EXIT_ERROR = 0, 1, 2


def _out_dir(arg):
    return Path(arg or os.environ.get(OUT_ENV) or DEFAULT_OUT)


def _stem(s, path):
    return s.name or Path(path).stem


def _synthesis_lines(s, synth):
    out = [
        f"scenario           {s.name or '(unnamed)'} ({s.mode} consensus, {s.N} followers)",
        f"rho(A~+B~K)        {synth.rho_closed:.6f}",
        f"rho(A_c)           {synth.rho_Ac:.6f}",
        f"rho(A_bar_c)       {synth.rho_Abar:.6f}",
        f"sigma_max(A_c)     {synth.sigma_max:.6f}   alpha = {synth.alpha:.6g}",
        f"DARE residual      {synth.dare.residual:.3e} after {synth.dare.iterations} iterations",
        f"observer phase     {synth.observer.phase} ({synth.observer.evaluations} evaluations)",
    ]
    ref = s.tolerances.get("reference_rho_Ac")
    if ref is not None:
        out.append(f"reference rho(A_c) {ref:.6f}   gap = {synth.rho_Ac - ref:+.6f}")
    return out


def _gains_payload(synth):
    return {
        "summary": synth.summary(),
        "P": synth.P,
        "K": synth.K,
        "K_i": list(synth.K_list),
        "L_i": list(synth.L_list),
        "feedforward": [
            {"agent": g.agent, "parent": g.parent, "branch": g.branch, "G_self": g.G_self, "G_parent": g.G_parent, "G_input": g.G_input}
            for g in synth.feedforward
        ],
    }


def cmd_synthesize(args):
    s = io.load_scenario(args.scenario)
    synth = synthesize(s, seed=args.seed)
    for line in _synthesis_lines(s, synth):
        print(line)
    path = _out_dir(args.out) / f"{_stem(s, args.scenario)}_synthesis.json"
    io.write_json(path, _gains_payload(synth))
    print(f"gains written to {path}")
    return EXIT_OK


def _export_trace(out, stem, trace):
    names, data = trace.columns()
    csv_path = out / f"{stem}_{trace.kind}.csv"
    io.write_csv(csv_path, names, data)
    manifest = {"columns": names, "rows": int(data.shape[0]), "kind": trace.kind, "mode": trace.mode}
    io.write_json(out / f"{stem}_{trace.kind}.columns.json", manifest)
    return csv_path


def _metrics_summary(m):
    keep = ("consensus_step", "threshold", "empirical_decay_rate", "envelope_constant", "envelope_holds")
    d = {k: m[k] for k in keep if k in m}
    d["final_deviation"] = float(m["deviations"][-1])
    d["final_observer_error"] = float(np.max(m["observer_error_norms"][-1]))
    return d


def _cost_summary(c):
    return {
        "J_sim": c.J_sim,
        "J_star": c.J_star,
        "J_star_distributed": c.J_star_distributed,
        "delta_J": c.delta_J,
        "truncation_bound": c.truncation_bound,
    }


def cmd_run(args):
    s = io.load_scenario(args.scenario)
    if args.horizon is not None:
        s = s.with_horizon(args.horizon)
    out = _out_dir(args.out)
    stem = _stem(s, args.scenario)
    modes = ("distributed", "centralized", "baseline") if args.mode == "all" else (args.mode,)
    synth = synthesize(s, seed=args.seed) if any(m != "baseline" for m in modes) else None
    s_values = tuple(k for k in (0, 5, 10, 20) if k <= s.horizon)
    traces = {}
    for mode in modes:
        report = {"scenario": s.name, "mode": s.mode, "run": mode, "horizon": s.horizon}
        if mode == "baseline":
            design = design_baseline(s)
            tr = run_baseline(s, design)
            report["baseline"] = {
                "mu": design.config.mu,
                "rho_observer": design.rho_observer,
                "rho_plant": design.rho_plant,
                "rho_closed": design.rho_closed,
                "regulator_residual": design.regulator.residual,
            }
            m = convergence_metrics(tr)
            traces[mode] = (tr, design)
        else:
            tr = run_distributed(s, synth) if mode == "distributed" else run_centralized(s, synth)
            report["synthesis"] = synth.summary()
            m = convergence_metrics(tr, synth)
            report["costs"] = _cost_summary(compute_costs(tr, synth, s_values))
            traces[mode] = (tr, synth)
        report["metrics"] = _metrics_summary(m)
        csv_path = _export_trace(out, stem, tr)
        report["files"] = {"trace": str(csv_path), "columns": str(csv_path.with_suffix(".columns.json"))}
        io.write_json(out / f"{stem}_{tr.kind}.report.json", report)
        line = f"{mode:<12} consensus step {m['consensus_step']:>4}   final deviation {m['deviations'][-1]:.3e}"
        if "costs" in report:
            line += f"   J_sim(0) {report['costs']['J_sim'].get(0, 0.0):.6g}"
        print(line)
    if args.mode == "all":
        cmp = compare(traces["distributed"][0], synth, traces["baseline"][0], traces["baseline"][1])
        io.write_json(out / f"{stem}_comparison.json", cmp)
        print(
            f"comparison   rho proposed {cmp['rho_proposed']:.6f} vs baseline {cmp['rho_baseline']:.6f}; "
            f"consensus step {cmp['consensus_step_proposed']} vs {cmp['consensus_step_baseline']}"
        )
    print(f"outputs in {out}")
    return EXIT_OK


def cmd_verify(args):
    s = io.load_scenario(args.scenario)
    checks, err = run_verify(s, include_kernels=not args.skip_kernels)
    for c in checks:
        print(c.line())
    if err is not None:
        print(f"FAIL  synthesis: {type(err).__name__}: {err}")
        return EXIT_FAILED
    failed = [c for c in checks if not c.passed]
    print(f"{len(checks) - len(failed)}/{len(checks)} checks passed")
    return EXIT_FAILED if failed else EXIT_OK


def build_parser():
    p = argparse.ArgumentParser(prog="ffconsensus", description="Feedforward-based optimal consensus of heterogeneous agents.")
    p.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = p.add_subparsers(dest="command", required=True)

    sp = sub.add_parser("synthesize", help="compute feedforward, LQ and observer gains")
    sp.add_argument("scenario", help="scenario JSON path or shipped scenario name")
    sp.add_argument("--out", help=f"output directory (default ${OUT_ENV} or ./{DEFAULT_OUT})")
    sp.add_argument("--seed", type=int, default=None, help="override the optimizer seed")
    sp.set_defaults(func=cmd_synthesize)

    rp = sub.add_parser("run", help="simulate and export traces")
    rp.add_argument("scenario")
    rp.add_argument("--mode", choices=("distributed", "centralized", "baseline", "all"), default="distributed")
    rp.add_argument("--horizon", type=int, default=None)
    rp.add_argument("--out")
    rp.add_argument("--seed", type=int, default=None)
    rp.set_defaults(func=cmd_run)

    vp = sub.add_parser("verify", help="run the invariant suite and print a pass/fail table")
    vp.add_argument("scenario")
    vp.add_argument("--skip-kernels", action="store_true", help="skip the random kernel property suites")
    vp.set_defaults(func=cmd_verify)
    return p


def main(argv=None):
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(name)s: %(message)s")
    try:
        return args.func(args)
    except ConsensusError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_ERROR
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
