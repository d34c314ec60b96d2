"""Command-line front door.

Subcommands: solve (one problem, one configuration), sweep (grids),
adaptive (run-time momentum tuning), verify-theory (certified-inequality
suites), mc-variance (mini-batch variance verifier) and synth (emit a
synthetic problem).  Any config key can be overridden with a flag whose
name is the dotted key path, e.g. ``--kernel.gamma 0.2``.
"""

from __future__ import annotations

import argparse
import sys

from . import __version__
from .adaptive import AdaptiveConfig, adaptive_solve
from .config import apply_overrides, load_config
from .data import (
    build_kernel,
    ingest_csv,
    load_problem_npz,
    save_problem_npz,
    standardize,
    synth_problem,
)
from .process import MomentumConfig
from .rng import substream
from .schemes import BlockScheme
from .solvers import momentum_solve
from .sweep import (
    SweepRecord,
    Variant,
    resolve_beta,
    run_sweep,
    write_manifest,
    write_sweep_csv,
    _manifest_path,
)
from .verify import SUITES, check_minibatch_variance, run_suites, write_records


def _split_overrides(extras: list[str]) -> list[tuple[str, str]]:
    pairs = []
    i = 0
    while i < len(extras):
        tok = extras[i]
        if not tok.startswith("--"):
            raise SystemExit(f"unexpected argument {tok!r} (overrides look like --key.path value)")
        if "=" in tok:
            key, val = tok[2:].split("=", 1)
            pairs.append((key, val))
            i += 1
        else:
            if i + 1 >= len(extras):
                raise SystemExit(f"override {tok!r} is missing a value")
            pairs.append((tok[2:], extras[i + 1]))
            i += 2
    return pairs


def _config_from(args, extras) -> dict:
    cfg = load_config(getattr(args, "config", None))
    return apply_overrides(cfg, _split_overrides(extras))


def _build_problem(cfg: dict, seed: int):
    ds = cfg["dataset"]
    info: dict = {}
    # an explicit path wins over the (possibly defaulted) synth recipe, so
    # --dataset.path overrides work without clearing the default
    if not ds.get("path") and ds.get("synth"):
        recipe = ds["synth"]
        problem = synth_problem(int(recipe["n"]), float(recipe["kappa"]),
                                int(recipe.get("seed", seed)))
        info["kappa_cd"] = problem.meta["kappa_cd"]
        info["flags"] = problem.meta.get("flags", [])
        return problem, info
    path = ds["path"]
    if str(path).endswith(".npz"):
        return load_problem_npz(path), info
    rng = substream(seed, 0xDA7A)
    X, y, report = ingest_csv(path, cfg.get("target_column"), int(cfg["n_subsample"]), rng)
    info["ingest"] = {
        "rows_read": report.rows_read,
        "rows_dropped": report.rows_dropped,
        "rows_used": report.rows_used,
        "flags": report.flags,
    }
    if cfg.get("standardize", True):
        X, zero_var = standardize(X)
        if zero_var.size:
            info.setdefault("flags", []).append(
                f"constant-columns-zeroed: {zero_var.tolist()}")
    K = build_kernel(X, float(cfg["kernel"]["gamma"]), float(cfg["kernel"]["lambda"]))
    from .solvers import KIND_PSD, LinearProblem

    name = str(path).rsplit("/", 1)[-1]
    return LinearProblem(kind=KIND_PSD, matrix=K, rhs=y, name=name), info


def _variants_from(cfg) -> list[Variant]:
    return [Variant(tag=v["tag"], omega=float(v.get("omega", 1.0))) for v in cfg["variants"]]


def cmd_solve(args, extras) -> int:
    cfg = _config_from(args, extras)
    seed = int(cfg["seeds"][0])
    problem, info = _build_problem(cfg, seed)
    variant = _variants_from(cfg)[0]
    m = int(cfg["m_grid"][0])
    k = int(cfg["k_grid"][0])
    scheme = BlockScheme(cfg.get("scheme", "uniform"), k if cfg.get("scheme", "uniform") == "uniform" else 1)
    beta = 0.0 if variant.tag == "cd" else resolve_beta(
        cfg["beta_mode"], m, lambda: info.get("kappa_cd", 1.0))
    config = MomentumConfig(alpha=1.0, beta=beta, omega=variant.effective_omega(), minibatch=m)
    res = momentum_solve(problem, scheme, config, float(cfg["tolerance"]),
                         int(cfg["max_iters"]), substream(seed, 0))
    record = SweepRecord(
        dataset=problem.name or "problem", solver=variant.tag, omega=config.omega,
        m=m, k=scheme.k, beta=beta, iterations=res.iterations, rows_sampled=res.rows_sampled,
        final_residual=res.final_residual, converged=res.converged, seed=seed,
        wall_ms=res.wall_time_s * 1e3)
    out = cfg["output_path"]
    write_sweep_csv(out, [record])
    write_manifest(_manifest_path(out), {"version": __version__, "config": cfg, "info": info})
    print(f"{variant.tag}: iterations={res.iterations} residual={res.final_residual:.3e} "
          f"converged={res.converged} -> {out}")
    return 0 if res.converged else 1


def cmd_sweep(args, extras) -> int:
    cfg = _config_from(args, extras)
    seed0 = int(cfg["seeds"][0])
    problem, info = _build_problem(cfg, seed0)
    records = run_sweep(
        [problem], _variants_from(cfg), [int(m) for m in cfg["m_grid"]],
        [int(k) for k in cfg["k_grid"]], [int(s) for s in cfg["seeds"]],
        beta_mode=cfg["beta_mode"], tolerance=float(cfg["tolerance"]),
        max_iters=int(cfg["max_iters"]), output_path=cfg["output_path"],
        adaptive_overrides=cfg.get("adaptive") or None,
        manifest_extra={"config": cfg, "info": info},
    )
    converged = sum(r.converged for r in records)
    print(f"{len(records)} cells -> {cfg['output_path']} ({converged} converged)")
    return 0


def cmd_adaptive(args, extras) -> int:
    cfg = _config_from(args, extras)
    seed = int(cfg["seeds"][0])
    problem, info = _build_problem(cfg, seed)
    m = int(cfg["m_grid"][0])
    k = int(cfg["k_grid"][0])
    aconf = AdaptiveConfig(minibatch=m, max_iters=int(cfg["max_iters"]),
                           **(cfg.get("adaptive") or {}))
    out = adaptive_solve(problem, BlockScheme("uniform", k), aconf,
                         float(cfg["tolerance"]), seed)
    record = SweepRecord(
        dataset=problem.name or "problem", solver="cd-nag-adaptive", omega=1.0,
        m=m, k=k, beta=out.selected_beta, iterations=out.total_steps,
        rows_sampled=out.rows_sampled, final_residual=out.final_residual,
        converged=out.converged, seed=seed, wall_ms=0.0)
    path = cfg["output_path"]
    write_sweep_csv(path, [record])
    write_manifest(_manifest_path(path), {
        "version": __version__,
        "config": cfg,
        "info": info,
        "adaptive": {
            "selected_beta": out.selected_beta,
            "bracket_closed_at": out.bracket_closed_at,
            "iterations": out.iterations,
            "total_steps": out.total_steps,
            "flags": out.flags,
            "trace": [{"t": t, "beta_plus": bp, "beta_minus": bm, "ratio": r}
                      for (t, bp, bm, r) in out.trace],
        },
    })
    print(f"adaptive: beta={out.selected_beta:.6f} bracket_closed_at={out.bracket_closed_at} "
          f"steps={out.total_steps} residual={out.final_residual:.3e} -> {path}")
    return 0 if out.converged else 1


def cmd_verify_theory(args, extras) -> int:
    if extras:
        raise SystemExit(f"unexpected arguments: {extras}")
    names = args.suite or ["all"]
    records = run_suites(names, seed=args.seed)
    for rec in records:
        print(rec.line())
    if args.out:
        write_records(records, args.out)
        print(f"wrote {len(records)} records -> {args.out}")
    return 0 if all(r.passed for r in records) else 1


def cmd_mc_variance(args, extras) -> int:
    if extras:
        raise SystemExit(f"unexpected arguments: {extras}")
    ms = [int(tok) for tok in args.m_grid.split(",")]
    records = check_minibatch_variance(seed=args.seed, n=args.n, minibatches=ms,
                                       draws=args.draws)
    for rec in records:
        print(rec.line())
    if args.out:
        write_records(records, args.out)
    return 0 if all(r.passed for r in records) else 1


def cmd_synth(args, extras) -> int:
    if extras:
        raise SystemExit(f"unexpected arguments: {extras}")
    problem = synth_problem(args.n, args.kappa, args.seed)
    save_problem_npz(problem, args.out)
    print(f"synthetic psd problem n={args.n} kappa_cd={problem.meta['kappa_cd']:.6g} "
          f"-> {args.out}")
    if problem.meta.get("flags"):
        for flag in problem.meta["flags"]:
            print(f"  note: {flag}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="momentum-lab",
        description="Mini-batch randomized solvers with momentum, plus numerical "
                    "certification of their convergence bounds.")
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    for name, fn in (("solve", cmd_solve), ("sweep", cmd_sweep), ("adaptive", cmd_adaptive)):
        p = sub.add_parser(name, help=f"{name} using a JSON config plus overrides")
        p.add_argument("--config", default=None, help="JSON config path")
        p.set_defaults(fn=fn)

    p = sub.add_parser("verify-theory", help="run certified-inequality suites")
    p.add_argument("--suite", nargs="*", choices=sorted(SUITES) + ["all"], default=["all"])
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", default=None, help="write records CSV here")
    p.set_defaults(fn=cmd_verify_theory)

    p = sub.add_parser("mc-variance", help="mini-batch variance envelope verifier")
    p.add_argument("--n", type=int, default=16)
    p.add_argument("--m-grid", default="1,2,4,8")
    p.add_argument("--draws", type=int, default=100_000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", default=None)
    p.set_defaults(fn=cmd_mc_variance)

    p = sub.add_parser("synth", help="emit a synthetic problem to an .npz file")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--kappa", type=float, required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    p.set_defaults(fn=cmd_synth)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args, extras = parser.parse_known_args(argv)
    return args.fn(args, extras)


if __name__ == "__main__":
    sys.exit(main())
