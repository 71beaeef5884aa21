"""Command-line entry point: ``pou-approx <subcommand> [options]``.

Exit status: 0 when every certified invariant held, 1 on an invariant
violation (a witness is printed), 2 on malformed input.
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import approximation as approx
from .convergence import equicontinuity_check, sweep
from .cover import CoverError, Net, build_greedy_net, check_net
from .functions import FunctionError, FunctionOnM, default_presets
from .io import InputError, dumps, load_family, load_space, load_subset, report_to_csv
from .metric_space import MetricError, validate_metric
from .oracle import ORACLE_MAX_N, oracle_check
from .partition import PartitionOfUnity, check_partition

EXIT_OK, EXIT_VIOLATION, EXIT_INPUT = 0, 1, 2
DEFAULT_K_LIST = [1, 2, 4, 8, 16, 32, 64]


@dataclass
class RunConfig:
    cloud: str | None = None
    metric: str | dict | None = None
    family: str | list | None = None
    k_list: list[int] = field(default_factory=lambda: list(DEFAULT_K_LIST))
    rho: float = 0.99
    kernel: str = "hat"
    T: str | list = "all"
    out: str | None = None
    seed: int = 0
    strict: bool = False
    oracle: bool = False
    trials: int = 10_000

    def validate(self):
        if not self.k_list or any(int(k) != k or k < 1 for k in self.k_list) \
                or any(b <= a for a, b in zip(self.k_list, self.k_list[1:])):
            raise InputError(f"k_list must be nonempty and strictly increasing, got {self.k_list}")
        if not 0.0 < self.rho <= 1.0:
            raise InputError(f"rho must lie in (0, 1], got {self.rho}")
        if self.strict and self.rho >= 1.0:
            raise InputError("--strict forbids rho = 1")
        for p in (self.cloud, self.family if isinstance(self.family, str) else None):
            if p is not None and not Path(p).exists():
                raise InputError(f"{p}: no such file")
        return self


def _family(cfg: RunConfig, space) -> list[FunctionOnM]:
    if cfg.family is None:
        if space.coords is None:
            return [FunctionOnM.constant(1.0), FunctionOnM.cone(1.0, center=0)]
        return default_presets(space.dim)
    if isinstance(cfg.family, list):
        return [FunctionOnM.from_spec(s) for s in cfg.family]
    return load_family(cfg.family)


def run(cfg: RunConfig) -> tuple[int, dict]:
    """Full pipeline: validate metric, build nets and partitions, sweep, optional oracle."""
    cfg.validate()
    space = load_space(cfg.cloud, cfg.metric)
    T = load_subset(cfg.T, space.n)
    family = _family(cfg, space)
    report: dict = {
        "config": {
            "k_list": list(cfg.k_list), "rho": cfg.rho, "kernel": cfg.kernel,
            "T_size": len(T), "seed": cfg.seed, "strict": cfg.strict,
            "open_support_only": cfg.rho >= 1.0,
        },
        "space": space.describe(),
    }
    failures = []
    mv = validate_metric(space, trial_count=cfg.trials, seed=cfg.seed)
    report["metric_validation"] = mv.to_dict()
    if not mv.ok:
        failures.append({"check": "metric_validation", "witness": mv.violations[0]})

    partitions, partial = [], []
    rows = T.as_array()
    for k in cfg.k_list:
        pou = PartitionOfUnity.build(space, k, cfg.rho, cfg.kernel, strict=cfg.strict)
        try:
            check_net(space, pou.net)
        except CoverError as exc:
            failures.append({"check": "net", "k": k, "witness": str(exc)})
        pc = check_partition(pou, rows)
        partitions.append(pc)
        if not pc["ok"]:
            failures.append({"check": "partition", "k": k, "witness": pc})
        N = approx.active_centers_on(space, pou.net, rows)
        worst = 0.0
        for f in family:
            full = approx.apply(pou, f, rows)
            part = approx.partial_sum_apply(pou, f, N, rows)
            worst = max(worst, approx.seminorm(part - full))
        partial.append({"k": k, "rank": int(N.size), "max_deviation": worst, "ok": worst <= 1e-12})
        if worst > 1e-12:
            failures.append({"check": "partial_sum", "k": k, "witness": worst})
    report["partition_checks"] = partitions
    report["partial_sum_checks"] = partial

    sw = sweep(space, family, cfg.k_list, rows, cfg.rho, cfg.kernel)
    report["sweep"] = sw.to_dict()
    for e in sw.entries:
        if not e.bound_satisfied:
            j = int(np.argmax(np.asarray(e.errors) - np.asarray(e.bounds)))
            failures.append({"check": "error_bound", "k": e.k, "function": sw.functions[j],
                             "error": e.errors[j], "bound": e.bounds[j]})

    if cfg.oracle:
        if space.n > ORACLE_MAX_N:
            report["oracle"] = {"skipped": f"n = {space.n} exceeds {ORACLE_MAX_N}"}
        else:
            oc = oracle_check(space, cfg.k_list, cfg.rho, cfg.kernel)
            report["oracle"] = oc
            if not oc["ok"]:
                failures.append({"check": "oracle", "witness": [c for c in oc["checks"] if not c["ok"]][0]})
    report["failures"] = failures
    report["ok"] = not failures
    return (EXIT_OK if not failures else EXIT_VIOLATION), report


# -- argument handling ----------------------------------------------------

def _k_list(text: str) -> list[int]:
    try:
        return [int(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad k list {text!r}") from None


def _common(p: argparse.ArgumentParser):
    p.add_argument("--cloud", help="point cloud (CSV or JSON)")
    p.add_argument("--metric", default=None,
                   help="euclidean|manhattan|chebyshev|discrete, or edge-list JSON / distance-table CSV")
    p.add_argument("--rho", type=float, default=None, help="support shrink factor in (0, 1] (default 0.99)")
    p.add_argument("--kernel", default=None, choices=["hat", "cosine", "wendland", "wendland_c2"])
    p.add_argument("--T", dest="T", default=None, help="'all' or a file of point indices")
    p.add_argument("--out", help="write JSON here instead of stdout")
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--strict", action="store_true", help="reject rho = 1")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="pou-approx",
                                     description="Partition-of-unity approximation on finite metric spaces.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("validate-metric", help="check metric axioms on the sample")
    _common(p)
    p.add_argument("--trials", type=int, default=10_000)

    for name, text in (("build-net", "greedy net at scale k"),
                       ("build-pou", "partition of unity at scale k")):
        p = sub.add_parser(name, help=text)
        _common(p)
        p.add_argument("--k", type=int, required=True)
        if name == "build-pou":
            p.add_argument("--net", help="reuse a net JSON written by build-net")
            p.add_argument("--triplets", help="export the weight table as CSV (row, col, weight)")

    p = sub.add_parser("apply", help="evaluate P^k f")
    _common(p)
    p.add_argument("--k", type=int, required=True)
    g = p.add_mutually_exclusive_group(required=True)
    g.add_argument("--preset", help="e.g. constant:3, projection:0, cone:2,0.5, sin:4")
    g.add_argument("--function", help="JSON function spec or family file (first member used)")

    p = sub.add_parser("sweep", help="convergence sweep over k")
    _common(p)
    p.add_argument("--config", help="sweep config JSON")
    p.add_argument("--k-list", type=_k_list, default=None)
    p.add_argument("--family", help="function family JSON or CSV")

    p = sub.add_parser("equicontinuity", help="equicontinuity check at one scale")
    _common(p)
    p.add_argument("--family", required=True)
    p.add_argument("--delta", type=float, required=True)
    p.add_argument("--epsilon", type=float, required=True)

    p = sub.add_parser("oracle-check", help="dense brute-force cross-check (n <= 512)")
    _common(p)
    p.add_argument("--k-list", type=_k_list, default=None)

    p = sub.add_parser("report", help="re-emit a JSON report as JSON or CSV")
    p.add_argument("input", help="report JSON from sweep or run")
    p.add_argument("--format", choices=["json", "csv"], default="json")
    p.add_argument("--out")

    p = sub.add_parser("run", help="full pipeline with exit-code contract")
    _common(p)
    p.add_argument("--config", help="run config JSON")
    p.add_argument("--k-list", type=_k_list, default=None)
    p.add_argument("--family")
    p.add_argument("--oracle", action="store_true", help="include the dense oracle check")
    p.add_argument("--trials", type=int, default=None, help="random triples for metric validation")
    return parser


def _config(args) -> RunConfig:
    cfg = RunConfig()
    path = getattr(args, "config", None)
    if path:
        try:
            data = json.loads(Path(path).read_text())
        except FileNotFoundError:
            raise InputError(f"{path}: no such file") from None
        except json.JSONDecodeError as exc:
            raise InputError(f"{path}: line {exc.lineno}: {exc.msg}") from None
        known = set(RunConfig.__dataclass_fields__)
        unknown = set(data) - known
        if unknown:
            raise InputError(f"{path}: unknown config keys {sorted(unknown)}")
        for key, val in data.items():
            setattr(cfg, key, val)
    for key in ("cloud", "metric", "rho", "kernel", "T", "out", "seed", "family"):
        val = getattr(args, key, None)
        if val is not None:
            setattr(cfg, key, val)
    if getattr(args, "k_list", None):
        cfg.k_list = args.k_list
    cfg.strict = cfg.strict or getattr(args, "strict", False)
    cfg.oracle = cfg.oracle or getattr(args, "oracle", False)
    if getattr(args, "trials", None):
        cfg.trials = args.trials
    return cfg


def _emit(text: str, out: str | None):
    if out:
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)


def _pou(cfg: RunConfig, space, k: int, net_path: str | None = None) -> PartitionOfUnity:
    if cfg.strict and cfg.rho >= 1.0:
        raise InputError("--strict forbids rho = 1")
    if net_path:
        net = Net.from_json(Path(net_path).read_text())
        pou = PartitionOfUnity(space, net, cfg.kernel)
        check_net(space, net)
        return pou
    return PartitionOfUnity.build(space, k, cfg.rho, cfg.kernel)


def dispatch(args) -> int:
    cmd = args.command
    if cmd == "report":
        try:
            data = json.loads(Path(args.input).read_text())
        except FileNotFoundError:
            raise InputError(f"{args.input}: no such file") from None
        except json.JSONDecodeError as exc:
            raise InputError(f"{args.input}: line {exc.lineno}: {exc.msg}") from None
        _emit(report_to_csv(data) if args.format == "csv" else dumps(data), args.out)
        return EXIT_OK

    cfg = _config(args)
    if cmd == "run":
        status, report = run(cfg)
        _emit(dumps(report), cfg.out)
        if status != EXIT_OK:
            sys.stderr.write("invariant violation: " + json.dumps(report["failures"][0], default=str) + "\n")
        return status

    space = load_space(cfg.cloud, cfg.metric)
    if cmd == "validate-metric":
        rep = validate_metric(space, trial_count=cfg.trials, seed=cfg.seed)
        _emit(dumps(rep.to_dict()), cfg.out)
        if not rep.ok:
            sys.stderr.write(f"metric violation: {rep.violations[0]}\n")
            return EXIT_VIOLATION
        return EXIT_OK

    if cmd == "build-net":
        net = build_greedy_net(space, args.k, cfg.rho)
        check_net(space, net)
        _emit(dumps(net.to_dict()), cfg.out)
        return EXIT_OK

    T = load_subset(cfg.T, space.n)
    if cmd == "build-pou":
        pou = _pou(cfg, space, args.k, args.net)
        out = {"partition": pou.describe(), "net": pou.net.to_dict(),
               "checks": check_partition(pou, T.as_array())}
        if args.triplets:
            M = approx.as_matrix(pou, T)
            lines = ["row,col,weight"] + [f"{r},{c},{w!r}" for r, c, w in approx.export_triplets(pou, M, T)]
            Path(args.triplets).write_text("\n".join(lines) + "\n")
        _emit(dumps(out), cfg.out)
        return EXIT_OK if out["checks"]["ok"] else EXIT_VIOLATION

    if cmd == "apply":
        f = FunctionOnM.from_spec(args.preset) if args.preset else load_family(args.function)[0]
        pou = _pou(cfg, space, args.k)
        vals = approx.apply(pou, f, T)
        _emit(dumps({"partition": pou.describe(), "function": f.name,
                     "indices": list(T.indices), "values": vals}), cfg.out)
        return EXIT_OK

    if cmd == "sweep":
        family = _family(cfg, space)
        rep = sweep(space, family, cfg.k_list, T, cfg.rho, cfg.kernel)
        _emit(dumps(rep.to_dict()), cfg.out)
        return EXIT_OK if rep.all_bounds_satisfied else EXIT_VIOLATION

    if cmd == "equicontinuity":
        verdict = equicontinuity_check(space, load_family(cfg.family), T, args.delta, args.epsilon)
        _emit(dumps(verdict.to_dict()), cfg.out)
        return EXIT_OK

    if cmd == "oracle-check":
        rep = oracle_check(space, cfg.k_list, cfg.rho, cfg.kernel)
        _emit(dumps(rep), cfg.out)
        return EXIT_OK if rep["ok"] else EXIT_VIOLATION
    raise AssertionError(cmd)


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return dispatch(args)
    except (InputError, MetricError, FunctionError, IndexError, KeyError, ValueError) as exc:
        sys.stderr.write(f"error: {exc}\n")
        return EXIT_INPUT
    except CoverError as exc:
        sys.stderr.write(f"invariant violation: {exc}\n")
        return EXIT_VIOLATION


if __name__ == "__main__":
    sys.exit(main())
