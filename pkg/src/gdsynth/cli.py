"""Command-line interface: ``gdsynth {skeleton,synth,experiment,analyze,failprob,plot}``.

Exit codes for ``synth``: 0 converged, 2 plateaued, 3 sweep budget
exhausted. Usage or input errors exit with 1.
"""
from __future__ import annotations

import argparse
import csv
import datetime as _dt
import io
import json
import math
import platform
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .circuit import Skeleton, circuit_to_dict, dumps, export_qasm, loads
from .kernels import BACKEND
from .linalg import haar_random_unitary, unitarity_error
from .optimizer import (
    OptimizerConfig,
    Status,
    SynthesisResult,
    read_trace_csv,
    synthesize,
    write_trace_csv,
)
from .params import (
    BudgetExceededError,
    count_adequate_sequences,
    effective_parameters_combinatorial,
    effective_parameters_numeric,
    success_rate_monte_carlo,
)
from .skeletons import (
    CouplingGraph,
    cyclic_skeleton,
    full_skeleton,
    graph_skeleton,
    line_skeleton,
    required_layers,
    required_layers_constrained,
    star_skeleton,
)

TOPOLOGIES = ("full", "star", "line", "cyclic", "graph")
TARGET_ATOL = 1e-10
MASK64 = (1 << 64) - 1


class CliError(Exception):
    pass


# -- seeds --------------------------------------------------------------------
def splitmix64(x: int) -> int:
    """One splitmix64 step: add the golden-ratio increment, then mix."""
    z = (x + 0x9E3779B97F4A7C15) & MASK64
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK64
    return z ^ (z >> 31)


def derive_seed(master_seed: int, index: int) -> int:
    """Seed for stream ``index``: ``splitmix64(splitmix64(master) ^ index)``."""
    return splitmix64(splitmix64(int(master_seed) & MASK64) ^ (int(index) & MASK64))


# -- skeleton resolution ------------------------------------------------------
def _default_topology(n: int) -> str:
    return "full" if n % 2 == 0 else "cyclic"


def _generator(spec: dict):
    n = spec["n_qubits"]
    topo = spec["topology"]
    if topo == "full":
        return lambda d: full_skeleton(n, d + 1)
    if topo == "star":
        center = spec.get("center", 0)
        leaves = spec.get("leaves") or [q for q in range(n) if q != center]
        return lambda d: star_skeleton(center, leaves, d)
    if topo == "line":
        return lambda d: line_skeleton(n, d)
    if topo == "cyclic":
        return lambda d: cyclic_skeleton(n, d)
    if topo == "graph":
        path = spec.get("graph_file")
        if not path:
            raise CliError("topology 'graph' needs a graph file")
        graph = CouplingGraph.from_dict(json.loads(Path(path).read_text()))
        if graph.n_qubits != n:
            raise CliError(f"graph has {graph.n_qubits} qubits, expected {n}")
        return lambda d: graph_skeleton(graph, d)
    raise CliError(f"unknown topology {topo!r}; choose from {', '.join(TOPOLOGIES)}")


def resolve_cnot_layers(spec: dict, layers) -> int:
    """CNOT-layer count for an S-layer count ``layers`` (``"auto"`` searches)."""
    if layers in (None, "auto"):
        if spec["topology"] == "full":
            return required_layers(spec["n_qubits"]) - 1
        return required_layers_constrained(_generator(spec), spec["n_qubits"])
    layers = int(layers)
    if layers < 1:
        raise CliError(f"layers must be >= 1, got {layers}")
    return layers - 1


def build_skeleton(spec: dict, cnot_layers: int) -> Skeleton:
    try:
        return _generator(spec)(cnot_layers)
    except ValueError as exc:
        raise CliError(str(exc)) from None


def _topology_spec(args) -> dict:
    if args.n is None:
        raise CliError("--n is required")
    return {
        "n_qubits": args.n,
        "topology": args.topology or _default_topology(args.n),
        "center": args.center,
        "leaves": args.leaves,
        "graph_file": args.graph,
    }


def _skeleton_from_args(args) -> Skeleton:
    spec = _topology_spec(args)
    if args.cnot_layers is not None:
        depth = args.cnot_layers
    else:
        try:
            depth = resolve_cnot_layers(spec, args.layers)
        except ValueError as exc:
            raise CliError(str(exc)) from None
    return build_skeleton(spec, depth)


# -- io -----------------------------------------------------------------------
def load_target(path) -> np.ndarray:
    try:
        doc = json.loads(Path(path).read_text())
        dim = int(doc["dim"])
        u = np.array(doc["re"], dtype=float) + 1j * np.array(doc["im"], dtype=float)
    except (OSError, ValueError, KeyError, TypeError) as exc:
        raise CliError(f"cannot read target {path}: {exc}") from None
    if u.shape != (dim, dim):
        raise CliError(f"target {path}: 're'/'im' have shape {u.shape}, expected {(dim, dim)}")
    err = unitarity_error(u)
    if err > TARGET_ATOL:
        raise CliError(f"target {path} is not unitary: max|U^dagger U - I| = {err:.3e}")
    return u


def target_to_dict(u: np.ndarray) -> dict:
    return {"dim": int(u.shape[0]), "re": u.real.tolist(), "im": u.imag.tolist()}


def _write_json(path: Path, doc) -> None:
    path.write_text(json.dumps(doc, indent=2, sort_keys=True) + "\n")


def _metadata(extra: dict | None = None) -> dict:
    doc = {
        "timestamp": _dt.datetime.now(_dt.timezone.utc).isoformat(timespec="seconds"),
        "gdsynth_version": __version__,
        "backend": BACKEND,
        "python": platform.python_version(),
        "numpy": np.__version__,
        "argv": sys.argv[1:],
    }
    doc.update(extra or {})
    return doc


def _log(args, *msg) -> None:
    if not args.quiet:
        print(*msg)


def _optimizer_config(args) -> OptimizerConfig:
    return OptimizerConfig(
        convergence_threshold=args.threshold,
        plateau_window=args.plateau_window,
        plateau_rel_improvement=args.plateau_rel,
        max_sweeps=args.max_sweeps,
        variant=args.variant,
        learning_rate=args.lr,
    )


def _result_doc(r: SynthesisResult, config: OptimizerConfig, s: Skeleton) -> dict:
    doc = r.summary()
    doc.update(
        {
            "config": config.to_dict(),
            "n_qubits": s.n_qubits,
            "s_layers": s.n_s_layers,
            "cnot_layers": s.n_cnot_layers,
            "n_cnots": s.n_cnots,
            "slots": s.n_slots,
        }
    )
    return doc


# -- commands -----------------------------------------------------------------
def cmd_skeleton(args) -> int:
    s = _skeleton_from_args(args)
    text = json.dumps(circuit_to_dict(s, np.zeros((s.n_slots, 3))))
    if args.out:
        Path(args.out).write_text(text + "\n")
        _log(args, f"{s.n_s_layers} S-layers, {s.n_cnot_layers} CNOT layers, {s.n_slots} slots -> {args.out}")
    else:
        print(text)
    return 0


def cmd_synth(args) -> int:
    if args.target:
        u_goal = load_target(args.target)
        n = int(round(math.log2(u_goal.shape[0])))
        if 2**n != u_goal.shape[0]:
            raise CliError(f"target dimension {u_goal.shape[0]} is not a power of two")
        if args.n is not None and args.n != n:
            raise CliError(f"--n {args.n} does not match the {u_goal.shape[0]}-dimensional target")
        args.n = n
        target_seed = None
    else:
        if args.n is None:
            raise CliError("--n is required with a Haar target")
        target_seed = args.haar_seed if args.haar_seed is not None else derive_seed(args.seed, 0)
        u_goal = haar_random_unitary(args.n, np.random.default_rng(target_seed))
    s = _skeleton_from_args(args)
    config = _optimizer_config(args)
    init_seed = args.init_seed if args.init_seed is not None else derive_seed(args.seed, 1)
    result = synthesize(u_goal, s, config, seed=init_seed)

    out = Path(args.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    doc = _result_doc(result, config, s)
    doc["target_seed"] = target_seed
    doc["target"] = str(args.target) if args.target else "haar"
    _write_json(out / "result.json", doc)
    write_trace_csv(out / "trace.csv", result.trace)
    (out / "circuit.json").write_text(dumps(s, result.angles) + "\n")
    if args.qasm:
        (out / "circuit.qasm").write_text(export_qasm(s, result.angles))
    wall = result.trace[-1][2]
    _write_json(out / "metadata.json", _metadata({"wall_seconds": wall}))
    _log(
        args,
        f"{result.status.value}: cost {result.final_cost:.3e} after {result.sweeps_used} sweeps "
        f"({wall:.1f} s, {s.n_s_layers} S-layers, {s.n_cnots} CNOTs)",
    )
    return result.status.exit_code


MODES = ("RandomTargets", "FixedTargetMultiInit", "LayerSweep")


def resolve_experiment(doc: dict, args=None) -> dict:
    """Fill defaults; the result is embedded in the summary and can be rerun as is."""
    if "config" in doc and "mode" not in doc:
        doc = doc["config"]
    known = {"mode", "n_qubits", "topology", "center", "leaves", "graph_file", "layers", "trials",
             "optimizer", "master_seed"}
    unknown = set(doc) - known
    if unknown:
        raise CliError(f"unknown experiment fields: {sorted(unknown)}")
    mode = doc.get("mode", "RandomTargets")
    if mode not in MODES:
        raise CliError(f"unknown mode {mode!r}; choose from {', '.join(MODES)}")
    if "n_qubits" not in doc:
        raise CliError("experiment config needs 'n_qubits'")
    n = int(doc["n_qubits"])
    trials = int(doc.get("trials", 1))
    if trials < 1:
        raise CliError("trials must be >= 1")
    topo = {
        "n_qubits": n,
        "topology": doc.get("topology") or _default_topology(n),
        "center": doc.get("center", 0),
        "leaves": doc.get("leaves"),
        "graph_file": doc.get("graph_file"),
    }
    layers = doc.get("layers", "auto")
    layers = layers if isinstance(layers, list) else [layers]
    if not layers:
        raise CliError("layer list is empty")
    try:
        resolved_layers = [resolve_cnot_layers(topo, x) + 1 for x in layers]
    except ValueError as exc:
        raise CliError(str(exc)) from None
    try:
        opt = OptimizerConfig.from_dict(doc.get("optimizer", {}))
    except (TypeError, ValueError) as exc:
        raise CliError(f"optimizer config: {exc}") from None
    seed = doc.get("master_seed")
    if seed is None:
        seed = args.seed if args is not None else 0
    return {
        "mode": mode,
        **topo,
        "layers": resolved_layers,
        "trials": trials,
        "optimizer": opt.to_dict(),
        "master_seed": int(seed),
    }


def experiment_jobs(cfg: dict) -> list[dict]:
    """Trial list with derived seeds.

    Stream ``2i`` seeds the target of trial ``i``, stream ``2i + 1`` its
    initial angles. FixedTargetMultiInit shares the target of trial 0.
    """
    jobs = []
    for i in range(cfg["trials"]):
        target_seed = derive_seed(cfg["master_seed"], 0 if cfg["mode"] == "FixedTargetMultiInit" else 2 * i)
        init_seed = derive_seed(cfg["master_seed"], 2 * i + 1)
        for layers in cfg["layers"]:
            jobs.append({"trial": i, "layers": layers, "target_seed": target_seed, "init_seed": init_seed})
    return jobs


def run_trial(cfg: dict, job: dict) -> dict:
    out = dict(job)
    try:
        s = build_skeleton(cfg, job["layers"] - 1)
        u = haar_random_unitary(cfg["n_qubits"], np.random.default_rng(job["target_seed"]))
        r = synthesize(u, s, OptimizerConfig.from_dict(cfg["optimizer"]), seed=job["init_seed"])
        out.update(r.summary())
        out["trace"] = r.trace
        out["angles"] = r.angles.tolist()
    except Exception as exc:  # recorded per trial, the batch goes on
        out.update({"status": "Error", "error": f"{type(exc).__name__}: {exc}", "final_cost": None,
                    "sweeps_used": None, "trace": []})
    return out


def _summarize(rows: list[dict]) -> dict:
    done = [r for r in rows if r["status"] != "Error"]
    costs = np.array([r["final_cost"] for r in done], dtype=float)
    conv = [r for r in done if r["status"] == Status.CONVERGED.value]
    counts = {}
    for r in rows:
        counts[r["status"]] = counts.get(r["status"], 0) + 1
    q = np.quantile(costs, [0.0, 0.25, 0.5, 0.75, 1.0]).tolist() if costs.size else [None] * 5
    return {
        "trials": len(rows),
        "success_rate": len(conv) / len(rows),
        "status_counts": dict(sorted(counts.items())),
        "median_sweeps": float(np.median([r["sweeps_used"] for r in done])) if done else None,
        "median_sweeps_converged": float(np.median([r["sweeps_used"] for r in conv])) if conv else None,
        "cost_quantiles": dict(zip(["min", "q25", "median", "q75", "max"], q)),
    }


def cmd_experiment(args) -> int:
    try:
        doc = json.loads(Path(args.config).read_text())
    except (OSError, ValueError) as exc:
        raise CliError(f"cannot read experiment config {args.config}: {exc}") from None
    cfg = resolve_experiment(doc, args)
    jobs = experiment_jobs(cfg)
    if args.jobs > 1 and len(jobs) > 1:
        from concurrent.futures import ProcessPoolExecutor

        with ProcessPoolExecutor(args.jobs) as pool:
            rows = list(pool.map(run_trial, [cfg] * len(jobs), jobs))
    else:
        rows = []
        for job in jobs:
            rows.append(run_trial(cfg, job))
            _log(args, f"trial {job['trial']} layers {job['layers']}: {rows[-1]['status']} "
                       f"cost {rows[-1]['final_cost']}")

    out = Path(args.output_dir)
    (out / "traces").mkdir(parents=True, exist_ok=True)
    (out / "trials").mkdir(exist_ok=True)
    cols = ["trial", "layers", "target_seed", "init_seed", "status", "final_cost", "sweeps_used"]
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(cols)
    for r in rows:
        stem = f"trial{r['trial']:03d}_L{r['layers']}"
        w.writerow([r[c] if r[c] is not None else "" for c in cols])
        if r["trace"]:
            write_trace_csv(out / "traces" / f"{stem}.csv", r["trace"])
        _write_json(out / "trials" / f"{stem}.json", {k: v for k, v in r.items() if k != "trace"})
    (out / "trials.csv").write_text(buf.getvalue())
    summary = {
        "config": cfg,
        "overall": _summarize(rows),
        "by_layers": {str(L): _summarize([r for r in rows if r["layers"] == L]) for L in cfg["layers"]},
    }
    _write_json(out / "summary.json", summary)
    _write_json(out / "metadata.json", _metadata())
    _log(args, f"success rate {summary['overall']['success_rate']:.3f} over {len(rows)} runs -> {out}")
    return 0


def cmd_analyze(args) -> int:
    if args.circuit:
        try:
            s, _ = loads(Path(args.circuit).read_text(), require_angles=False)
        except (OSError, ValueError) as exc:
            raise CliError(str(exc)) from None
    else:
        s = _skeleton_from_args(args)
    method = args.method
    if method == "auto":
        sequential = s.n_cnots and all(len(x) == 1 for x in s.cnot_layers) and s.dressing.value == "support"
        method = "combinatorial" if sequential and s.n_qubits <= 3 else "tangent"
    try:
        if method == "combinatorial":
            report = effective_parameters_combinatorial(s)
        else:
            report = effective_parameters_numeric(s, method=method, seed=args.seed, budget=args.budget)
    except (ValueError, BudgetExceededError) as exc:
        raise CliError(str(exc)) from None
    doc = {**report.to_dict(), "n_qubits": s.n_qubits, "slots": s.n_slots, "cnot_layers": s.n_cnot_layers}
    if args.json:
        print(json.dumps(doc, sort_keys=True))
    else:
        for key in ("n_qubits", "cnot_layers", "slots", "nominal", "effective", "required", "adequate", "method"):
            print(f"{key:>12}  {doc[key]}")
    return 0


def _parse_cnots(text: str) -> list[int]:
    out = []
    for part in text.split(","):
        if "-" in part:
            lo, hi = part.split("-")
            out.extend(range(int(lo), int(hi) + 1))
        else:
            out.append(int(part))
    return out


def cmd_failprob(args) -> int:
    cnots = _parse_cnots(args.cnots)
    rows = []
    if args.exact:
        if args.n != 3:
            raise CliError(f"exact counting needs n = 3 (got {args.n}); use --samples K for Monte Carlo")
        for N in cnots:
            c = count_adequate_sequences(N)
            rows.append([args.n, N, c.count, c.total, float(c.rate), 0.0])
    else:
        if args.samples is None:
            raise CliError("choose --exact or --samples K")
        rng = np.random.default_rng(args.seed)
        for N in cnots:
            r = success_rate_monte_carlo(args.n, N, args.samples, rng=rng, jobs=args.jobs)
            rows.append([args.n, N, r.successes, r.samples, r.rate, r.stderr])
    header = ["n", "n_cnots", "adequate", "total", "rate", "stderr"]
    print(f"{'n':>3} {'N':>4} {'adequate':>12} {'total':>12} {'rate':>9} {'stderr':>8}")
    for n, N, k, tot, rate, se in rows:
        print(f"{n:>3} {N:>4} {k:>12} {tot:>12} {100 * rate:>8.2f}% {100 * se:>7.2f}%")
    if args.csv:
        with open(args.csv, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(header)
            w.writerows([[*r[:4], repr(r[4]), repr(r[5])] for r in rows])
    return 0


# -- plotting -----------------------------------------------------------------
COLORS = ["#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b", "#e377c2", "#7f7f7f"]


def render_svg(series: list[tuple[str, list[tuple[int, float]]]], log_x: bool = False,
               width: int = 640, height: int = 420) -> str:
    """Line chart with a decade-ticked log y-axis."""
    floor = 1e-16
    left, right, top, bottom = 70, 170, 20, 50
    pw, ph = width - left - right, height - top - bottom
    xs = [x for _, pts in series for x, _ in pts]
    ys = [max(y, floor) for _, pts in series for _, y in pts]
    fx = (lambda x: math.log10(x + 1)) if log_x else float
    x0, x1 = fx(min(xs)), fx(max(xs))
    x1 = x1 if x1 > x0 else x0 + 1
    d0, d1 = math.floor(math.log10(min(ys))), math.ceil(math.log10(max(ys)))
    d1 = d1 if d1 > d0 else d0 + 1

    def px(x):
        return left + (fx(x) - x0) / (x1 - x0) * pw

    def py(y):
        return top + (d1 - math.log10(max(y, floor))) / (d1 - d0) * ph

    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
        f'viewBox="0 0 {width} {height}" font-family="sans-serif" font-size="11">',
        f'<rect x="{left}" y="{top}" width="{pw}" height="{ph}" fill="white" stroke="black"/>',
    ]
    step = max(1, (d1 - d0) // 10)
    for d in range(d0, d1 + 1, step):
        y = py(10.0**d)
        out.append(f'<line x1="{left - 4}" y1="{y:.2f}" x2="{left + pw}" y2="{y:.2f}" stroke="#ddd"/>')
        out.append(f'<text x="{left - 6}" y="{y + 4:.2f}" text-anchor="end">1e{d}</text>')
    for k in range(6):
        xv = x0 + (x1 - x0) * k / 5
        label = 10**xv - 1 if log_x else xv
        x = left + pw * k / 5
        out.append(f'<line x1="{x:.2f}" y1="{top + ph}" x2="{x:.2f}" y2="{top + ph + 4}" stroke="black"/>')
        out.append(f'<text x="{x:.2f}" y="{top + ph + 16}" text-anchor="middle">{label:.0f}</text>')
    out.append(f'<text x="{left + pw / 2:.2f}" y="{height - 10}" text-anchor="middle">sweep</text>')
    out.append(f'<text x="14" y="{top + ph / 2:.2f}" transform="rotate(-90 14 {top + ph / 2:.2f})" '
               'text-anchor="middle">cost</text>')
    for i, (name, pts) in enumerate(series):
        color = COLORS[i % len(COLORS)]
        coords = " ".join(f"{px(x):.2f},{py(y):.2f}" for x, y in pts)
        out.append(f'<polyline fill="none" stroke="{color}" stroke-width="1.5" points="{coords}"/>')
        ly = top + 14 + 16 * i
        out.append(f'<line x1="{left + pw + 10}" y1="{ly - 4}" x2="{left + pw + 30}" y2="{ly - 4}" '
                   f'stroke="{color}" stroke-width="2"/>')
        esc = name.replace("&", "&amp;").replace("<", "&lt;").replace(">", "&gt;")
        out.append(f'<text x="{left + pw + 35}" y="{ly}">{esc}</text>')
    out.append("</svg>")
    return "\n".join(out) + "\n"


def cmd_plot(args) -> int:
    series = []
    for path in args.traces:
        try:
            pts = read_trace_csv(path)
        except (OSError, KeyError) as exc:
            raise CliError(f"cannot read trace {path}: {exc}") from None
        except ValueError as exc:
            raise CliError(str(exc)) from None
        series.append((Path(path).name, pts))
    svg = render_svg(series, log_x=args.log_x)
    out = Path(args.out) if args.out else Path(args.output_dir) / "convergence.svg"
    out.parent.mkdir(parents=True, exist_ok=True)
    out.write_text(svg)
    _log(args, f"{len(series)} series -> {out}")
    return 0


# -- parser -------------------------------------------------------------------
def _layers_arg(text: str):
    if text == "auto":
        return text
    try:
        return int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected an integer or 'auto', got {text!r}") from None


def build_parser() -> argparse.ArgumentParser:
    glob = argparse.ArgumentParser(add_help=False)
    glob.add_argument("--seed", type=int, default=argparse.SUPPRESS, help="master seed (default 0)")
    glob.add_argument("--output-dir", default=argparse.SUPPRESS, help="directory for artifacts (default .)")
    glob.add_argument("--jobs", type=int, default=argparse.SUPPRESS, help="worker processes (default 1)")
    glob.add_argument("--quiet", action="store_true", default=argparse.SUPPRESS)

    topo = argparse.ArgumentParser(add_help=False)
    topo.add_argument("--n", type=int, help="number of qubits")
    topo.add_argument("--topology", choices=TOPOLOGIES,
                      help="default: full for even n, cyclic for odd n")
    topo.add_argument("--layers", type=_layers_arg, default="auto",
                      help="S-layer count (CNOT layers + 1) or 'auto'")
    topo.add_argument("--cnot-layers", type=int, help="CNOT-layer count; overrides --layers")
    topo.add_argument("--center", type=int, default=0, help="star center qubit")
    topo.add_argument("--leaves", type=lambda s: [int(x) for x in s.split(",")],
                      help="comma-separated star leaves (default: all other qubits)")
    topo.add_argument("--graph", help="coupling graph JSON {n_qubits, edges}")

    p = argparse.ArgumentParser(prog="gdsynth", description=__doc__.splitlines()[0], parents=[glob])
    p.add_argument("--version", action="version", version=f"gdsynth {__version__}")
    sub = p.add_subparsers(dest="command", required=True)

    sp = sub.add_parser("skeleton", parents=[glob, topo], help="emit a skeleton as circuit JSON")
    sp.add_argument("--out", help="write to file instead of stdout")
    sp.set_defaults(func=cmd_skeleton)

    sp = sub.add_parser("synth", parents=[glob, topo], help="synthesize one target")
    g = sp.add_mutually_exclusive_group()
    g.add_argument("--target", help="target JSON {dim, re, im}")
    g.add_argument("--haar-seed", type=int, help="Haar-random target from this seed")
    sp.add_argument("--init-seed", type=int, help="seed for the initial angles")
    sp.add_argument("--threshold", type=float, default=1e-8)
    sp.add_argument("--plateau-window", type=int, default=200)
    sp.add_argument("--plateau-rel", type=float, default=1e-4)
    sp.add_argument("--max-sweeps", type=int, default=50_000)
    sp.add_argument("--variant", choices=["svd", "euler_gradient"], default="svd")
    sp.add_argument("--lr", type=float, default=0.05, help="learning rate for euler_gradient")
    sp.add_argument("--qasm", action="store_true", help="also write circuit.qasm")
    sp.set_defaults(func=cmd_synth)

    sp = sub.add_parser("experiment", parents=[glob], help="run a batch from a JSON config")
    sp.add_argument("config", help="experiment config (or a previous summary.json)")
    sp.set_defaults(func=cmd_experiment)

    sp = sub.add_parser("analyze", parents=[glob, topo], help="effective-parameter report")
    sp.add_argument("--circuit", help="circuit JSON instead of topology flags")
    sp.add_argument("--method", choices=["auto", "fd", "tangent", "combinatorial"], default="auto")
    sp.add_argument("--budget", type=int, default=4000, help="max nominal parameters for numeric rank")
    sp.add_argument("--json", action="store_true")
    sp.set_defaults(func=cmd_analyze)

    sp = sub.add_parser("failprob", parents=[glob], help="success rates of random sequential skeletons")
    sp.add_argument("--n", type=int, required=True)
    sp.add_argument("--cnots", required=True, help="e.g. 14, 14-16 or 61,64,67")
    mode = sp.add_mutually_exclusive_group()
    mode.add_argument("--exact", action="store_true")
    mode.add_argument("--samples", type=int)
    sp.add_argument("--csv", help="also write the table as CSV")
    sp.set_defaults(func=cmd_failprob)

    sp = sub.add_parser("plot", parents=[glob], help="SVG of convergence traces")
    sp.add_argument("traces", nargs="+")
    sp.add_argument("--out", help="SVG path (default OUTPUT_DIR/convergence.svg)")
    sp.add_argument("--log-x", action="store_true")
    sp.set_defaults(func=cmd_plot)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    for key, default in (("seed", 0), ("output_dir", "."), ("jobs", 1), ("quiet", False)):
        if not hasattr(args, key):
            setattr(args, key, default)
    try:
        return args.func(args)
    except CliError as exc:
        print(f"gdsynth {args.command}: error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
