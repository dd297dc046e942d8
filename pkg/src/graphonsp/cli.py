"""Command-line interface.

Exit codes: 0 success, 1 numerical failure or failed trend assertion,
2 usage error, 3 missing input data.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from .errors import BudgetExceededError, MissingDataError, NumericalError
from .experiments import (
    DEFAULTS,
    ExperimentConfig,
    check_trends,
    default_config,
    run_experiment,
    write_outputs,
)
from .filters import (
    PolyFilter,
    apply_poly,
    apply_spectral_graph_filter,
    parse_filter_spec,
)
from .graph import (
    eigendecompose,
    read_adjacency_csv,
    read_edge_list,
    read_signal_csv,
    signed_eigenvalues,
    write_adjacency_csv,
    write_signal_csv,
)
from .graphon import SBM, parse_graphon_spec, sample_graph, sample_latents
from .homdensity import (
    Motif,
    cycle_density_graph,
    hom_density_graph,
    hom_density_graphon,
    read_motif,
)
from .spectral import graphon_eigs

EXIT_OK, EXIT_NUMERIC, EXIT_USAGE, EXIT_DATA = 0, 1, 2, 3


class UsageError(Exception):
    pass


def _int_list(text: str) -> tuple:
    try:
        return tuple(int(t) for t in text.split(",") if t.strip())
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from None


def _float_list(text: str) -> tuple:
    try:
        return tuple(float(t) for t in text.split(",") if t.strip())
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from None


def _read_graph(path):
    path = Path(path)
    if not path.exists():
        raise MissingDataError(f"graph file {path} not found")
    if path.suffix.lower() == ".csv":
        return read_adjacency_csv(path)
    return read_edge_list(path)


def _snapshot(path, args: dict) -> None:
    Path(path).write_text(json.dumps(args, indent=2, sort_keys=True, default=str) + "\n")


# --- subcommands ----------------------------------------------------------------


def cmd_sample(args) -> int:
    if args.n < 1:
        raise UsageError("--n must be at least 1")
    W = parse_graphon_spec(args.graphon)
    rng = np.random.default_rng(args.seed)
    labels = sample_latents(args.n, args.labels, rng)
    G = sample_graph(W, labels, args.mode, rng)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    write_adjacency_csv(G, out / "adjacency.csv")
    write_signal_csv(labels.u, out / "labels.csv", header=f"schema=v1\nlabels mode={args.labels}")
    _snapshot(out / "config.json", {k: v for k, v in vars(args).items() if k != "func"})
    print(f"edge density {G.edge_density():.6f}")
    return EXIT_OK


def cmd_spectrum(args) -> int:
    lines = ["# schema=v1"]
    if args.graph:
        G = _read_graph(args.graph)
        idx, lam = signed_eigenvalues(G.S)
        lines.append(f"# source=graph {args.graph} n={G.n}")
        lines.append("index,eigenvalue,eigenvalue_over_n")
        lines += [f"{j},{v!r},{v / G.n!r}" for j, v in zip(idx.tolist(), lam.tolist())]
    else:
        W = parse_graphon_spec(args.graphon)
        k = None if args.k is None or 2 * args.k >= args.N else args.k
        basis = graphon_eigs(W, N=args.N, k=k)
        lines.append(f"# source=graphon {args.graphon} N={args.N} k={args.k}")
        lines.append("index,eigenvalue")
        lines += [f"{j},{float(v)!r}" for j, v in zip(basis.indices.tolist(), basis.eigvals)]
    text = "\n".join(lines) + "\n"
    if args.out:
        Path(args.out).write_text(text)
    else:
        sys.stdout.write(text)
    return EXIT_OK


def _load_filter(args):
    given = [x is not None for x in (args.taps, args.filter, args.filter_file)]
    if sum(given) != 1:
        raise UsageError("give exactly one of --taps, --filter, --filter-file")
    if args.taps is not None:
        return PolyFilter(args.taps)
    if args.filter is not None:
        return parse_filter_spec(args.filter)
    path = Path(args.filter_file)
    if not path.exists():
        raise MissingDataError(f"filter file {path} not found")
    for line in path.read_text().splitlines():
        line = line.strip()
        if line and not line.startswith("#"):
            return parse_filter_spec(line)
    raise UsageError(f"{path} holds no filter spec")


def cmd_filter(args) -> int:
    G = _read_graph(args.graph)
    x = read_signal_csv(args.signal)
    f = _load_filter(args)
    if args.mode == "poly":
        if not isinstance(f, PolyFilter):
            raise UsageError("poly mode needs polynomial taps")
        y = apply_poly(G, f, x)
        note = "y = sum_k h_k S^k x on the raw shift"
    else:
        y = apply_spectral_graph_filter(eigendecompose(G), f, x)
        note = "y = V h(Lambda / n) V^T x with eigenvalues normalized by n"
    header = ["schema=v1", f"mode={args.mode}", f"filter={f.spec}", f"normalization: {note}"]
    if args.check:
        if not isinstance(f, PolyFilter):
            raise UsageError("--check compares modes and needs polynomial taps")
        a = apply_poly(G, f, x)
        b = apply_spectral_graph_filter(eigendecompose(G), _Unbounded(f.rescaled(G.n)), x)
        gap = float(np.max(np.abs(a - b))) if len(a) else 0.0
        header.append(f"cross-mode max gap={gap!r}")
        print(f"cross-mode max gap {gap:.3e}")
    write_signal_csv(y, args.out, header="\n".join(header))
    return EXIT_OK


class _Unbounded:
    # evaluates a polynomial response without the [-1, 1] range guard, which
    # rescaled taps h_k n^k do not need
    def __init__(self, f):
        self.f = f

    def __call__(self, lam):
        return self.f._h(np.asarray(lam, dtype=float))


def _motif(text: str) -> Motif:
    name, _, arg = text.partition(":")
    if name in ("cycle", "path", "complete") and not arg.strip().isdigit():
        raise UsageError(f"motif {text!r} needs an integer size, e.g. {name}:4")
    if name == "edge":
        return Motif.edge()
    if name == "triangle":
        return Motif.cycle(3)
    if name == "cycle":
        return Motif.cycle(int(arg))
    if name == "path":
        return Motif.path(int(arg))
    if name == "complete":
        return Motif.complete(int(arg))
    if Path(text).exists():
        return read_motif(text)
    raise UsageError(f"unknown motif {text!r}")


def cmd_density(args) -> int:
    F = _motif(args.motif)
    if bool(args.graph) == bool(args.graphon):
        raise UsageError("give exactly one of --graph and --graphon")
    if args.graph:
        G = _read_graph(args.graph)
        n = G.n
        try:
            value = hom_density_graph(F, G)
        except BudgetExceededError:
            if F.name.startswith("C") and F.name[1:].isdigit():
                value = cycle_density_graph(int(F.name[1:]), G)
            else:
                raise
        stderr = 0.0
    else:
        W = parse_graphon_spec(args.graphon)
        n = "inf"
        rng = np.random.default_rng(args.seed)
        method = args.method or ("step_exact" if W.is_step or isinstance(W, SBM) else "monte_carlo")
        value, stderr = hom_density_graphon(F, W, method, args.samples, rng)
    row = f"{F.name or args.motif},{n},{args.seed},{value!r},{stderr!r}\n"
    text = "# schema=v1\nmotif,n,seed,value,stderr\n" + row
    if args.out:
        p = Path(args.out)
        if p.exists() and args.append:
            with open(p, "a") as fh:
                fh.write(row)
        else:
            p.write_text(text)
    else:
        sys.stdout.write(text)
    return EXIT_OK


def cmd_experiment(args) -> int:
    overrides = {}
    if args.graphon:
        overrides["graphons"] = tuple(args.graphon)
    for key, val in (
        ("n_list", args.n),
        ("reps", args.reps),
        ("N", args.N),
        ("ref_N", args.ref_N),
        ("filter", args.filter),
        ("sigma", args.sigma),
        ("master_seed", args.seed),
        ("threads", args.threads),
        ("align", args.align),
        ("coupling", args.coupling),
        ("data", args.data),
        ("K_list", args.K),
        ("k_nn", args.k_nn),
        ("symmetrize", args.symmetrize),
        ("indices", args.indices),
    ):
        if val is not None:
            overrides[key] = val
    if args.config:
        base = ExperimentConfig.load(args.config)
        if base.name != args.name:
            raise UsageError(f"config file is for {base.name!r}, not {args.name!r}")
        cfg = base.replace(**overrides)
    else:
        cfg = default_config(args.name, **overrides)
    report = run_experiment(cfg)
    paths = write_outputs(report, cfg, args.out, svg=not args.no_svg)
    if cfg.name == "movie":
        from .movielens import write_movie_table

        write_movie_table(report, report.base, Path(args.out) / "movie_table.csv")
    for rec in report.summary():
        keys = " ".join(f"{k}={v}" for k, v in rec.items() if k not in ("count", "mean", "median", "q68", "q95", "q997", "metric"))
        print(f"{rec['metric']} {keys} mean={rec['mean']:.4g} median={rec['median']:.4g}")
    print(f"wrote {paths['rows']}")
    if args.assert_trend:
        results = check_trends(report, args.trend_stat)
        for label, ok in results:
            print(f"trend {'PASS' if ok else 'FAIL'}: {label}")
        if not all(ok for _, ok in results):
            return EXIT_NUMERIC
    return EXIT_OK


# --- parser -------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="graphonsp", description="Graphon signal processing toolkit.")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("sample", help="sample a W-random graph")
    s.add_argument("--graphon", required=True, help="family:params, e.g. er:0.4, sbm2:0.8,0.2, exp:2.3, step:B.csv")
    s.add_argument("--n", type=int, required=True)
    s.add_argument("--mode", choices=["bernoulli", "weighted"], default="bernoulli")
    s.add_argument("--labels", choices=["uniform_iid", "regular_grid"], default="uniform_iid")
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--out", default="sample_out", help="output directory")
    s.set_defaults(func=cmd_sample)

    s = sub.add_parser("spectrum", help="signed-index eigenvalues of a graph or graphon")
    g = s.add_mutually_exclusive_group(required=True)
    g.add_argument("--graph", help="adjacency CSV (.csv) or edge list file")
    g.add_argument("--graphon", help="graphon spec")
    s.add_argument("--k", type=int, default=20, help="eigenpairs per sign for graphons")
    s.add_argument("--N", type=int, default=2000, help="graphon discretization resolution")
    s.add_argument("--out", help="output CSV (stdout by default)")
    s.set_defaults(func=cmd_spectrum)

    s = sub.add_parser("filter", help="filter a graph signal")
    s.add_argument("--graph", required=True)
    s.add_argument("--signal", required=True, help="one-column CSV")
    s.add_argument("--taps", type=_float_list, help="polynomial taps, e.g. 1,0.5,0.25")
    s.add_argument("--filter", help="filter spec, e.g. pwl:-1:1,0:0,1:1 or lowpass:0.5,0.2")
    s.add_argument("--filter-file", help="file whose first non-comment line is a filter spec")
    s.add_argument("--mode", choices=["poly", "spectral"], default="poly")
    s.add_argument("--check", action="store_true", help="report the poly/spectral agreement gap")
    s.add_argument("--out", required=True)
    s.set_defaults(func=cmd_filter)

    s = sub.add_parser("density", help="homomorphism density of a motif")
    s.add_argument("--motif", required=True, help="edge, triangle, cycle:k, path:k, complete:k or an edge-list file")
    s.add_argument("--graph")
    s.add_argument("--graphon")
    s.add_argument("--method", choices=["step_exact", "monte_carlo"])
    s.add_argument("--samples", type=int, default=100_000)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--out")
    s.add_argument("--append", action="store_true", help="append the row to an existing CSV")
    s.set_defaults(func=cmd_density)

    s = sub.add_parser("experiment", help="run a convergence experiment")
    s.add_argument("name", choices=sorted(DEFAULTS))
    s.add_argument("--config", help="JSON config file (as written to config.json)")
    s.add_argument("--graphon", action="append", help="graphon spec; repeat for several models")
    s.add_argument("--n", type=_int_list, help="node counts, e.g. 50,100,200")
    s.add_argument("--reps", type=int)
    s.add_argument("--N", type=int, help="graphon discretization resolution")
    s.add_argument("--ref-N", dest="ref_N", type=int, help="reference resolution for eigconv")
    s.add_argument("--filter")
    s.add_argument("--sigma", type=float)
    s.add_argument("--indices", type=_int_list, help="signed eigenvalue indices for eigconv")
    s.add_argument("--align", choices=["signed", "magnitude"])
    s.add_argument("--coupling", choices=["nested", "independent"], help="one growing graph sequence per rep, or fresh graphs per cell")
    s.add_argument("--data", help="u.data path or 'synthetic' (movie)")
    s.add_argument("--K", type=_int_list, help="filter orders (movie)")
    s.add_argument("--k-nn", dest="k_nn", type=int)
    s.add_argument("--symmetrize", choices=["max", "mean"])
    s.add_argument("--seed", type=int)
    s.add_argument("--threads", type=int)
    s.add_argument("--out", default="experiment_out")
    s.add_argument("--no-svg", action="store_true")
    s.add_argument("--assert-trend", action="store_true", help="exit 1 if a trend check fails")
    s.add_argument("--trend-stat", choices=["mean", "median"], default="mean", help="seed average used by --assert-trend")
    s.set_defaults(func=cmd_experiment)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except FileNotFoundError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except (UsageError, ValueError) as exc:
        # ValidationError and DomainError are ValueErrors, as are malformed input files
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (NumericalError, BudgetExceededError) as exc:
        print(f"numerical error: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
