"""Experiment orchestration: seeded estimates, mesh sweeps and the CLI.

Every replica owns two RNG streams derived from (base seed, replica index):
one for the vertex field, one for the edge states.  Estimates are integer
indicator sums merged by replica index, so results are identical for any
worker count; adding events to a run never changes the others' estimates
because the streams are keyed by role, not by what is computed.

The ``gap`` event measures, on coupled samples, how much more often the
vertex-level crossing occurs than the edge-level one.  The per-sample
difference is always 0 or 1 (an open-edge path forces a same-sign vertex
path), which the runner asserts, so the gap is itself a proportion and gets
a Wilson interval like everything else.
"""

from __future__ import annotations

import argparse
import csv
import math
import multiprocessing
import os
import sys
import time
from dataclasses import dataclass, replace

import numpy as np
from scipy.special import ndtri

from . import gff, limits, metric, percolation
from .lattice import Arc, arc_vertices, build_lattice
from .percolation import CrossingMode

WORKERS_ENV = "GFFPERC_WORKERS"

# Critical boundary height for square-lattice level lines, taken from the
# level-line convergence literature (Schramm-Sheffield, adapted to the
# occupation-time Green normalization used here).  It is an external input:
# nothing in this library derives it, and runs that depend on it print it.
LAMBDA0 = math.sqrt(math.pi / 2.0)

EVENTS = ("discrete_alt", "discrete_zero", "metric_alt", "metric_zero",
          "closed_pivotal", "gap")
_CROSSING_EVENTS = {
    "discrete_alt": CrossingMode.DISCRETE_ALT,
    "discrete_zero": CrossingMode.DISCRETE_ZERO,
    "metric_alt": CrossingMode.METRIC_ALT,
    "metric_zero": CrossingMode.METRIC_ZERO,
}
_CSV_COLUMNS = ("L", "lambda", "bc", "event", "delta", "n",
                "p_hat", "ci_low", "ci_high", "seed", "seconds")

_Z95 = float(ndtri(0.975))


@dataclass(frozen=True)
class ExperimentConfig:
    """One experiment description; every run is a pure function of this."""

    L: float = 1.0
    lam: float = LAMBDA0
    bc: str = "alternating"  # 'zero' | 'alternating'
    events: tuple[str, ...] = ("discrete_alt",)
    deltas: tuple[float, ...] = (0.125,)
    samples: int = 1000
    seed: int = 0
    workers: int = 0  # 0: GFFPERC_WORKERS, then 1
    out: str | None = None

    def __post_init__(self):
        if self.bc not in ("zero", "alternating"):
            raise ValueError(f"unknown boundary condition {self.bc!r}")
        for ev in self.events:
            if ev not in EVENTS:
                raise ValueError(f"unknown event {ev!r}; choose from {EVENTS}")
        if not self.events:
            raise ValueError("no events requested")
        if not self.deltas:
            raise ValueError("empty mesh list")
        if self.samples < 100:
            raise ValueError("need at least 100 samples per point")
        for d in self.deltas:
            build_lattice(self.L, d)  # validates the mesh guard


@dataclass(frozen=True)
class Estimate:
    """Monte Carlo proportion with a 95% Wilson interval."""

    p_hat: float
    n: int
    ci_low: float
    ci_high: float
    seed: int
    seconds: float


def wilson_interval(successes: int, n: int, z: float = _Z95) -> tuple[float, float]:
    """Score interval for a binomial proportion; valid down to small p."""
    if n <= 0:
        raise ValueError("need a positive sample count")
    p = successes / n
    denom = 1.0 + z * z / n
    centre = (p + z * z / (2 * n)) / denom
    half = z * math.sqrt(p * (1.0 - p) / n + z * z / (4.0 * n * n)) / denom
    lo = 0.0 if successes == 0 else max(0.0, centre - half)
    hi = 1.0 if successes == n else min(1.0, centre + half)
    return lo, hi


# -- replica runner -----------------------------------------------------------


def _gap_pair(bc: str) -> tuple[str, str]:
    if bc == "alternating":
        return "discrete_alt", "metric_alt"
    return "discrete_zero", "metric_zero"


def _block_task(payload) -> dict[str, int]:
    """Integer indicator sums for one contiguous replica range."""
    (L, delta, bc_kind, lam, events, base_seed, start, stop) = payload
    lat = build_lattice(L, delta)
    bc = gff.alternating_bc(lam) if bc_kind == "alternating" else gff.ZERO_BC
    mean = gff.harmonic_extension(lat, gff.boundary_values(lat, bc)).values

    disc_ev, met_ev = _gap_pair(bc_kind)
    wanted = set(events)
    if "gap" in wanted:
        wanted |= {disc_ev, met_ev}
    need_edges = bool(wanted & {"metric_alt", "metric_zero", "closed_pivotal"})

    sums = {ev: 0 for ev in events}
    violations = 0
    boundary_open = 0
    boundary_edges = ~lat.edge_interior_mask

    for i in range(start, stop):
        f_rng = np.random.default_rng(np.random.SeedSequence(base_seed, spawn_key=(i, 0)))
        fluct = gff.sample_zero_boundary(lat, f_rng)
        values = mean + fluct.values

        flags: dict[str, bool] = {}
        if need_edges:
            e_rng = np.random.default_rng(
                np.random.SeedSequence(base_seed, spawn_key=(i, 1))
            )
            p_open = metric.edge_open_probabilities(lat, values)
            open_mask = e_rng.random(lat.n_edges) < p_open
            boundary_open += int(np.count_nonzero(open_mask & boundary_edges))
        for ev in wanted:
            if ev == "closed_pivotal":
                flags[ev] = percolation.closed_pivotal_exists(lat, open_mask)[0]
            elif ev.startswith("metric"):
                flags[ev] = percolation.crossing(lat, open_mask, _CROSSING_EVENTS[ev])
            elif ev != "gap":
                flags[ev] = percolation.crossing(lat, values, _CROSSING_EVENTS[ev])
        if "gap" in wanted or (disc_ev in wanted and met_ev in wanted):
            if flags.get(met_ev) and not flags.get(disc_ev):
                violations += 1
        if "gap" in wanted:
            flags["gap"] = flags[disc_ev] and not flags[met_ev]

        for ev in events:
            sums[ev] += int(flags[ev])

    sums["_violations"] = violations
    sums["_boundary_open"] = boundary_open
    return sums


def resolve_workers(requested: int) -> int:
    if requested > 0:
        return requested
    env = os.environ.get(WORKERS_ENV, "").strip()
    if env:
        return max(1, int(env))
    return 1


def _run_point(config: ExperimentConfig, delta: float) -> tuple[dict[str, int], float]:
    """Merged indicator sums for one mesh; deterministic in (config, seed)."""
    workers = resolve_workers(config.workers)
    n = config.samples
    payload = (config.L, delta, config.bc, config.lam, config.events, config.seed)
    t0 = time.perf_counter()
    if workers == 1:
        merged = _block_task(payload + (0, n))
    else:
        n_blocks = workers * 4
        bounds = [(n * b) // n_blocks for b in range(n_blocks + 1)]
        tasks = [payload + (bounds[b], bounds[b + 1]) for b in range(n_blocks)]
        ctx = multiprocessing.get_context("fork")
        with ctx.Pool(workers) as pool:
            parts = pool.map(_block_task, tasks)
        merged = {k: sum(p[k] for p in parts) for k in parts[0]}
    elapsed = time.perf_counter() - t0
    assert merged["_violations"] == 0, (
        f"{merged['_violations']} replicas had an edge-level crossing without "
        "the vertex-level one"
    )
    if config.bc == "zero":
        # Zero boundary data closes every boundary-incident edge.
        assert merged["_boundary_open"] == 0, "open boundary edge under zero data"
    return merged, elapsed


def estimate_event(config: ExperimentConfig, event: str) -> Estimate:
    """Estimate one event at a single mesh with a 95% Wilson interval."""
    if event not in EVENTS:
        raise ValueError(f"unknown event {event!r}")
    if len(config.deltas) != 1:
        raise ValueError("estimate_event expects exactly one mesh in the config")
    cfg = config if config.events == (event,) else replace(config, events=(event,))
    sums, elapsed = _run_point(cfg, cfg.deltas[0])
    lo, hi = wilson_interval(sums[event], cfg.samples)
    return Estimate(
        p_hat=sums[event] / cfg.samples,
        n=cfg.samples,
        ci_low=lo,
        ci_high=hi,
        seed=cfg.seed,
        seconds=elapsed,
    )


def sweep(config: ExperimentConfig) -> list[dict]:
    """Estimate every configured event across the mesh list.

    Returns one row per (mesh, event) plus one trailing diagnostic row per
    event carrying the fitted slope of log p_hat against log log(1/delta)
    and monotonicity flags; writes the table to ``config.out`` when set.
    """
    if len(config.deltas) < 3:
        raise ValueError("a sweep needs at least 3 mesh values")
    rows: list[dict] = []
    per_event: dict[str, list[tuple[float, float]]] = {ev: [] for ev in config.events}
    total_seconds = 0.0
    for delta in config.deltas:
        sums, elapsed = _run_point(config, delta)
        total_seconds += elapsed
        for ev in config.events:
            lo, hi = wilson_interval(sums[ev], config.samples)
            p_hat = sums[ev] / config.samples
            per_event[ev].append((delta, p_hat))
            rows.append({
                "L": config.L, "lambda": config.lam, "bc": config.bc,
                "event": ev, "delta": delta, "n": config.samples,
                "p_hat": p_hat, "ci_low": lo, "ci_high": hi,
                "seed": config.seed, "seconds": elapsed,
            })
    for ev in config.events:
        points = per_event[ev]
        p_vals = [p for _, p in points]
        slope = _loglog_slope(points)
        rows.append({
            "L": config.L, "lambda": config.lam, "bc": config.bc,
            "event": f"diag:{ev}", "delta": "", "n": config.samples * len(points),
            "p_hat": slope,
            "ci_low": float(all(b < a for a, b in zip(p_vals, p_vals[1:]))),
            "ci_high": float(all(b <= a for a, b in zip(p_vals, p_vals[1:]))),
            "seed": config.seed, "seconds": total_seconds,
        })
    if config.out:
        write_csv(config.out, rows)
    return rows


def _loglog_slope(points: list[tuple[float, float]]) -> float:
    """Least-squares slope of log p against log log(1/delta); nan if any
    estimate hit zero."""
    if any(p <= 0.0 for _, p in points):
        return float("nan")
    x = np.log(np.log(1.0 / np.array([d for d, _ in points])))
    y = np.log(np.array([p for _, p in points]))
    return float(np.polyfit(x, y, 1)[0])


def write_csv(path: str, rows: list[dict]) -> None:
    """RFC-4180 CSV with a fixed header and deterministic number formatting."""
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(_CSV_COLUMNS)
        for row in rows:
            writer.writerow([_format_cell(col, row[col]) for col in _CSV_COLUMNS])


def _format_cell(col: str, value) -> str:
    if value == "" or value is None:
        return ""
    if col in ("n", "seed"):
        return str(int(value))
    if col in ("bc", "event"):
        return str(value)
    if col == "seconds":
        return f"{value:.3f}"
    if isinstance(value, float) and math.isnan(value):
        return ""
    return f"{value:.12g}"


# -- config files ----------------------------------------------------------------


_CONFIG_KEYS = ("L", "lambda", "bc", "events", "deltas", "samples", "seed",
                "workers", "out")


def parse_config_file(path: str) -> dict[str, str]:
    """Line-oriented ``key = value`` file with # comments."""
    mapping: dict[str, str] = {}
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ValueError(f"{path}:{lineno}: expected 'key = value'")
            key, value = (part.strip() for part in line.split("=", 1))
            if key not in _CONFIG_KEYS:
                raise ValueError(f"{path}:{lineno}: unknown key {key!r}")
            mapping[key] = value
    return mapping


def _parse_delta(token: str) -> float:
    token = token.strip()
    if "/" in token:
        num, den = token.split("/", 1)
        if float(den) == 0.0:
            raise ValueError(f"bad mesh value {token!r}")
        return float(num) / float(den)
    return float(token)


def _parse_lambda(token: str) -> float:
    """Numeric value, or the symbolic name ``lambda0`` for the configured default."""
    token = token.strip()
    if token.lower() == "lambda0":
        return LAMBDA0
    return float(token)


def config_from_mapping(mapping: dict[str, str]) -> ExperimentConfig:
    kwargs: dict = {}
    if "L" in mapping:
        kwargs["L"] = float(mapping["L"])
    if "lambda" in mapping:
        kwargs["lam"] = _parse_lambda(mapping["lambda"])
    if "bc" in mapping:
        kwargs["bc"] = mapping["bc"].strip()
    if "events" in mapping:
        kwargs["events"] = tuple(
            tok.strip() for tok in mapping["events"].split(",") if tok.strip()
        )
    if "deltas" in mapping:
        kwargs["deltas"] = tuple(
            _parse_delta(tok) for tok in mapping["deltas"].split(",") if tok.strip()
        )
    if "samples" in mapping:
        kwargs["samples"] = int(mapping["samples"])
    if "seed" in mapping:
        kwargs["seed"] = int(mapping["seed"])
    if "workers" in mapping:
        kwargs["workers"] = int(mapping["workers"])
    if "out" in mapping:
        kwargs["out"] = mapping["out"].strip() or None
    return ExperimentConfig(**kwargs)


# -- CLI -------------------------------------------------------------------------


class _UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # argparse calls this on any usage problem
        raise _UsageError(f"{self.prog}: {message}\n{self.format_usage()}")


def _build_parser() -> _Parser:
    parser = _Parser(prog="gffperc", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", parser_class=_Parser)

    def add_common(p):
        p.add_argument("--L", type=float, default=None)
        p.add_argument("--delta", type=str, default=None,
                       help="mesh, or comma-separated list for sweeps; fractions allowed")
        p.add_argument("--lambda", dest="lam", type=str, default=None,
                       help="boundary level, or the symbolic name lambda0")
        p.add_argument("--bc", choices=["zero", "alternating"], default=None)
        p.add_argument("--mode", type=str, default=None,
                       help="event name, or comma-separated list for sweeps")
        p.add_argument("--samples", type=int, default=None)
        p.add_argument("--seed", type=int, default=None)
        p.add_argument("--workers", type=int, default=None)
        p.add_argument("--out", type=str, default=None)
        p.add_argument("--config", type=str, default=None,
                       help="key = value file; flags override its entries")

    p_sample = sub.add_parser("sample", help="dump one field, its edge states and level line")
    add_common(p_sample)
    p_sample.add_argument("--prefix", type=str, default="sample",
                          help="output path prefix")

    p_estimate = sub.add_parser("estimate", help="Monte Carlo estimate of one event")
    add_common(p_estimate)

    p_sweep = sub.add_parser("sweep", help="estimates across a mesh list, written as CSV")
    add_common(p_sweep)

    p_limit = sub.add_parser("limit", help="print the analytic crossing limit")
    p_limit.add_argument("--L", type=float, required=True)

    p_sle = sub.add_parser("sle", help="hitting-probability Monte Carlo for the driving diffusion")
    p_sle.add_argument("--x0", type=float, required=True)
    p_sle.add_argument("--samples", type=int, default=100_000)
    p_sle.add_argument("--dt", type=float, default=1e-4)
    p_sle.add_argument("--seed", type=int, default=0)

    sub.add_parser("selftest", help="run the built-in consistency checks")
    return parser


def _config_from_args(args) -> ExperimentConfig:
    mapping = parse_config_file(args.config) if args.config else {}
    if args.L is not None:
        mapping["L"] = str(args.L)
    if args.delta is not None:
        mapping["deltas"] = args.delta
    if args.lam is not None:
        mapping["lambda"] = args.lam
    if args.bc is not None:
        mapping["bc"] = args.bc
    if args.mode is not None:
        mapping["events"] = args.mode
    if args.samples is not None:
        mapping["samples"] = str(args.samples)
    if args.seed is not None:
        mapping["seed"] = str(args.seed)
    if args.workers is not None:
        mapping["workers"] = str(args.workers)
    if args.out is not None:
        mapping["out"] = args.out
    return config_from_mapping(mapping)


def _cmd_limit(args) -> int:
    images = limits.conformal_images(args.L)
    print(f"L = {args.L:.12g}")
    print(f"k = {images.k:.12f}")
    print(f"corner images: ya = {images.ya:.12f}, yb = {images.yb:.12f}, "
          f"yc = {images.yc:.12f}, yd = {images.yd:.12f}")
    print(f"crossing_limit = {limits.crossing_limit(args.L):.12f}")
    return 0


def _cmd_sle(args) -> int:
    if not -1.0 < args.x0 < 1.0:
        raise _UsageError("--x0 must lie in (-1, 1)")
    hits = limits.sle_hitting_mc(args.x0, args.samples, args.dt, args.seed)
    lo, hi = wilson_interval(hits, args.samples)
    analytic = 0.5 * (1.0 + args.x0)
    print(f"empirical P(+1) = {hits / args.samples:.6f}  "
          f"[{lo:.6f}, {hi:.6f}]  (n = {args.samples}, dt = {args.dt:g})")
    print(f"analytic  P(+1) = {analytic:.6f}")
    return 0


def _cmd_sample(args) -> int:
    cfg = _config_from_args(args)
    lat = build_lattice(cfg.L, cfg.deltas[0])
    bc = gff.alternating_bc(cfg.lam) if cfg.bc == "alternating" else gff.ZERO_BC
    field = gff.sample_with_boundary(
        lat, bc, np.random.SeedSequence(cfg.seed, spawn_key=(0, 0))
    )
    edge_states = metric.sample_edge_states(
        lat, field, np.random.SeedSequence(cfg.seed, spawn_key=(0, 1))
    )
    field_path = f"{args.prefix}.field.bin"
    edges_path = f"{args.prefix}.edges.csv"
    gff.save_field(field, field_path)
    with open(edges_path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["edge", "u", "v", "open"])
        for e in range(lat.n_edges):
            writer.writerow([e, int(lat.edges[e, 0]), int(lat.edges[e, 1]),
                             int(edge_states.open_mask[e])])
    written = [field_path, edges_path]
    if cfg.bc == "alternating":
        line = percolation.trace_level_line(lat, field)
        line_path = f"{args.prefix}.level_line.csv"
        percolation.export_level_line_csv(line, line_path)
        written.append(line_path)
        print(f"level line: {len(line.points)} points, exits {line.terminal.name}")
    for path in written:
        print(f"wrote {path}")
    return 0


def _cmd_estimate(args) -> int:
    cfg = _config_from_args(args)
    if len(cfg.events) != 1:
        raise _UsageError("estimate takes exactly one --mode")
    est = estimate_event(cfg, cfg.events[0])
    print(f"event = {cfg.events[0]}  L = {cfg.L:g}  delta = {cfg.deltas[0]:g}  "
          f"bc = {cfg.bc}  lambda = {cfg.lam:g}")
    print(f"p_hat = {est.p_hat:.6f}  ci95 = [{est.ci_low:.6f}, {est.ci_high:.6f}]  "
          f"n = {est.n}  seconds = {est.seconds:.1f}")
    if cfg.out:
        write_csv(cfg.out, [{
            "L": cfg.L, "lambda": cfg.lam, "bc": cfg.bc, "event": cfg.events[0],
            "delta": cfg.deltas[0], "n": est.n, "p_hat": est.p_hat,
            "ci_low": est.ci_low, "ci_high": est.ci_high,
            "seed": est.seed, "seconds": est.seconds,
        }])
        print(f"wrote {cfg.out}")
    return 0


def _cmd_sweep(args) -> int:
    cfg = _config_from_args(args)
    if not cfg.out:
        raise _UsageError("sweep needs --out (or an out entry in the config file)")
    rows = sweep(cfg)
    for row in rows:
        if str(row["event"]).startswith("diag:"):
            print(f"{row['event']}: slope = {row['p_hat']}, "
                  f"strict_decrease = {row['ci_low']:g}, nonincrease = {row['ci_high']:g}")
    print(f"wrote {cfg.out}")
    return 0


def cli_main(argv=None) -> int:
    """Entry point; returns 0 on success, 1 on usage errors, 2 on internal
    assertion failures."""
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
        if args.command is None:
            raise _UsageError(parser.format_usage())
        if args.command == "limit":
            return _cmd_limit(args)
        if args.command == "sle":
            return _cmd_sle(args)
        if args.command == "sample":
            return _cmd_sample(args)
        if args.command == "estimate":
            return _cmd_estimate(args)
        if args.command == "sweep":
            return _cmd_sweep(args)
        if args.command == "selftest":
            return run_selftest()
        raise _UsageError(f"unknown command {args.command!r}")
    except _UsageError as exc:
        print(str(exc), file=sys.stderr)
        return 1
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except AssertionError as exc:
        print(f"internal check failed: {exc}", file=sys.stderr)
        return 2


def main() -> None:
    raise SystemExit(cli_main())


# -- selftest ----------------------------------------------------------------------


def _check_lattice_arcs() -> None:
    for L, delta in ((1.0, 1 / 4), (2.0, 1 / 3), (1.5, 1 / 8), (0.75, 1 / 16)):
        lat = build_lattice(L, delta)
        sizes = sum(len(arc_vertices(lat, arc))
                    for arc in (Arc.LEFT, Arc.BOTTOM, Arc.RIGHT, Arc.TOP))
        assert sizes == int(np.count_nonzero(lat.boundary_mask))
        brute = sum(
            1
            for v in range(lat.n_vertices)
            for w in range(v + 1, lat.n_vertices)
            if abs(lat.grid_coords(v)[0] - lat.grid_coords(w)[0])
            + abs(lat.grid_coords(v)[1] - lat.grid_coords(w)[1]) == 1
        )
        assert brute == lat.n_edges


def _check_green_single_vertex() -> None:
    lat = build_lattice(1.0, 1 / 4)
    g = gff.dirichlet_green_dense(lat)
    assert abs(g.matrix[0, 0] - 1.0) < 1e-12


def _check_sine_agreement() -> None:
    rng = np.random.default_rng(7)
    arr = rng.standard_normal((20, 36))
    a = gff.sine_transform_2d(arr, method="naive")
    b = gff.sine_transform_2d(arr, method="fast")
    assert np.max(np.abs(a - b)) < 1e-8


def _check_harmonic_constant() -> None:
    lat = build_lattice(1.0, 1 / 8)
    data = np.full(lat.n_vertices, 2.5)
    out = gff.harmonic_extension(lat, data)
    assert np.max(np.abs(out.values - 2.5)) < 1e-9


def _check_edge_probability() -> None:
    assert metric.edge_open_probability(0.0, 3.7) == 0.0
    assert metric.edge_open_probability(-1.0, 5.0) == 0.0
    assert abs(metric.edge_open_probability(1.0, 1.0) - (1.0 - math.exp(-0.5))) < 1e-12


def _check_metric_green_fixtures() -> None:
    lat = build_lattice(1.0, 1 / 4)
    g = gff.dirichlet_green_dense(lat)
    boundary_edge = next(
        e for e in range(lat.n_edges)
        if not lat.interior_mask[lat.edges[e]].any()
    )
    mid = metric.EdgePoint(edge=int(boundary_edge), r=0.5)
    assert abs(metric.metric_green(lat, g, mid, mid) - 1.0) < 1e-12
    inner_edge = next(
        e for e in range(lat.n_edges)
        if lat.interior_mask[lat.edges[e]].any()
    )
    mid = metric.EdgePoint(edge=int(inner_edge), r=0.5)
    assert abs(metric.metric_green(lat, g, mid, mid) - 1.25) < 1e-12


def _check_crossing_oracle() -> None:
    lat = build_lattice(1.0, 1 / 12)
    rng = np.random.default_rng(11)
    for _ in range(200):
        values = rng.standard_normal(lat.n_vertices)
        open_mask = rng.random(lat.n_edges) < 0.55
        for mode in CrossingMode:
            probe = values if mode.value.startswith("discrete") else open_mask
            assert percolation.crossing(lat, probe, mode) == \
                percolation.flood_fill_crossing(lat, probe, mode)


def _check_pivotal_brute() -> None:
    lat = build_lattice(1.0, 1 / 8)
    rng = np.random.default_rng(13)
    for _ in range(60):
        open_mask = rng.random(lat.n_edges) < rng.uniform(0.2, 0.8)
        found, ids = percolation.closed_pivotal_exists(lat, open_mask)
        brute = []
        if not percolation.flood_fill_crossing(lat, open_mask, CrossingMode.METRIC_ALT):
            for e in np.flatnonzero(~open_mask):
                toggled = open_mask.copy()
                toggled[e] = True
                if percolation.flood_fill_crossing(lat, toggled, CrossingMode.METRIC_ALT):
                    brute.append(int(e))
        assert (found, ids) == (bool(brute), brute)


def _check_level_line_vs_crossing() -> None:
    lat = build_lattice(1.0, 1 / 8)
    bc = gff.alternating_bc(1.0)
    for seed in range(200):
        field = gff.sample_with_boundary(lat, bc, seed)
        line = percolation.trace_level_line(lat, field)
        crosses = percolation.crossing(lat, field, CrossingMode.DISCRETE_ALT)
        assert (line.terminal == Arc.RIGHT) == crosses


def _check_limit_identities() -> None:
    assert abs(limits.crossing_limit(1.0) - 0.5) < 1e-10
    assert abs(limits.crossing_limit(2.0) + limits.crossing_limit(0.5) - 1.0) < 1e-10
    images = limits.conformal_images(1.7)
    shift = lambda y: (y - images.yb) / (images.yd - y)  # yb -> 0, yd -> inf
    hit = limits.sle_hitting_probability(shift(images.ya), shift(images.yc))
    assert abs(hit - limits.crossing_limit(1.7)) < 1e-12


def _check_line_hitting() -> None:
    for b, t in ((0.5, 1.0), (1.0, 2.0), (2.0, 0.5)):
        direct = 2.0 * limits._norm_tail(b / math.sqrt(t))
        assert abs(limits.bm_line_hitting_cdf(0.0, b, t) - direct) < 1e-12
    assert abs(limits.bm_line_hitting_cdf(-0.4, 1.2, 1e8) - math.exp(-2 * 1.2 * 0.4)) < 1e-6


def _check_coordinate_change() -> None:
    path = limits.simulate_sle_diffusion(0.3, 1e-3, 5)
    changed = limits.coordinate_change_path(path)
    assert np.all(np.diff(changed.v_left) <= 1e-15)
    assert np.all(np.diff(changed.v_right) >= -1e-15)
    err = np.max(np.abs(changed.recovered_driver() - path.w))
    assert err < 10 * path.dt


def _check_wilson() -> None:
    lo, hi = wilson_interval(30, 100)
    assert 0.0 <= lo <= 0.3 <= hi <= 1.0


_SELFTESTS = (
    ("lattice arcs and edge counts", _check_lattice_arcs),
    ("green single interior vertex", _check_green_single_vertex),
    ("sine transform naive vs fast", _check_sine_agreement),
    ("harmonic extension of a constant", _check_harmonic_constant),
    ("edge open probability fixtures", _check_edge_probability),
    ("metric green fixtures", _check_metric_green_fixtures),
    ("crossing vs flood fill", _check_crossing_oracle),
    ("pivotal scan vs toggle brute force", _check_pivotal_brute),
    ("level line terminal vs crossing", _check_level_line_vs_crossing),
    ("conformal limit identities", _check_limit_identities),
    ("line hitting formula identities", _check_line_hitting),
    ("coordinate change round trip", _check_coordinate_change),
    ("wilson interval sanity", _check_wilson),
)


def run_selftest() -> int:
    failures = 0
    for name, check in _SELFTESTS:
        try:
            check()
        except Exception as exc:  # report and keep going
            failures += 1
            print(f"FAIL {name}: {exc}")
        else:
            print(f"ok   {name}")
    if failures:
        print(f"{failures} of {len(_SELFTESTS)} checks failed")
        return 2
    print(f"all {len(_SELFTESTS)} checks passed")
    return 0
