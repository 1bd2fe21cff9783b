"""Command line experiment runner.

Every run writes its data files plus ``manifest.json`` into ``--out``.
Files are staged in a temporary directory and moved into place only when
the run finishes, so a failed run leaves no partial output.

Exit codes: 0 success, 1 a check failed, 2 invalid usage or configuration,
3 a resource cap was exceeded.
"""
from __future__ import annotations

import argparse
import bisect
import csv
import hashlib
import io
import json
import random
import shutil
import sys
import tempfile
from concurrent.futures import ProcessPoolExecutor
from fractions import Fraction
from pathlib import Path

import numpy as np

from . import __version__
from .folner import boundary_ratio_from_boundary, folner_set, format_fraction, profile_table
from .group import evaluate_word, serialize
from .metric import (
    ResourceLimitError,
    cayley_ball,
    cayley_edges,
    s1_letters,
    schreier_ball,
    sphere_sizes,
    to_csv_edges,
    to_dot,
    witness_word,
    word_length,
)
from .selftest import run_selftest
from .tree import ORIGIN, distance, format_vertex
from .walk import (
    confinement_lower_bound,
    parse_mu,
    return_counts_mc,
    return_probability_exact,
    sample_path,
)
from .walk.stats import geodesic_tracking_stats, late_dca, support_profile
from .wreath import isometry_check

EXIT_OK, EXIT_CHECK, EXIT_USAGE, EXIT_RESOURCE = 0, 1, 2, 3

COMMANDS = ("walk", "metric", "schreier", "embed-check", "folner", "return-prob", "selftest")

# option name -> (type, default); None defaults are filled per command
OPTIONS = {
    "q": (int, 2),
    "mu": (str, None),
    "steps": (int, 100_000),
    "chains": (int, 16),
    "seed": (int, None),
    "jobs": (int, 1),
    "radius": (int, None),
    "r_max": (int, 3),
    "n_max": (int, 4),
    "out": (str, "out"),
    "format": (str, "csv"),
    "trials": (int, 100_000),
    "pairs": (int, 100_000),
    "window": (int, 3),
    "trace_every": (int, 1000),
    "max_elements": (int, 2_000_000),
    "oracle": (bool, False),
}

DEFAULT_RADIUS = {"metric": 8, "schreier": 6, "embed-check": 5, "return-prob": 2}
RANDOMIZED = {"walk", "embed-check", "return-prob"}


class UsageError(Exception):
    pass


def _bool(text: str) -> bool:
    t = text.strip().lower()
    if t in ("1", "true", "yes", "on"):
        return True
    if t in ("0", "false", "no", "off"):
        return False
    raise UsageError(f"not a boolean: {text!r}")


def read_config(path) -> dict:
    """Flat ``key = value`` lines; ``#`` starts a comment; keys mirror the flags."""
    out = {}
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise UsageError(f"cannot read config {path}: {exc}") from exc
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        key, eq, value = line.partition("=")
        key = key.strip().replace("-", "_")
        if not eq or key not in OPTIONS:
            raise UsageError(f"{path}:{lineno}: unknown or malformed entry {raw!r}")
        typ = OPTIONS[key][0]
        value = value.strip()
        try:
            out[key] = _bool(value) if typ is bool else typ(value)
        except ValueError as exc:
            raise UsageError(f"{path}:{lineno}: bad value for {key}") from exc
    return out


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="daffine", description=__doc__.splitlines()[0])
    p.add_argument("command", choices=COMMANDS)
    p.add_argument("--config", help="flat key=value file; flags override it")
    for name, (typ, _) in OPTIONS.items():
        flag = "--" + name.replace("_", "-")
        if typ is bool:
            p.add_argument(flag, action="store_const", const=True, default=None)
        else:
            p.add_argument(flag, type=typ, default=None)
    return p


def resolve(args: argparse.Namespace) -> dict:
    cfg = read_config(args.config) if args.config else {}
    out = {}
    for name, (_, default) in OPTIONS.items():
        flag = getattr(args, name)
        out[name] = flag if flag is not None else cfg.get(name, default)
    cmd = args.command
    if out["mu"] is None:
        out["mu"] = "uniform-s0" if cmd == "folner" else "uniform-s1"
    if out["radius"] is None:
        out["radius"] = DEFAULT_RADIUS.get(cmd, 3)
    if out["format"] not in ("csv", "json", "dot"):
        raise UsageError(f"unknown format {out['format']!r}")
    if cmd in RANDOMIZED and out["seed"] is None:
        raise UsageError(f"{cmd} needs an explicit --seed")
    for key in ("steps", "chains", "jobs", "trials", "pairs", "trace_every", "n_max", "r_max"):
        if out[key] is not None and out[key] <= 0:
            raise UsageError(f"--{key.replace('_', '-')} must be positive")
    out["command"] = cmd
    return out


# -- output ------------------------------------------------------------------

class Output:
    def __init__(self, cfg: dict):
        self.cfg = cfg
        self.dir = Path(tempfile.mkdtemp(prefix=".daffine-"))
        self.files: list[str] = []

    def header(self) -> str:
        c = self.cfg
        return (f"# daffine {__version__} command={c['command']} q={c['q']} "
                f"mu={c['mu']} seed={c['seed']}\n")

    def write(self, name: str, text: str, header: bool = True) -> None:
        (self.dir / name).write_text((self.header() if header else "") + text)
        self.files.append(name)

    def csv(self, name: str, rows, columns) -> None:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(columns)
        w.writerows(rows)
        self.write(name, buf.getvalue())

    def json(self, name: str, data) -> None:
        self.write(name, json.dumps(data, indent=1, sort_keys=True) + "\n", header=False)

    def commit(self, target: Path, status: str) -> None:
        digests = {}
        for name in sorted(self.files):
            digests[name] = hashlib.sha256((self.dir / name).read_bytes()).hexdigest()
        manifest = {
            "command": self.cfg["command"],
            "config": {k: v for k, v in sorted(self.cfg.items()) if k != "command"},
            "status": status,
            "files": digests,
            "versions": {"daffine": __version__, "numpy": np.__version__},
        }
        (self.dir / "manifest.json").write_text(json.dumps(manifest, indent=1, sort_keys=True) + "\n")
        target.mkdir(parents=True, exist_ok=True)
        for name in [*self.files, "manifest.json"]:
            shutil.move(str(self.dir / name), str(target / name))
        self.discard()

    def discard(self) -> None:
        shutil.rmtree(self.dir, ignore_errors=True)


def _frac(x: Fraction) -> str:
    return format_fraction(Fraction(x))


# -- walk --------------------------------------------------------------------

def _walk_chain(args):
    mu, steps, seed, chain, window, trace_every = args
    tr = sample_path(mu, steps, seed, chain=chain, window=window)
    # number of window modifications since the previous trace row
    times = [n for n, _ in tr.window.changes]
    trace = []
    prev = 0
    for n in range(0, steps + 1, trace_every):
        hi = bisect.bisect_right(times, n)
        trace.append((n, tr.phi(n), format_vertex(tr.orbit_vertex(n)), hi - prev))
        prev = hi
    dca = late_dca(tr)
    tracking = geodesic_tracking_stats(tr).ratio_max if mu.drift != 0 else ""
    prof = support_profile(tr, range(1, max(2, tr.state.pool.top.ray + 1)))
    row = [chain, steps, int(tr.phi_hat[-1]), f"{tr.phi_hat[-1] / steps:.10g}",
           f"{tr.state.word_length() / steps:.10g}", format_vertex(tr.orbit_vertex(steps)),
           dca.level, dca.join, tr.window.max_last_modified(), len(tr.window.changes),
           len(tr.window.frozen), tracking if tracking == "" else f"{tracking:.6g}",
           prof.exceed_log, prof.exceed_linear, prof.support_size]
    window = {
        "chain": chain,
        "radius": window,
        "R": tr.window.R,
        "n_steps": steps,
        "values": {format_vertex(v): "".join(map(str, p))
                   for v, p in sorted(tr.window.values.items())},
        "last_modified": {format_vertex(v): n for v, n in sorted(tr.window.last_modified.items())},
        "frozen": sorted(format_vertex(v) for v in tr.window.frozen),
    }
    return row, trace, window


def cmd_walk(cfg, out: Output) -> bool:
    mu = parse_mu(cfg["mu"], cfg["q"])
    tasks = [(mu, cfg["steps"], cfg["seed"], c, cfg["window"], cfg["trace_every"])
             for c in range(cfg["chains"])]
    if cfg["jobs"] > 1:
        with ProcessPoolExecutor(max_workers=cfg["jobs"]) as ex:
            results = list(ex.map(_walk_chain, tasks))
    else:
        results = [_walk_chain(t) for t in tasks]
    out.csv("chains.csv", [r[0] for r in results],
            ["chain", "steps", "phi_inverted", "slope", "speed", "orbit_end", "late_dca_level",
             "late_dca_join", "window_last_change", "window_changes", "window_frozen",
             "tracking_ratio", "support_exceed_log", "support_exceed_linear", "support_size"])
    for row, trace, window in results:
        c = row[0]
        out.csv(f"trace_{c:03d}.csv", trace, ["n", "phi_w", "orbit_vertex", "window_changes"])
        out.json(f"window_{c:03d}.json", window)
    slopes = np.array([r[0][2] / cfg["steps"] for r in results])
    se = (float(mu.phi_variance) / (cfg["steps"] * len(results))) ** 0.5
    ok = abs(slopes.mean() - float(mu.drift)) <= 4 * se
    out.csv("summary.csv", [[mu.label, _frac(mu.drift), f"{slopes.mean():.10g}", f"{se:.6g}",
                             int(ok), mu.radius, int(mu.user_asserted)]],
            ["mu", "exact_drift", "mean_slope", "standard_error", "within_4se", "R",
             "user_asserted"])
    return True


# -- metric ------------------------------------------------------------------

def cmd_metric(cfg, out: Output) -> bool:
    q = cfg["q"]
    letters = s1_letters(q)
    dist = cayley_ball(letters, cfg["radius"], max_elements=cfg["max_elements"])
    order = sorted(dist, key=lambda g: (dist[g], serialize(g)))
    spheres = sphere_sizes(dist)
    mism = [0] * len(spheres)
    if cfg["oracle"]:
        for g in order:
            if word_length(g) != dist[g]:
                mism[dist[g]] += 1
    out.csv("spheres.csv", [[r, n, mism[r] if cfg["oracle"] else ""] for r, n in enumerate(spheres)],
            ["radius", "count", "mismatches"])
    # witness words for an evenly spaced sample of the ball
    step = max(1, len(order) // 1000)
    bad = 0
    rows = []
    for g in order[::step]:
        w = witness_word(g)
        ok = len(w) == word_length(g) and evaluate_word(w, q) == g
        bad += not ok
        rows.append([serialize(g), word_length(g), " ".join(map(str, w)), int(ok)])
    out.csv("witness.csv", rows, ["element", "word_length", "witness", "ok"])
    if cfg["format"] == "dot":
        out.write("cayley.dot", to_dot(order, cayley_edges(dist, letters), "Cayley"), header=False)
    return sum(mism) == 0 and bad == 0


def cmd_schreier(cfg, out: Output) -> bool:
    g = schreier_ball(cfg["radius"], cfg["q"])
    rows = [[format_vertex(v), distance(ORIGIN, v), g.dist.get(v, ""),
             int(v in g.dist and distance(ORIGIN, v) <= g.dist[v] <= 2 * distance(ORIGIN, v))]
            for v in g.vertices]
    out.csv("distances.csv", rows, ["vertex", "tree_distance", "schreier_distance", "ok"])
    if cfg["format"] == "dot":
        out.write("schreier.dot", to_dot(g.vertices, g.edges, "Schreier"), header=False)
    else:
        out.write("schreier_edges.csv", to_csv_edges(g.edges))
    return not g.bound_violations()


def cmd_embed_check(cfg, out: Output) -> bool:
    q = cfg["q"]
    dist = cayley_ball(s1_letters(q), cfg["radius"], max_elements=cfg["max_elements"])
    els = sorted(dist, key=lambda g: (dist[g], serialize(g)))
    rng = random.Random(cfg["seed"])
    diag_fail = sum(not isometry_check(g, g) for g in els)
    pair_fail = 0
    for _ in range(cfg["pairs"]):
        if not isometry_check(rng.choice(els), rng.choice(els)):
            pair_fail += 1
    out.csv("embed.csv", [["diagonal", len(els), diag_fail], ["random_pairs", cfg["pairs"], pair_fail]],
            ["sweep", "checked", "failures"])
    return diag_fail == 0 and pair_fail == 0


def cmd_folner(cfg, out: Output) -> bool:
    mu = parse_mu(cfg["mu"], cfg["q"])
    rows = profile_table(cfg["r_max"], mu, cap=cfg["max_elements"])
    ok = True
    table = []
    for row in rows:
        U = folner_set(row.r, mu.q, cap=cfg["max_elements"])
        agree = boundary_ratio_from_boundary(U, mu) == row.ratio
        within = row.ratio <= Fraction(2, row.r)
        ok = ok and agree and within
        table.append([row.r, row.size, _frac(row.ratio), f"{float(row.ratio):.12g}",
                      f"{row.inv_loglog:.12g}", f"{row.scaled:.12g}", int(agree), int(within)])
    out.csv("folner.csv", table, ["r", "size", "ratio", "ratio_decimal", "inv_loglog_size",
                                  "ratio_times_loglog", "routes_agree", "ratio_le_2_over_r"])
    return ok


def cmd_return_prob(cfg, out: Output) -> bool:
    mu = parse_mu(cfg["mu"], cfg["q"])
    tab = return_probability_exact(mu, cfg["n_max"], max_support=cfg["max_elements"])
    out.csv("exact.csv", [[r.n, _frac(r.probability), f"{float(r.probability):.12g}", r.support_size]
                          for r in tab.rows], ["n", "probability", "decimal", "support_size"])
    ok = True
    rows = []
    for chain in range(cfg["chains"]):
        for est in return_counts_mc(mu, cfg["n_max"], cfg["trials"], cfg["seed"], chain=chain):
            lo, hi = est.interval()
            inside = est.contains(tab.probability(est.n))
            ok = ok and inside
            rows.append([chain, est.n, est.trials, est.successes, f"{est.estimate:.10g}",
                         f"{lo:.10g}", f"{hi:.10g}", int(inside)])
    out.csv("mc.csv", rows, ["chain", "n", "trials", "successes", "estimate", "wilson_lo",
                             "wilson_hi", "contains_exact"])
    if mu.is_symmetric:
        crow = []
        for r in range(1, cfg["radius"] + 1):
            for n in range(1, cfg["n_max"] + 1):
                b = confinement_lower_bound(mu, r, n)
                exact = tab.probability(n)
                good = b.bound <= exact
                ok = ok and good
                crow.append([r, n, _frac(b.confinement), b.region_size, f"{float(b.bound):.6e}",
                             f"{float(b.heuristic):.6e}", f"{float(exact):.6e}", int(good)])
        out.csv("confinement.csv", crow, ["r", "n", "confinement", "region_size", "bound",
                                          "heuristic", "exact", "bound_le_exact"])
    return ok


def cmd_selftest(cfg, out: Output) -> bool:
    results = run_selftest(cfg["q"])
    out.csv("selftest.csv", [[name, int(ok)] for name, ok in results], ["check", "ok"])
    for name, ok in results:
        print(f"{'PASS' if ok else 'FAIL'}  {name}")
    return all(ok for _, ok in results)


HANDLERS = {
    "walk": cmd_walk,
    "metric": cmd_metric,
    "schreier": cmd_schreier,
    "embed-check": cmd_embed_check,
    "folner": cmd_folner,
    "return-prob": cmd_return_prob,
    "selftest": cmd_selftest,
}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code else EXIT_OK
    try:
        cfg = resolve(args)
        parse_mu(cfg["mu"], cfg["q"])
    except (UsageError, ValueError, OSError) as exc:
        print(f"daffine: {exc}", file=sys.stderr)
        return EXIT_USAGE
    out = Output(cfg)
    try:
        ok = HANDLERS[cfg["command"]](cfg, out)
    except ResourceLimitError as exc:
        out.discard()
        print(f"daffine: {exc}", file=sys.stderr)
        return EXIT_RESOURCE
    except (UsageError, ValueError) as exc:
        out.discard()
        print(f"daffine: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except BaseException:
        out.discard()
        raise
    out.commit(Path(cfg["out"]), "ok" if ok else "check-failed")
    if not ok:
        print(f"daffine: {cfg['command']}: a check failed, see {cfg['out']}", file=sys.stderr)
    return EXIT_OK if ok else EXIT_CHECK


if __name__ == "__main__":
    sys.exit(main())
