"""geowalk command line: gen / bias / exact / simulate / verify / sweep.

All tabular output is CSV (header row, fixed column order, 17 significant
digits for reals) so repeated runs with identical flags are byte-identical
and diffable.  Every run also emits a small JSON manifest: next to the
output file when --out is given, on stderr otherwise.
"""

from __future__ import annotations

import csv
import hashlib
import io
import json
import math
import sys
import time
from pathlib import Path

import click

from geowalk import __version__
from geowalk.graph import load_instance, save_instance, to_dot
from geowalk.geodesic import bfs_distances, bias_map
from geowalk.markov import (
    ResidualTooLargeError,
    SolveOverflowError,
    absorption_probabilities,
    expected_hitting_times,
    retrace_probability,
)
from geowalk.simulate import WalkConfig, estimate_hitting_time, run_walk
from geowalk.constructions import (
    bounded_construction,
    path_construction,
    trap_construction,
    unbounded_construction,
)
from geowalk import bounds as bnd


def _fmt(value) -> str:
    if isinstance(value, float):
        return f"{value:.17g}"
    return "" if value is None else str(value)


def _render_csv(header, rows, trailer: str | None = None) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([_fmt(c) for c in row])
    if trailer:
        buf.write(trailer + "\n")
    return buf.getvalue()


def _deliver(text: str, out: str | None) -> list[str]:
    if out:
        Path(out).write_text(text)
        return [out]
    click.echo(text, nl=False)
    return ["stdout"]


def _emit_manifest(command: str, input_path, seed, outputs, started: float) -> None:
    digest = None
    if input_path:
        digest = hashlib.sha256(Path(input_path).read_bytes()).hexdigest()
    manifest = {
        "command": command,
        "argv": sys.argv[1:],
        "input_sha256": digest,
        "seed": seed,
        "version": __version__,
        "wall_time_s": round(time.monotonic() - started, 6),
        "outputs": outputs,
    }
    text = json.dumps(manifest, indent=1)
    file_outputs = [o for o in outputs if o != "stdout"]
    if file_outputs:
        Path(file_outputs[0] + ".manifest.json").write_text(text + "\n")
    else:
        click.echo(text, err=True)


@click.group()
@click.version_option(version=__version__)
def main():
    """Geodesic-biased random walks: generators, exact analysis, Monte Carlo."""


@main.command()
@click.option("--construction", required=True,
              type=click.Choice(["unbounded", "bounded", "trap", "path"]))
@click.option("--k", type=int, default=None, help="fan parameter (unbounded)")
@click.option("--m", type=int, default=None, help="spine length (bounded)")
@click.option("--clique", type=int, default=None, help="clique size (trap)")
@click.option("--n", type=int, default=None, help="path length (path)")
@click.option("--out", required=True, type=click.Path(dir_okay=False))
@click.option("--dot", type=click.Path(dir_okay=False), default=None)
def gen(construction, k, m, clique, n, out, dot):
    """Generate a named construction and write the instance file."""
    started = time.monotonic()
    needed = {"unbounded": ("--k", k), "bounded": ("--m", m),
              "trap": ("--clique", clique), "path": ("--n", n)}
    flag, value = needed[construction]
    if value is None:
        raise click.UsageError(f"{construction} construction requires {flag}")
    try:
        if construction == "unbounded":
            inst = unbounded_construction(value)
        elif construction == "bounded":
            inst = bounded_construction(value)
        elif construction == "trap":
            inst = trap_construction(value)
        else:
            inst = path_construction(value)
    except ValueError as exc:
        raise click.UsageError(str(exc))
    save_instance(inst, out)
    outputs = [out]
    if dot:
        Path(dot).write_text(to_dot(inst))
        outputs.append(dot)
    _emit_manifest("gen", None, None, outputs, started)


@main.command()
@click.option("--input", "input_path", required=True, type=click.Path(exists=True, dir_okay=False))
@click.option("--tie-break", type=click.Choice(["min", "max"]), default="min")
@click.option("--out", type=click.Path(dir_okay=False), default=None)
def bias(input_path, tie_break, out):
    """Print the forced-step table for the excited vertices."""
    started = time.monotonic()
    inst = load_instance(input_path)
    g = inst.graph
    field = bfs_distances(g, inst.b)
    forced = bias_map(g, field, inst.excited, tie_break).forced_step
    rows = [
        (x, g.label(x), y, g.label(y), field.dist[x], field.dist[y])
        for x, y in sorted(forced.items())
    ]
    text = _render_csv(
        ["excited_id", "excited_label", "next_id", "next_label", "dist_before", "dist_after"],
        rows,
    )
    outputs = _deliver(text, out)
    _emit_manifest("bias", input_path, None, outputs, started)


@main.command()
@click.option("--input", "input_path", required=True, type=click.Path(exists=True, dir_okay=False))
@click.option("--rational", is_flag=True, default=False)
@click.option("--tol", type=float, default=1e-9)
@click.option("--tie-break", type=click.Choice(["min", "max"]), default="min")
@click.option("--out", type=click.Path(dir_okay=False), default=None)
def exact(input_path, rational, tol, tie_break, out):
    """Expected hitting times of the target from every vertex (linear solve)."""
    started = time.monotonic()
    inst = load_instance(input_path)
    g = inst.graph
    field = bfs_distances(g, inst.b)
    try:
        sol = expected_hitting_times(
            g, inst.b, inst.excited, tol=tol, rational=rational, tie_break=tie_break
        )
    except (SolveOverflowError, ResidualTooLargeError) as exc:
        raise click.ClickException(f"exact solve failed: {exc}")
    rows = [
        (x, g.label(x), field.dist[x], float(sol.times[x])) for x in range(g.n)
    ]
    method = "rational" if rational else "float"
    trailer = (
        f"# T_ab={_fmt(float(sol.times[inst.a]))}"
        f" residual={_fmt(sol.residual)} method={method}"
    )
    text = _render_csv(
        ["vertex_id", "label", "dist_to_target", "expected_hitting_time"], rows, trailer
    )
    outputs = _deliver(text, out)
    _emit_manifest("exact", input_path, None, outputs, started)


@main.command()
@click.option("--input", "input_path", required=True, type=click.Path(exists=True, dir_okay=False))
@click.option("--trials", type=int, required=True)
@click.option("--max-steps", type=int, required=True)
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--workers", type=int, default=1, show_default=True)
@click.option("--record", type=click.Path(dir_okay=False), default=None,
              help="write one space-separated trajectory per line to this file")
@click.option("--tie-break", type=click.Choice(["min", "max"]), default="min")
@click.option("--out", type=click.Path(dir_okay=False), default=None)
def simulate(input_path, trials, max_steps, seed, workers, record, tie_break, out):
    """Monte Carlo estimate of the hitting time from source to target."""
    started = time.monotonic()
    if trials < 1:
        raise click.UsageError("--trials must be >= 1")
    if max_steps < 1:
        raise click.UsageError("--max-steps must be >= 1")
    inst = load_instance(input_path)
    g = inst.graph
    report = estimate_hitting_time(
        g, inst.b, inst.excited, inst.a, trials, max_steps, seed,
        workers=workers, tie_break=tie_break,
    )
    outputs = []
    if record:
        from geowalk.rng import split

        with open(record, "w") as fh:
            for i in range(trials):
                cfg = WalkConfig(start=inst.a, max_steps=max_steps, seed=split(seed, i))
                outcome = run_walk(g, inst.b, inst.excited, cfg,
                                   record=True, tie_break=tie_break)
                fh.write(" ".join(str(v) for v in outcome.trajectory) + "\n")
        outputs.append(record)
    text = _render_csv(
        ["trials", "hits", "censored", "mean_hit_time_conditional_on_hit",
         "censoring_fraction", "standard_error"],
        [(report.trials, report.hits, report.censored,
          report.mean_hit_time_conditional_on_hit,
          report.censoring_fraction, report.standard_error)],
    )
    outputs = _deliver(text, out) + outputs
    _emit_manifest("simulate", input_path, seed, outputs, started)


def _param_range(param, max_param):
    if param is None:
        raise click.UsageError("--param is required")
    hi = param if max_param is None else max_param
    if hi < param:
        raise click.UsageError(f"empty parameter range [{param}, {hi}]")
    return range(param, hi + 1)


def _verify_rows_bounded(m: int, tol: float) -> list[bnd.BoundReport]:
    inst = bounded_construction(m)
    g = inst.graph
    eps = float(bnd.epsilon_retrace(m))
    rows = [
        bnd.make_report(
            "retrace_epsilon", {"m": m}, "eq", eps,
            retrace_probability(m, tol=tol).epsilon, rel_tol=1e-9,
        )
    ]
    sol = expected_hitting_times(g, inst.b, inst.excited, tol=tol)
    v1 = inst.id_of("v1")
    t_v1 = float(sol.times[v1])
    ex = bnd.excursion_bounds(m)
    rows.append(
        bnd.make_report(
            "escape_time_lower_bound", {"m": m}, "ge", ex.hitting_bound_simple, t_v1
        )
    )
    p = float(
        absorption_probabilities(
            g, inst.b, inst.excited, avoid={inst.a}, reach={inst.b}, tol=tol
        ).q[v1]
    )
    rows.append(
        bnd.make_report("renewal_inequality", {"m": m}, "ge", 1.0 / p, t_v1)
    )
    rows.append(
        bnd.make_report(
            "long_excursion_relaxation", {"m": m}, "le",
            -math.sqrt(m) / 10.0, ex.log_p_long,
        )
    )
    return rows


def _verify_rows_unbounded(k: int, tol: float) -> list[bnd.BoundReport]:
    inst = unbounded_construction(k)
    g = inst.graph
    m = inst.params["m"]
    spine = [inst.a] + [inst.id_of(f"v{i}") for i in range(1, m + 1)] + [inst.b]
    t_spine = []
    for j in range(1, m + 2):  # hitting times of v_1..v_m and b, from a
        sol = expected_hitting_times(
            g, spine[j], inst.excited, bias_target=inst.b, tol=tol
        )
        t_spine.append(float(sol.times[inst.a]))
    rows = []
    for j in range(1, m + 2):
        lb = bnd.spine_hitting_lower_bound(k, j)
        rows.append(
            bnd.make_report(
                "spine_hitting_lower_bound", {"k": k, "j": j},
                "ge", lb.value, t_spine[j - 1],
            )
        )
    for j in range(1, m + 1):
        floor = bnd.spine_ratio_floor(k, j) * t_spine[j - 1]
        rows.append(
            bnd.make_report(
                "spine_growth_ratio", {"k": k, "j": j}, "ge", floor, t_spine[j]
            )
        )
    return rows


@main.command()
@click.option("--construction", required=True, type=click.Choice(["unbounded", "bounded"]))
@click.option("--param", type=int, default=None)
@click.option("--max-param", type=int, default=None)
@click.option("--tol", type=float, default=1e-9)
@click.option("--out", type=click.Path(dir_okay=False), default=None)
def verify(construction, param, max_param, tol, out):
    """Check the closed-form bounds against exact solver values."""
    started = time.monotonic()
    reports: list[bnd.BoundReport] = []
    for p in _param_range(param, max_param):
        if construction == "bounded":
            reports.extend(_verify_rows_bounded(p, tol))
        else:
            reports.extend(_verify_rows_unbounded(p, tol))
    rows = [
        (r.name, construction,
         ";".join(f"{k}={v}" for k, v in r.params.items()),
         r.relation, r.bound_value, r.measured_value,
         "true" if r.satisfied else "false", r.slack)
        for r in reports
    ]
    text = _render_csv(
        ["name", "construction", "params", "relation", "bound_value",
         "measured_value", "satisfied", "slack"],
        rows,
    )
    outputs = _deliver(text, out)
    _emit_manifest("verify", None, None, outputs, started)
    if reports and not any(r.satisfied for r in reports):
        raise click.ClickException("no bound satisfied")


@main.command()
@click.option("--construction", required=True, type=click.Choice(["unbounded", "bounded"]))
@click.option("--param", type=int, default=None)
@click.option("--max-param", type=int, default=None)
@click.option("--analyses", default="exact,verify", show_default=True,
              help="comma-separated subset of exact,simulate,verify")
@click.option("--trials", type=int, default=10000, show_default=True)
@click.option("--max-steps", type=int, default=100000, show_default=True)
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--tol", type=float, default=1e-9)
@click.option("--out", type=click.Path(dir_okay=False), default=None)
def sweep(construction, param, max_param, analyses, trials, max_steps, seed, tol, out):
    """One summary row per parameter value across the chosen analyses."""
    started = time.monotonic()
    chosen = {s.strip() for s in analyses.split(",") if s.strip()}
    unknown = chosen - {"exact", "simulate", "verify"}
    if unknown or not chosen:
        raise click.UsageError(f"--analyses must name exact/simulate/verify, got {analyses!r}")
    rows = []
    ok_rows = 0
    for p in _param_range(param, max_param):
        inst = (bounded_construction(p) if construction == "bounded"
                else unbounded_construction(p))
        g = inst.graph
        status = "ok"
        t_ab = log_t = bound_log = satisfied = None
        mc_mean = mc_censor = mc_se = None
        bound_name = None
        try:
            if chosen & {"exact", "verify"}:
                sol = expected_hitting_times(g, inst.b, inst.excited, tol=tol)
                t_ab = float(sol.times[inst.a])
                log_t = math.log(t_ab) if t_ab > 0 else None
            if "verify" in chosen:
                if construction == "bounded":
                    bound_name = "escape_time_lower_bound"
                    ex = bnd.excursion_bounds(p)
                    bound_log = ex.log_hitting_bound_simple
                    measured = float(sol.times[inst.id_of("v1")])
                    satisfied = "true" if (
                        measured >= ex.hitting_bound_simple * (1 - 1e-9)
                    ) else "false"
                else:
                    m = inst.params["m"]
                    bound_name = "spine_hitting_lower_bound"
                    lb = bnd.spine_hitting_lower_bound(p, m + 1)
                    bound_log = lb.log_value
                    satisfied = "true" if (
                        log_t is not None and log_t >= lb.log_value - 1e-9
                    ) else "false"
            if "simulate" in chosen:
                rep = estimate_hitting_time(
                    g, inst.b, inst.excited, inst.a, trials, max_steps, seed
                )
                mc_mean = rep.mean_hit_time_conditional_on_hit
                mc_censor = rep.censoring_fraction
                mc_se = rep.standard_error
        except (SolveOverflowError, ResidualTooLargeError) as exc:
            status = type(exc).__name__
        else:
            ok_rows += 1
        rows.append(
            (construction, p, g.n, status, t_ab, log_t,
             bound_name, bound_log, satisfied, mc_mean, mc_censor, mc_se)
        )
    text = _render_csv(
        ["construction", "param", "n", "status", "T_ab", "log_T_ab",
         "bound_name", "bound_log_value", "satisfied",
         "mc_mean", "mc_censoring_fraction", "mc_standard_error"],
        rows,
    )
    outputs = _deliver(text, out)
    _emit_manifest("sweep", None, seed, outputs, started)
    if rows and ok_rows == 0:
        raise click.ClickException("every sweep row failed")


if __name__ == "__main__":
    main()
