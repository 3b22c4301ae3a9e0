"""Command-line entry point: ``intprob <group> <command> [options]``.

Every run writes a JSON envelope
``{command, params, seed, value, error_estimate, n_samples, wall_time}``
(or a one-row CSV with ``--format csv``) to ``--out`` or standard output.
Relative output paths are placed under ``$OUTPUT_DIR`` when it is set.
Exit codes: 0 success, 1 runtime error, 2 usage or validation error; errors
are reported as JSON on standard error.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import sys
import time
from pathlib import Path

import numpy as np

SCHEMA_PATH = Path(__file__).with_name("schemas") / "result.schema.json"


class UsageError(Exception):
    """Invalid arguments or inputs (exit code 2)."""


class _Parser(argparse.ArgumentParser):
    def __init__(self, *args, **kwargs):
        kwargs.setdefault("allow_abbrev", False)
        super().__init__(*args, **kwargs)

    def error(self, message):
        raise UsageError(message)


# ---------------------------------------------------------------------------
# helpers
# ---------------------------------------------------------------------------

def _complex(text: str) -> complex:
    try:
        return complex(text.replace(" ", "").replace("i", "j"))
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"not a complex number: {text!r}") from exc


def _int_list(text: str) -> list[int]:
    try:
        return [int(x) for x in text.replace(",", " ").split()]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"not a list of integers: {text!r}") from exc


def _float_list(text: str) -> list[float]:
    try:
        return [float(x) for x in text.replace(",", " ").split()]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"not a list of numbers: {text!r}") from exc


def _seconds(text: str) -> float:
    text = text.strip().lower()
    scale = {"s": 1, "m": 60, "h": 3600}.get(text[-1:], None)
    return float(text[:-1]) * scale if scale else float(text)


def _jsonable(x):
    if isinstance(x, dict):
        return {str(k): _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    if isinstance(x, (np.integer,)):
        return int(x)
    if isinstance(x, (np.floating, float)):
        x = float(x)
        return x if math.isfinite(x) else None
    if isinstance(x, (complex, np.complexfloating)):
        return {"re": float(x.real), "im": float(x.imag)}
    if isinstance(x, np.ndarray):
        return _jsonable(x.tolist())
    return x


def resolve_output(path: str | None) -> Path | None:
    if path is None or path == "-":
        return None
    p = Path(path)
    base = os.environ.get("OUTPUT_DIR")
    if base and not p.is_absolute():
        p = Path(base) / p
    p.parent.mkdir(parents=True, exist_ok=True)
    return p


def _flatten(prefix: str, x, out: dict):
    if isinstance(x, dict):
        for k, v in x.items():
            _flatten(f"{prefix}.{k}" if prefix else k, v, out)
    elif isinstance(x, list):
        out[prefix] = json.dumps(x, separators=(",", ":"))
    else:
        out[prefix] = "" if x is None else x


def envelope_row(env: dict) -> dict:
    """Flatten an envelope to one CSV row (params and value fields unprefixed)."""
    row = {"command": env["command"], "seed": env.get("seed")}
    _flatten("", env.get("params", {}), row)
    value = env.get("value")
    if isinstance(value, dict):
        _flatten("", value, row)
    else:
        _flatten("value", value, row)
    for key in ("error_estimate", "n_samples", "wall_time"):
        row[key] = "" if env.get(key) is None else env[key]
    return row


def rows_to_csv(rows: list[dict]) -> str:
    cols: list[str] = []
    for r in rows:
        for k in r:
            if k not in cols:
                cols.append(k)
    buf = io.StringIO()
    wr = csv.DictWriter(buf, fieldnames=cols, lineterminator="\n", restval="")
    wr.writeheader()
    for r in rows:
        wr.writerow({k: ("" if r.get(k) is None else r.get(k)) for k in cols})
    return buf.getvalue()


def load_schema() -> dict:
    return json.loads(SCHEMA_PATH.read_text())


def check_envelope(env) -> None:
    """Structural check against the published result schema."""
    import jsonschema

    try:
        jsonschema.validate(env, load_schema())
    except jsonschema.ValidationError as exc:
        raise UsageError(f"envelope does not match schema: {exc.message}") from exc


# ---------------------------------------------------------------------------
# command implementations; each returns (value, error_estimate, n_samples)
# ---------------------------------------------------------------------------

def _hexagon(a):
    from .tilings import Hexagon
    return Hexagon(a.a, a.b, a.c)


def cmd_tilings_sample(a, rng):
    from . import tilings as til
    t = til.sample_tiling(_hexagon(a), rng)
    tiles = til.lozenges(t)
    if a.svg:
        resolve_output(a.svg).write_text(til.render_svg(t))
    if a.png:
        from .plots import tiling_figure
        tiling_figure(tiles, resolve_output(a.png), f"{a.a},{a.b},{a.c} hexagon")
    counts = {k: sum(1 for kind, _ in tiles if kind == k) for k in ("left", "right", "vertical")}
    return {"pattern": t.to_json(), "lozenges": len(tiles), "by_kind": counts}, None, 1


def cmd_tilings_enumerate(a, rng):
    from . import symfun as sf
    from . import tilings as til
    count, _ = til.enumerate_tilings(_hexagon(a), iterate=False)
    return {"count": count, "macmahon": sf.macmahon_count(a.a, a.b, a.c)}, None, None


def cmd_tilings_render(a, rng):
    from . import tilings as til
    data = json.loads(Path(a.input).read_text())
    value = data.get("value", data)
    rows = value["pattern"] if isinstance(value, dict) else value
    t = til.tiling_from_rows(_hexagon(a), rows)
    svg = til.render_svg(t)
    if a.svg:
        resolve_output(a.svg).write_text(svg)
    if a.png:
        from .plots import tiling_figure
        tiling_figure(til.lozenges(t), resolve_output(a.png))
    return {"lozenges": len(til.lozenges(t))}, None, None


def cmd_dynamics_run(a, rng):
    from . import dynamics as dyn
    profile = dyn.DynamicsProfile(a.regime, a.choice, a.q)
    if a.regime == "schur" and a.choice == "independent" and not a.events:
        st, log = dyn.evolve_schur_independent(a.N, a.t, rng), None
    else:
        st, log = dyn.evolve_array(dyn.ArrayState.packed(a.N), a.t, profile, rng, log=bool(a.events))
    if a.events and log is not None:
        resolve_output(a.events).write_text(log.to_csv())
    st.check()
    return {"rows": [list(r) for r in st.rows], "time": st.time}, None, 1


def cmd_dynamics_marginal(a, rng):
    from . import dynamics as dyn
    y = dyn.run_marginal_batch(a.kind, a.N, a.q, a.t, a.runs, rng)
    mean = y.mean(axis=0)
    se = y.std(axis=0, ddof=1) / math.sqrt(a.runs) if a.runs > 1 else np.full(a.N, np.nan)
    return {"mean": mean, "stderr": se}, float(np.nanmax(se)) if a.runs > 1 else None, a.runs


def cmd_dynamics_rsk(a, rng):
    from . import dynamics as dyn
    pat, word = dyn.rsk_from_words(a.N, a.t, rng, return_word=True)
    return {"rows": [list(r) for r in pat], "word": [[w[0], w[1]] for w in word]}, None, 1


def cmd_obs_density(a, rng):
    from . import observables as obs
    e = obs.density_vertical(a.t, a.h, a.n, full_output=True)
    return e.value, e.error_estimate, None


def cmd_obs_qmoments(a, rng):
    from . import observables as obs
    e = obs.qmoments(obs.MomentRequest(a.q, a.t, a.levels), a.mode, full_output=True)
    return e.value, e.error_estimate, None


def cmd_obs_pmoments(a, rng):
    from . import observables as obs
    e = obs.polymer_moments_integral(a.tau, a.levels, full_output=True)
    extra = {"value": e.value}
    if a.oracle:
        extra["ode_oracle"] = obs.polymer_moments_ode_oracle(a.tau, a.levels)
        return extra, e.error_estimate, None
    return e.value, e.error_estimate, None


def cmd_obs_qlaplace(a, rng):
    from . import observables as obs
    req = obs.LaplaceRequest(a.q, a.t, a.N, a.zeta, a.ell_max, a.n_max)
    e = obs.qlaplace_series(req, full_output=True)
    return e.value, e.error_estimate, None


def cmd_obs_mellin(a, rng):
    from . import observables as obs
    e = obs.mellin_barnes_n1(a.q, a.t, a.zeta, a.delta, full_output=True)
    return e.value, e.error_estimate, None


def cmd_asy_shape(a, rng):
    from . import asymptotics as asy
    r = asy.limit_shape_density((a.tau, a.nu, a.eta))
    value = {"label": r.label, "rho": r.rho, "boundary": r.boundary}
    if a.simulate:
        m, se = asy.empirical_density((a.tau, a.nu, a.eta), a.L, a.replicas, rng)
        value.update(empirical=m, empirical_stderr=se)
        return value, se, a.replicas
    return value, None, None


def cmd_asy_lyapunov(a, rng):
    from . import asymptotics as asy
    ps = list(range(1, a.p + 1))
    semi = [asy.lyapunov_semidiscrete(p) for p in ps]
    cont = [asy.lyapunov_continuous(p) for p in ps]
    return {"p": ps, "semidiscrete": semi, "continuous": cont}, None, None


def cmd_asy_constants(a, rng):
    from . import asymptotics as asy
    k = asy.kpz_constants(a.kappa)
    return {"f": k.f, "s": k.s, "g": k.g}, None, None


def cmd_asy_laplace(a, rng):
    from . import asymptotics as asy
    v, err = asy.laplace_fredholm(a.u, a.t, a.N, a.ell_max, full_output=True)
    return v, err, None


def cmd_asy_tw(a, rng):
    from . import asymptotics as asy
    vals, errs = [], []
    for r in a.r:
        v, e = asy.tracy_widom_cdf(r, a.g, a.ell_max, full_output=True)
        vals.append(v)
        errs.append(e)
    if len(a.r) == 1:
        return vals[0], errs[0], None
    return {"r": a.r, "F": vals}, max(errs), None


def cmd_pol_simulate(a, rng):
    from . import polymer as pol
    logZ = pol.simulate_partition_batch(a.N, a.t, a.replicas, a.seed, a.delta)
    Z = np.exp(logZ)
    n = a.replicas
    se = lambda x: float(x.std(ddof=1) / math.sqrt(n)) if n > 1 else None
    value = {"mean_logZ": float(logZ.mean()), "stderr_logZ": se(logZ),
             "mean_Z": float(Z.mean()), "stderr_Z": se(Z)}
    if a.samples:
        rows = [{"replica": i, "N": a.N, "t": a.t, "logZ": float(v)} for i, v in enumerate(logZ)]
        resolve_output(a.samples).write_text(rows_to_csv(rows))
    return value, value["stderr_logZ"], n


def cmd_pol_hierarchy(a, rng):
    from . import polymer as pol
    env = pol.PolymerEnvironment.sample(a.N, a.tau, a.delta, rng)
    st = pol.simulate_hierarchy(a.N, a.tau, env, a.method, a.tau0)
    return {"T": [list(map(float, r)) for r in st.T], "tau": st.tau}, None, 1


def cmd_pol_lln(a, rng):
    from . import polymer as pol
    means, ses, targets = [], [], []
    for kappa in a.kappa:
        r = pol.lln_experiment(a.N, kappa, a.replicas, a.delta, a.seed)
        means.append(r.mean)
        ses.append(r.stderr if a.replicas > 1 else None)
        targets.append(r.f_target)
        bias = r.bias_scale
    value = {"kappa": a.kappa, "mean": means, "stderr": ses, "f_target": targets,
             "bias_scale": bias, "stderr_defined": a.replicas > 1}
    if len(a.kappa) == 1:
        value = {k: (v[0] if isinstance(v, list) else v) for k, v in value.items()}
    return value, (max(s for s in ses if s is not None) if a.replicas > 1 else None), a.replicas


def cmd_validate(a, rng):
    from .validation import run_suite
    report = run_suite(a.suite, budget=a.budget, full=a.full, seed=a.seed,
                       progress=(lambda c: print(c.line(), file=sys.stderr)) if a.verbose else None)
    return report, None, None


# ---------------------------------------------------------------------------
# report
# ---------------------------------------------------------------------------

def _figures(envs: list[dict], outdir: Path) -> list[str]:
    from . import plots

    made = []
    by_cmd: dict[str, list[dict]] = {}
    for e in envs:
        by_cmd.setdefault(e["command"], []).append(e)
    if "asymptotics shape" in by_cmd:
        es = by_cmd["asymptotics shape"]
        p = outdir / "shape.png"
        plots.shape_figure([e["params"]["nu"] for e in es], [e["params"]["eta"] for e in es],
                           [e["value"]["rho"] for e in es], p, tau=es[0]["params"]["tau"])
        made.append(p.name)
    tw = [e for e in by_cmd.get("asymptotics tw", [])]
    if tw:
        r, F = [], []
        for e in tw:
            if isinstance(e["value"], dict):
                r += e["value"]["r"]
                F += e["value"]["F"]
            else:
                r += e["params"]["r"]
                F.append(e["value"])
        p = outdir / "tracy_widom.png"
        plots.cdf_figure(r, F, p)
        made.append(p.name)
    lln = by_cmd.get("polymer lln", [])
    if lln:
        k, m, s, f = [], [], [], []
        for e in lln:
            v = e["value"]
            as_list = lambda x: x if isinstance(x, list) else [x]
            k += as_list(v["kappa"])
            m += as_list(v["mean"])
            s += [x if x is not None else 0.0 for x in as_list(v["stderr"])]
            f += as_list(v["f_target"])
        p = outdir / "lln.png"
        plots.lln_figure(k, m, s, f, p)
        made.append(p.name)
    dens = by_cmd.get("observables density", [])
    if dens:
        p = outdir / "density.png"
        plots.series_figure([e["params"]["n"] for e in dens], [e["value"] for e in dens], p,
                            "n", "density")
        made.append(p.name)
    for i, e in enumerate(by_cmd.get("tilings sample", [])):
        from .tilings import Hexagon, lozenges, tiling_from_rows
        pr = e["params"]
        t = tiling_from_rows(Hexagon(pr["a"], pr["b"], pr["c"]), e["value"]["pattern"])
        p = outdir / f"tiling_{i}.png"
        plots.tiling_figure(lozenges(t), p)
        made.append(p.name)
    return made


def cmd_report(a, rng):
    envs = []
    for path in a.inputs:
        try:
            env = json.loads(Path(path).read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise UsageError(f"cannot read {path}: {exc}") from exc
        check_envelope(env)
        envs.append(env)
    rows = [envelope_row(e) for e in envs]
    text = rows_to_csv(rows)
    csv_path = resolve_output(a.csv) if a.csv else None
    if csv_path:
        csv_path.write_text(text)
    figs = []
    if a.figures:
        figdir = resolve_output(str(Path(a.figures) / "x")).parent
        figs = _figures(envs, figdir)
    return {"rows": len(rows), "csv": text if not csv_path else str(a.csv), "figures": figs}, None, None


# ---------------------------------------------------------------------------
# parser
# ---------------------------------------------------------------------------

def build_parser() -> tuple[argparse.ArgumentParser, dict]:
    common = _Parser(add_help=False)
    g = common.add_argument_group("global options")
    g.add_argument("--seed", type=int, default=0, help="master seed (64-bit unsigned)")
    g.add_argument("--out", default=None, help="output file (default: stdout)")
    g.add_argument("--format", choices=("json", "csv", "svg"), default="json")
    g.add_argument("--threads", type=int, default=None, help="numba worker threads")
    g.add_argument("--config", default=None, help="JSON file of option defaults")
    g.add_argument("--timing", action="store_true", help="record wall_time in the envelope")

    parser = _Parser(prog="intprob", description=__doc__.splitlines()[0], parents=[common])
    groups = parser.add_subparsers(dest="group", required=True, parser_class=_Parser)
    leaves: dict[str, argparse.ArgumentParser] = {}

    def leaf(grp, name, fn, help_):
        p = grp.add_parser(name, help=help_, parents=[common])
        p.set_defaults(func=fn)
        leaves[f"{grp.group_name} {name}"] = p
        return p

    def group(name, help_):
        sp = groups.add_parser(name, help=help_).add_subparsers(dest="cmd", required=True,
                                                                parser_class=_Parser)
        sp.group_name = name
        return sp

    def hexagon_args(p):
        for s in "abc":
            p.add_argument(f"--{s}", type=int, required=True)

    t = group("tilings", "lozenge tilings of a hexagon")
    p = leaf(t, "sample", cmd_tilings_sample, "exact uniform sample")
    hexagon_args(p)
    p.add_argument("--svg")
    p.add_argument("--png")
    p = leaf(t, "enumerate", cmd_tilings_enumerate, "exact count")
    hexagon_args(p)
    p = leaf(t, "render", cmd_tilings_render, "render a sampled pattern")
    hexagon_args(p)
    p.add_argument("--input", required=True)
    p.add_argument("--svg")
    p.add_argument("--png")

    d = group("dynamics", "interlacing-array dynamics")
    p = leaf(d, "run", cmd_dynamics_run, "evolve the packed array")
    p.add_argument("--N", type=int, required=True)
    p.add_argument("--t", type=float, required=True)
    p.add_argument("--regime", choices=("schur", "q"), default="schur")
    p.add_argument("--choice", choices=("independent", "push_left", "push_right"), default="independent")
    p.add_argument("--q", type=float, default=0.0)
    p.add_argument("--events", help="CSV event log path")
    p = leaf(d, "marginal", cmd_dynamics_marginal, "edge-column particle systems")
    p.add_argument("--kind", choices=("tasep", "pushtasep", "qtasep", "qpushtasep"), required=True)
    p.add_argument("--N", type=int, required=True)
    p.add_argument("--t", type=float, required=True)
    p.add_argument("--q", type=float, default=0.0)
    p.add_argument("--runs", type=int, default=1000)
    p = leaf(d, "rsk", cmd_dynamics_rsk, "pattern from a random word")
    p.add_argument("--N", type=int, required=True)
    p.add_argument("--t", type=float, required=True)

    o = group("observables", "exact contour-integral formulas")
    p = leaf(o, "density", cmd_obs_density, "vertical-lozenge density")
    p.add_argument("--t", type=float, required=True)
    p.add_argument("--h", type=int, required=True)
    p.add_argument("--n", type=int, required=True)
    p = leaf(o, "qmoments", cmd_obs_qmoments, "q-TASEP moments")
    p.add_argument("--q", type=float, required=True)
    p.add_argument("--t", type=float, required=True)
    p.add_argument("--levels", type=_int_list, required=True)
    p.add_argument("--mode", choices=("nested", "unnested"), default="unnested")
    p = leaf(o, "pmoments", cmd_obs_pmoments, "polymer moments")
    p.add_argument("--tau", type=float, required=True)
    p.add_argument("--levels", type=_int_list, required=True)
    p.add_argument("--oracle", action="store_true", help="also evaluate the ODE oracle")
    p = leaf(o, "qlaplace", cmd_obs_qlaplace, "q-Laplace transform series")
    p.add_argument("--q", type=float, required=True)
    p.add_argument("--t", type=float, required=True)
    p.add_argument("--N", type=int, required=True)
    p.add_argument("--zeta", type=_complex, required=True)
    p.add_argument("--ell-max", type=int, default=None)
    p.add_argument("--n-max", type=int, default=60)
    p = leaf(o, "mellin", cmd_obs_mellin, "Mellin-Barnes integral (single level)")
    p.add_argument("--q", type=float, required=True)
    p.add_argument("--t", type=float, required=True)
    p.add_argument("--zeta", type=_complex, required=True)
    p.add_argument("--delta", type=float, default=0.5)

    s = group("asymptotics", "limit shapes and asymptotic constants")
    p = leaf(s, "shape", cmd_asy_shape, "limit-shape region and density")
    p.add_argument("--tau", type=float, required=True)
    p.add_argument("--nu", type=float, required=True)
    p.add_argument("--eta", type=float, required=True)
    p.add_argument("--simulate", action="store_true")
    p.add_argument("--L", type=int, default=100)
    p.add_argument("--replicas", type=int, default=50)
    p = leaf(s, "lyapunov", cmd_asy_lyapunov, "Lyapunov exponents up to p")
    p.add_argument("--p", type=int, required=True)
    p = leaf(s, "constants", cmd_asy_constants, "f, s, g at kappa")
    p.add_argument("--kappa", type=float, required=True)
    p = leaf(s, "laplace", cmd_asy_laplace, "polymer Laplace transform series")
    p.add_argument("--u", type=float, required=True)
    p.add_argument("--t", type=float, required=True)
    p.add_argument("--N", type=int, required=True)
    p.add_argument("--ell-max", type=int, default=3)
    p = leaf(s, "tw", cmd_asy_tw, "Tracy-Widom series")
    p.add_argument("--r", type=_float_list, required=True)
    p.add_argument("--g", type=float, default=2.0)
    p.add_argument("--ell-max", type=int, default=None)

    m = group("polymer", "semi-discrete polymer experiments")
    p = leaf(m, "simulate", cmd_pol_simulate, "partition-function samples")
    p.add_argument("--N", type=int, required=True)
    p.add_argument("--t", type=float, required=True)
    p.add_argument("--delta", type=float, default=1e-2)
    p.add_argument("--replicas", type=int, default=1000)
    p.add_argument("--samples", help="CSV dump of per-replica log Z")
    p = leaf(m, "hierarchy", cmd_pol_hierarchy, "T-array at time tau")
    p.add_argument("--N", type=int, required=True)
    p.add_argument("--tau", type=float, required=True)
    p.add_argument("--delta", type=float, default=1e-3)
    p.add_argument("--method", choices=("lgv", "sde"), default="lgv")
    p.add_argument("--tau0", type=float, default=0.05)
    p = leaf(m, "lln", cmd_pol_lln, "law of large numbers for log Z")
    p.add_argument("--N", type=int, required=True)
    p.add_argument("--kappa", type=_float_list, default=[1.0])
    p.add_argument("--replicas", type=int, default=200)
    p.add_argument("--delta", type=float, default=0.02)

    p = groups.add_parser("validate", help="cross-validation suites", parents=[common])
    p.set_defaults(func=cmd_validate)
    p.add_argument("--suite", required=True,
                   choices=("algebra", "tilings", "dynamics", "observables", "asymptotics", "polymer", "all"))
    p.add_argument("--budget", type=_seconds, default=None, help="time budget, e.g. 600s")
    p.add_argument("--full", action="store_true", help="run at acceptance scale")
    p.add_argument("--verbose", action="store_true")
    leaves["validate"] = p

    p = groups.add_parser("report", help="merge result envelopes", parents=[common])
    p.set_defaults(func=cmd_report)
    p.add_argument("inputs", nargs="+")
    p.add_argument("--csv", help="merged CSV path")
    p.add_argument("--figures", help="directory for rendered figures")
    leaves["report"] = p
    return parser, leaves


def _apply_config(argv, parser, leaves):
    pre = _Parser(add_help=False)
    pre.add_argument("--config")
    known, _ = pre.parse_known_args(argv)
    if not known.config:
        return
    try:
        cfg = json.loads(Path(known.config).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise UsageError(f"cannot read config {known.config}: {exc}") from exc
    if not isinstance(cfg, dict):
        raise UsageError("config must be a JSON object")
    cfg = {k.replace("-", "_"): v for k, v in cfg.items()}
    for p in leaves.values():
        p.set_defaults(**cfg)
        for action in p._actions:
            if action.dest in cfg:
                action.required = False
    parser.set_defaults(**cfg)


def _command_name(args) -> str:
    return args.group if getattr(args, "cmd", None) is None else f"{args.group} {args.cmd}"


def _emit(text: str, out: str | None):
    path = resolve_output(out)
    if path is None:
        sys.stdout.write(text)
    else:
        path.write_text(text)


def run(argv: list[str] | None = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    try:
        parser, leaves = build_parser()
        _apply_config(argv, parser, leaves)
        args = parser.parse_args(argv)
        if args.seed < 0 or args.seed >= 1 << 64:
            raise UsageError("seed must be a 64-bit unsigned integer")
        if args.threads:
            import numba
            numba.set_num_threads(min(args.threads, numba.config.NUMBA_NUM_THREADS))
        from .rng import make_rng
        rng = make_rng(args.seed)
        params = {k: v for k, v in vars(args).items()
                  if k not in ("func", "group", "cmd", "seed", "out", "format", "threads", "config",
                               "timing", "verbose")}
        t0 = time.perf_counter()
        try:
            value, err, n = args.func(args, rng)
        except UsageError:
            raise
        except (ValueError, TypeError, KeyError) as exc:
            raise UsageError(str(exc)) from exc
        wall = time.perf_counter() - t0
    except UsageError as exc:
        sys.stderr.write(json.dumps({"error": "usage", "message": str(exc), "exit_code": 2}) + "\n")
        return 2
    except Exception as exc:  # runtime failure of the numerical layer
        sys.stderr.write(json.dumps({"error": type(exc).__name__, "message": str(exc), "exit_code": 1}) + "\n")
        return 1

    name = _command_name(args)
    if name == "validate":
        report = value
        env = {"command": name, "params": _jsonable(params), "seed": args.seed,
               "value": _jsonable(report.to_dict()), "error_estimate": None, "n_samples": None,
               "wall_time": wall if args.timing else None}
        status = 0 if report.passed else 1
    else:
        env = {"command": name, "params": _jsonable(params), "seed": args.seed,
               "value": _jsonable(value), "error_estimate": _jsonable(err), "n_samples": n,
               "wall_time": wall if args.timing else None}
        status = 0

    if args.format == "csv":
        if name == "validate":
            text = rows_to_csv([{"suite": args.suite, **{k: v for k, v in c.items()}}
                                for c in env["value"]["checks"]])
        else:
            text = rows_to_csv([envelope_row(env)])
    elif args.format == "svg":
        if name not in ("tilings sample", "tilings render"):
            sys.stderr.write(json.dumps({"error": "usage", "message": "svg output only for tilings",
                                         "exit_code": 2}) + "\n")
            return 2
        from . import tilings as til
        rows = env["value"].get("pattern") if name == "tilings sample" else None
        if rows is None:
            data = json.loads(Path(args.input).read_text())
            v = data.get("value", data)
            rows = v["pattern"] if isinstance(v, dict) else v
        text = til.render_svg(til.tiling_from_rows(_hexagon(args), rows))
    else:
        text = json.dumps(env, indent=2, sort_keys=True) + "\n"
    _emit(text, args.out)
    return status


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
