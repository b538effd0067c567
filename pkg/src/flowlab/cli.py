"""Command line entry point: ``flowlab run|verify|list-scenarios|report``.

Exit codes: 0 success, 1 check failure, 2 config error, 3 numerical abort.
"""

from __future__ import annotations

import argparse
import copy
import logging
import os
import sys

import numpy as np
import yaml

from . import flows as fl
from . import functionals as fn
from . import hypersurface as hs
from . import scenarios as sc
from . import verify as vf
from .scenarios import ConfigError
from .tensor import FD, DegenerateMetricError

log = logging.getLogger("flowlab")

EXIT_OK, EXIT_FAIL, EXIT_CONFIG, EXIT_NUMERICAL = 0, 1, 2, 3

_RUN_FD = FD(order=6, h_outer=3e-2)


# --------------------------------------------------------------------------
# config loading
# --------------------------------------------------------------------------


def load_spec(source: str, overrides=()) -> sc.ScenarioSpec:
    """Scenario from a YAML file or a built-in id, with ``key=value`` overrides.

    Overrides accept ``time_window=a,b``, ``n=...``, ``resolution.<key>=v``
    and ``<section>.<key>=v`` for the ambient/potential/dilaton/surface
    sections; values are parsed as YAML scalars.
    """
    if os.path.exists(source):
        try:
            with open(source) as fh:
                text = fh.read()
        except OSError as exc:
            raise ConfigError(f"cannot read config: {exc}") from None
        try:
            data = yaml.safe_load(text)
        except yaml.YAMLError as exc:
            raise ConfigError(f"malformed config: {exc}") from None
    elif source in sc.BUILTIN:
        data = sc.builtin_spec(source).to_dict()
    else:
        raise ConfigError(f"no config file or built-in scenario named '{source}'")
    if not isinstance(data, dict):
        raise ConfigError("scenario config must be a mapping")
    data = copy.deepcopy(data)
    for item in overrides or ():
        if "=" not in item:
            raise ConfigError(f"override '{item}' is not of the form key=value")
        key, raw = (s.strip() for s in item.split("=", 1))
        if key == "time_window":
            try:
                data["time_window"] = [float(v) for v in raw.split(",")]
            except ValueError:
                raise ConfigError("time_window override needs 'a,b'") from None
            if len(data["time_window"]) != 2:
                raise ConfigError("time_window override needs 'a,b'")
            continue
        try:
            val = yaml.safe_load(raw)
        except yaml.YAMLError:
            val = raw
        parts = key.split(".")
        if len(parts) == 1 and key in ("n", "huisken_exponent"):
            data[key] = val
        elif len(parts) == 2 and parts[0] in ("resolution", "ambient", "potential", "dilaton",
                                              "surface"):
            data.setdefault(parts[0], {})[parts[1]] = val
        else:
            raise ConfigError(f"unknown override key '{key}'")
    return sc.ScenarioSpec.from_dict(data)


# --------------------------------------------------------------------------
# run
# --------------------------------------------------------------------------


def _snapshot_every(t_a, t_b, dt, count=50):
    return max(1, int(round((t_b - t_a) / dt / count)))


def _run_revolution(scn, out, files):
    spec = scn.spec
    n, res = spec.n, spec.res()
    N, dt = int(res["grid"]), float(res["dt"])
    t_a, t_b = spec.time_window
    th = fl.revolution_grid(N)
    surf = spec.section("surface")
    closed = scn.immersion.meta.get("closed_form", False)
    if closed:
        R = np.full(N, float(scn.extra["radius"](t_a)))
        deriv = "fd4"
    else:
        R = float(surf["r0"]) * (1 + float(surf["eps"]) * np.cos(int(surf["mode"]) * th))
        deriv = "spectral"
    traj = fl.evolve_revolution(R * np.sin(th), R * np.cos(th), n, t_a, t_b, dt, deriv=deriv,
                                snapshot_every=_snapshot_every(t_a, t_b, dt))
    if traj.truncated:
        raise fl.NumericalAbort(f"revolution flow blew up at t={traj.diagnostics['blowup_time']}")
    ts = np.array(traj.times)
    geos = [fl.revolution_geometry(y[:N], y[N:], n, deriv) for y in traj.states]
    radii = [np.hypot(y[:N], y[N:]) for y in traj.states]
    cols = {"t": ts}
    if closed:
        r_num = np.array([np.max(r) for r in radii])
        r_exact = np.array([float(scn.extra["radius"](t)) for t in ts])
        cols.update(r_num=r_num, r_exact=r_exact, rel_err=np.abs(r_num / r_exact - 1))
    else:
        cols.update(r_min=[np.min(r) for r in radii], r_max=[np.max(r) for r in radii])
    cols.update(H_min=[np.min(g["H"]) for g in geos], H_max=[np.max(g["H"]) for g in geos])
    if spec.potential.get("kind") == "gaussian-shrinker":
        QD = [fn.gaussian_huisken_revolution(y[:N], y[N:], n, -t, deriv)
              for t, y in zip(ts, traj.states)]
        cols.update(huisken_Q=[q for q, _ in QD], huisken_dissipation=[d for _, d in QD])
    path = os.path.join(out, "trajectory.csv")
    fl.write_csv(path, cols)
    files.append(path)
    y = traj.states[-1]
    snap = os.path.join(out, "final.snap")
    fl.write_snapshot(snap, ts[-1], {"rho": y[:N], "z": y[N:], "theta": th})
    files.append(snap)


def _run_bowl(scn, out, files):
    t_a, t_b = scn.spec.time_window
    ts = np.linspace(t_a, t_b, 6)
    nodes = (np.array([0.3, 0.2]), np.array([-0.5, 0.6]), np.array([0.0, 0.0]))
    sup = [max(abs(fn.harnack_Z(scn.immersion, scn.state(t), p, fd=_RUN_FD)) for p in nodes)
           for t in ts]
    path = os.path.join(out, "harnack.csv")
    fl.write_csv(path, {"t": ts, "sup|Z_ext|": sup})
    files.append(path)


def _run_closed_form_surface(scn, out, files):
    t_a, t_b = scn.spec.time_window
    ts = np.linspace(t_a, t_b, 6)
    p = np.array([0.7, 0.4])
    H = [hs.induced_package(scn.immersion, scn.g, p, t, _RUN_FD).H for t in ts]
    path = os.path.join(out, "surface.csv")
    fl.write_csv(path, {"t": ts, "H": H})
    files.append(path)


def _run_warped_closed(scn, out, files):
    W = scn.warped
    spec = scn.spec
    t_a, t_b = spec.time_window
    dt = float(spec.res()["dt"])
    r_slice = scn.extra.get("r_slice") if scn.immersion is not None else None
    traj, unpack = fl.evolve_warped(W, t_a, t_b, dt, kind="extended", r_slice=r_slice,
                                    snapshot_every=_snapshot_every(t_a, t_b, dt))
    if traj.truncated:
        raise fl.NumericalAbort(f"warped flow blew up at t={traj.diagnostics['blowup_time']}")
    states = [unpack(y) for y in traj.states]
    r = W.a.grid
    cols = {"t": traj.times,
            "action_I": [fn.action_I(s).value for s, _ in states],
            "a_min": [np.min(s.a(r)) for s, _ in states],
            "b_min": [np.min(s.b(r)) for s, _ in states]}
    if r_slice is not None:
        sigma = float(scn.immersion.meta["sigma"])
        cols["r_slice"] = [rs for _, rs in states]
        cols["H_slice"] = [float(s.slice_geometry(rs, sigma)["H"]) for s, rs in states]
    path = os.path.join(out, "trajectory.csv")
    fl.write_csv(path, cols)
    files.append(path)
    s_end, _ = states[-1]
    snap = os.path.join(out, "final.snap")
    fl.write_snapshot(snap, traj.times[-1], {"r": r, "a": s_end.a(r), "b": s_end.b(r),
                                             "w": s_end.w(r), "f": s_end.f(r)})
    files.append(snap)


def _run_warped_boundary(scn, out, files):
    W = scn.warped
    act = fn.action_I(W)
    A = fn.dI_dt_integrands(W, "A")
    dh = [fn.warped_slice_dHdt(W, r, s) for r, s in W.boundary_sides()]
    B = fn.dI_dt_integrands(W, "B", dHdt=dh)
    path = os.path.join(out, "functionals.csv")
    fl.write_csv(path, {"t": [scn.spec.time_window[0]], "action_I": [act.value],
                        "dIdt_form_A": [A.value], "dIdt_form_B": [B.value],
                        "dIdt_interior": [A.interior_total],
                        "interior_integrand_min": [float(np.min(A.interior_integrand))]})
    files.append(path)
    path = os.path.join(out, "dIdt_integrands.csv")
    A.to_csv(path)
    files.append(path)


def _run_static_graph(scn, out, files):
    t = scn.spec.time_window[0]
    nodes, _ = scn.immersion.quad(4)
    H = [hs.induced_package(scn.immersion, scn.g, p, t, _RUN_FD).H for p in nodes]
    path = os.path.join(out, "surface.csv")
    fl.write_csv(path, {"t": [t], "H_min": [min(H)], "H_max": [max(H)]})
    files.append(path)


def cmd_run(source: str, out_dir: str | None = None, overrides=()) -> list:
    """Run a scenario and write its artifacts; returns the written paths."""
    spec = load_spec(source, overrides)
    scn = sc.build_scenario(spec)
    out = out_dir or os.path.join("flowlab-out", spec.name)
    os.makedirs(out, exist_ok=True)
    files: list = []
    kind = spec.surface.get("kind", "none")
    if kind in ("round-sphere", "perturbed-sphere"):
        _run_revolution(scn, out, files)
    elif kind == "bowl-translator":
        _run_bowl(scn, out, files)
    elif kind == "latitude-sphere":
        _run_closed_form_surface(scn, out, files)
    elif scn.warped is not None and scn.warped.periodic:
        _run_warped_closed(scn, out, files)
    elif scn.warped is not None:
        _run_warped_boundary(scn, out, files)
    elif kind == "torus-graph":
        _run_static_graph(scn, out, files)
    else:
        raise ConfigError(f"scenario '{spec.name}' has nothing to run")
    with open(os.path.join(out, "scenario.yaml"), "w") as fh:
        fh.write(spec.to_yaml())
    return files


# --------------------------------------------------------------------------
# verify / report
# --------------------------------------------------------------------------


def cmd_verify(only=None, overrides=(), out_dir: str = "flowlab-out") -> int:
    ov = vf.parse_overrides(overrides)
    checks = vf.select_checks(only)
    settings = vf.Settings(ov)
    os.makedirs(out_dir, exist_ok=True)
    reports = []
    for c in checks:
        rep = vf.run_check(c, settings)
        name, sup, tol = vf._worst(rep.to_record())
        print(f"{rep.verdict.upper():4s}  {rep.check_id}  {name}={vf._num(sup)} "
              f"(tol {vf._num(tol)})", flush=True)
        reports.append(rep)
    vf.write_results(os.path.join(out_dir, "results.json"), reports, ov)
    with open(os.path.join(out_dir, "report.md"), "w") as fh:
        fh.write(vf.markdown_report([r.to_record() for r in reports]))
    failed = [r.check_id for r in reports if not r.passed]
    print(f"{len(reports) - len(failed)} of {len(reports)} checks pass; "
          f"results in {os.path.join(out_dir, 'results.json')}")
    if failed:
        print("failed: " + ", ".join(failed))
        return EXIT_FAIL
    return EXIT_OK


def cmd_report(path: str, as_csv: bool = False) -> str:
    records = vf.read_results(path)
    return vf.csv_report(records) if as_csv else vf.markdown_report(records)


# --------------------------------------------------------------------------
# entry point
# --------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="flowlab",
                                 description="Extended Ricci flow / MCF verification lab")
    ap.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("run", help="run a scenario and write CSV/snapshot artifacts")
    p.add_argument("config", help="YAML scenario file or built-in scenario id")
    p.add_argument("--out", default=None, help="output directory")
    p.add_argument("--override", action="append", default=[], metavar="KEY=VALUE")

    p = sub.add_parser("verify", help="run the verification suite")
    g = p.add_mutually_exclusive_group()
    g.add_argument("--all", action="store_true", help="run every check (default)")
    g.add_argument("--only", default=None,
                   help="comma-separated check ids, id prefixes or criterion numbers")
    p.add_argument("--override", action="append", default=[], metavar="KEY=VALUE",
                   help="tolerance or resolution override, e.g. evolution.rel_residual=1e-4")
    p.add_argument("--out", default="flowlab-out", help="directory for results and report")

    sub.add_parser("list-scenarios", help="list built-in scenarios")

    p = sub.add_parser("report", help="summarize a results file")
    p.add_argument("results")
    p.add_argument("--csv", action="store_true", help="emit CSV instead of markdown")
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        if args.command == "run":
            for path in cmd_run(args.config, args.out, args.override):
                print(path)
            return EXIT_OK
        if args.command == "verify":
            only = args.only.split(",") if args.only else None
            return cmd_verify(only, args.override, args.out)
        if args.command == "list-scenarios":
            for name, desc in sc.list_scenarios():
                print(f"{name:22s} {desc}")
            return EXIT_OK
        if args.command == "report":
            sys.stdout.write(cmd_report(args.results, args.csv))
            return EXIT_OK
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (fl.NumericalAbort, DegenerateMetricError, hs.ImmersionError,
            FloatingPointError) as exc:
        print(f"numerical abort: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
