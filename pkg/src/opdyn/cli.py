"""Command-line interface: run trajectories, sweeps, presets, and validation,
emitting deterministic CSV files.

Exit codes: 0 success, 1 validation or runtime failure, 2 usage error.
"""

import argparse
import os
import sys
import tempfile

from . import config as cfg
from . import fock, gksl, heisenberg, hrho
from .errors import OpdynError, ParameterError

CSV_FORMAT = ".12e"  # at least 12 significant digits everywhere


def _atomic_write(path: str, text: str):
    """Write via a temp file in the same directory, then rename."""
    directory = os.path.dirname(os.path.abspath(path))
    os.makedirs(directory, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".opdyn-", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", newline="\n") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def trajectory_csv(traj: heisenberg.Trajectory) -> str:
    n = traj.n_agents
    header = ("t," + ",".join(f"F_{a}" for a in range(1, n + 1)) + ","
              + ",".join(f"G_{a}" for a in range(1, n + 1)) + ",F_mean,G_mean")
    lines = [header]
    for i, t in enumerate(traj.times):
        row = [format(t, CSV_FORMAT)]
        row += [format(v, CSV_FORMAT) for v in traj.F[i]]
        row += [format(v, CSV_FORMAT) for v in traj.G[i]]
        row.append(format(traj.f_mean[i], CSV_FORMAT))
        row.append(format(traj.g_mean[i], CSV_FORMAT))
        lines.append(",".join(row))
    return "\n".join(lines) + "\n"


def sweep_csv(points, observable: str) -> str:
    lines = [f"p,{observable}_asymptotic"]
    for pt in points:
        lines.append(f"{format(pt.value, CSV_FORMAT)},{format(pt.asymptote, CSV_FORMAT)}")
    return "\n".join(lines) + "\n"


def emit_trajectory_csv(traj, path: str):
    _atomic_write(path, trajectory_csv(traj))


def emit_sweep_csv(points, observable: str, path: str):
    _atomic_write(path, sweep_csv(points, observable))


def parse_values(spec: str):
    """Inclusive START:STOP:STEP grid."""
    parts = spec.split(":")
    if len(parts) != 3:
        raise ParameterError(f"--values must be START:STOP:STEP, got {spec!r}")
    try:
        start, stop, step = (float(p) for p in parts)
    except ValueError as err:
        raise ParameterError(f"--values must be numeric, got {spec!r}") from err
    if step <= 0 or stop < start:
        raise ParameterError("--values needs step > 0 and stop >= start")
    values = []
    i = 0
    while True:
        v = start + i * step
        if v > stop + 1e-9 * max(1.0, step):
            break
        values.append(v)
        i += 1
    return values


def _load_config(path: str) -> cfg.ConfigDocument:
    with open(path) as fh:
        return cfg.parse_config(fh.read())


def _run_heisenberg(doc, t_max, dt_out, out):
    t_max = t_max if t_max is not None else (
        doc.data["hrho"]["t_max"] if doc.has_hrho() else 100.0)
    traj = heisenberg.run_heisenberg(doc.network_spec(), doc.init_means(),
                                     t_max, dt_out if dt_out is not None else doc.dt_out())
    emit_trajectory_csv(traj, out)


def _run_hrho(doc, t_max, dt_out, out):
    if not doc.has_hrho():
        raise ParameterError("config has no hrho section")
    sched = hrho.HrhoSchedule(
        t_max=t_max if t_max is not None else doc.data["hrho"]["t_max"],
        dt_out=dt_out if dt_out is not None else doc.dt_out())
    traj = hrho.run_hrho(doc.network_spec(), doc.rule_spec(), sched, doc.init_means())
    emit_trajectory_csv(traj, out)


def _run_gksl(doc, t_max, dt, dt_out, out):
    if not doc.has_gksl():
        raise ParameterError("config has no gksl section")
    traj = gksl.integrate(
        doc.initial_density(), doc.network_spec(), doc.lindblads(),
        t_max=t_max if t_max is not None else doc.gksl_t_max(),
        dt=dt if dt is not None else doc.gksl_dt(),
        dt_out=dt_out if dt_out is not None else doc.dt_out())
    emit_trajectory_csv(traj, out)


def _run_sweep(doc, param, values_spec, observable, jobs, out):
    if not doc.has_gksl():
        raise ParameterError("config has no gksl section")
    values = parse_values(values_spec)

    def factory(value):
        varied = cfg.set_param(doc, param, value)
        return varied.initial_density(), varied.network_spec(), varied.lindblads()

    points = gksl.sweep(factory, values, observable=observable, jobs=jobs)
    emit_sweep_csv(points, observable, out)


def _run_preset(name, out_dir):
    doc = cfg.load_preset(name)
    mode, sweep_args = cfg.PRESET_RUNS[name]
    os.makedirs(out_dir, exist_ok=True)
    _atomic_write(os.path.join(out_dir, f"{name}.json"), cfg.serialize_config(doc))
    out_csv = os.path.join(out_dir, f"{name}.csv")
    if mode == "hrho":
        _run_hrho(doc, None, None, out_csv)
    elif mode == "gksl":
        _run_gksl(doc, None, None, None, out_csv)
    else:
        _run_sweep(doc, sweep_args["param"], sweep_args["values"],
                   sweep_args["observable"], 1, out_csv)
    return out_csv


def _run_validate(config_path, modes):
    report = fock.check_car(modes)
    print(f"CAR check ({modes} modes): max |{{a_j,a_k^dag}} - delta I| = "
          f"{report.dagger_deviation:.3e}, max |{{a_j,a_k}}| = {report.pair_deviation:.3e}")
    if report.max_deviation != 0.0:
        raise ParameterError("anticommutation relations violated")
    if config_path is not None:
        doc = _load_config(config_path)
        print(f"config OK: {config_path} "
              f"(N={doc.data['network']['n']}, sections: {', '.join(doc.data)})")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="opdyn",
        description="Simulate information spreading on a multi-layer agent network.")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, out_required=True):
        p.add_argument("--config", required=True, help="path to a JSON config document")
        p.add_argument("--out", required=out_required, help="output CSV path")
        p.add_argument("--t-max", type=float, default=None, dest="t_max")
        p.add_argument("--dt-out", type=float, default=None, dest="dt_out")

    common(sub.add_parser("heisenberg", help="closed-form trajectory"))
    common(sub.add_parser("hrho", help="rule-updated windowed trajectory"))
    p_gksl = sub.add_parser("gksl", help="master-equation trajectory")
    common(p_gksl)
    p_gksl.add_argument("--dt", type=float, default=None, help="integration step override")

    p_sweep = sub.add_parser("sweep", help="asymptotic observable vs a parameter")
    common(p_sweep)
    p_sweep.add_argument("--param", required=True, help="dotted path, e.g. gksl.channels.16.strength")
    p_sweep.add_argument("--values", required=True, help="START:STOP:STEP (inclusive)")
    p_sweep.add_argument("--observable", default="G6")
    p_sweep.add_argument("--jobs", type=int, default=1)

    p_preset = sub.add_parser("preset", help="materialize and run a named preset")
    p_preset.add_argument("--name", required=True, choices=cfg.PRESET_NAMES)
    p_preset.add_argument("--out-dir", default=".", dest="out_dir")

    p_val = sub.add_parser("validate", help="check operator algebra and optionally a config")
    p_val.add_argument("--config", default=None)
    p_val.add_argument("--modes", type=int, default=4)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.command == "heisenberg":
            _run_heisenberg(_load_config(args.config), args.t_max, args.dt_out, args.out)
        elif args.command == "hrho":
            _run_hrho(_load_config(args.config), args.t_max, args.dt_out, args.out)
        elif args.command == "gksl":
            _run_gksl(_load_config(args.config), args.t_max, args.dt, args.dt_out, args.out)
        elif args.command == "sweep":
            _run_sweep(_load_config(args.config), args.param, args.values,
                       args.observable, args.jobs, args.out)
        elif args.command == "preset":
            path = _run_preset(args.name, args.out_dir)
            print(path)
        elif args.command == "validate":
            _run_validate(args.config, args.modes)
    except (OpdynError, OSError) as err:
        print(f"error: {err}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
