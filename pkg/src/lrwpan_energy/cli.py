"""Command-line front end.

Subcommands map onto the library pipeline: ``contention`` runs one
Monte Carlo cell, ``table`` builds and caches a statistics grid,
``pathloss-sweep`` / ``packet-sweep`` emit the adaptation curves,
``case-study`` runs the reference deployment end to end, ``breakdown``
prints where the energy goes, and ``what-if`` compares hardware
variants. Every command accepts a config file plus ``--set key=value``
overrides, writes CSV artifacts at full float precision into ``--out``,
and prints a short summary. Reruns with identical flags and seed produce
byte-identical files.

Exit status: 0 on success, 1 on a diagnosed failure (the message names
the failing stage: config, simulation, model or optimizer), 2 on usage
errors.
"""

from __future__ import annotations

import argparse
import os
import sys

from .csma import SimConfig, build_contention_table, load_table, save_table
from .link_adapt import (derived_load, energy_curve, evaluate_case_study,
                         packet_size_sweep, write_case_study, write_fig7,
                         write_fig8, write_fig9)
from .params import ConfigError, load_config
from .phy import packet_airtime


class _StageError(Exception):
    """Failure attributed to one pipeline stage, for diagnostics."""

    def __init__(self, stage, error):
        super().__init__(str(error))
        self.stage = stage
        self.error = error


def _fail(stage, exc):
    print(f"error: {stage}: {exc}", file=sys.stderr)
    return 1


def _load_params(args):
    return load_config(args.config, args.set)


def _out_path(args, name):
    os.makedirs(args.out, exist_ok=True)
    return os.path.join(args.out, name)


def _sim_config(params, args, load, payload, trials, nodes=None):
    return SimConfig(
        nodes=nodes if nodes is not None else params.scenario.nodes_per_channel,
        payload_bytes=payload, load=load, superframes=trials,
        seed=args.seed).validate()


def _get_table(args, params, loads, payloads, trials):
    """Cached table if ``--table`` was given, else simulate the grid now."""
    if args.table is not None:
        return load_table(args.table)
    base = _sim_config(params, args, loads[0], payloads[0], trials)
    return build_contention_table(loads, payloads, base,
                                  params.timing, params.mac)


def _float_list(text):
    try:
        values = [float(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad number list {text!r}")
    if not values:
        raise argparse.ArgumentTypeError("empty list")
    return values


def _int_list(text):
    return [int(x) for x in _float_list(text)]


def _cmd_contention(args):
    try:
        params = _load_params(args)
        cfg = _sim_config(params, args, args.load, args.payload, args.trials,
                          nodes=args.nodes)
    except ConfigError as exc:
        return _fail("config", exc)
    try:
        table = build_contention_table([args.load], [args.payload], cfg,
                                       params.timing, params.mac)
        save_table(table, _out_path(args, "contention.csv"))
    except (OSError, ValueError) as exc:
        return _fail("simulation", exc)
    st = table.cells[0][0]
    print(f"contention: {cfg.nodes} nodes, load {args.load}, "
          f"{args.payload} B payload, {args.trials} superframes")
    print(f"  t_cont  {st.t_cont_mean * 1e3:8.4f} ms  (se {st.se_t_cont * 1e3:.4f})")
    print(f"  n_cca   {st.n_cca_mean:8.4f}     (se {st.se_n_cca:.4f})")
    print(f"  pr_col  {st.pr_col:8.5f}     (se {st.se_pr_col:.5f})")
    print(f"  pr_caf  {st.pr_caf:8.5f}     (se {st.se_pr_caf:.5f})")
    return 0


def _cmd_table(args):
    try:
        params = _load_params(args)
    except ConfigError as exc:
        return _fail("config", exc)
    try:
        base = _sim_config(params, args, args.loads[0], args.payloads[0],
                           args.trials)
        table = build_contention_table(args.loads, args.payloads, base,
                                       params.timing, params.mac)
        path = _out_path(args, "contention_table.csv")
        save_table(table, path)
    except (OSError, ValueError) as exc:
        return _fail("simulation", exc)
    print(f"table: {len(args.loads)} loads x {len(args.payloads)} payloads, "
          f"{args.trials} superframes per cell -> {path}")
    return 0


def _cmd_pathloss_sweep(args):
    try:
        params = _load_params(args)
    except ConfigError as exc:
        return _fail("config", exc)
    scenario = params.scenario
    loads = args.load or [derived_load(scenario, params.timing, params.mac)]
    try:
        table = _get_table(args, params, loads, [scenario.payload_bytes],
                           args.trials)
    except (OSError, ValueError) as exc:
        return _fail("simulation", exc)
    try:
        levels = params.radio.levels_ascending()
        curve_sets = [
            [energy_curve(scenario, lvl, table, params, load=load)
             for lvl in levels]
            for load in loads
        ]
        path = _out_path(args, "fig7.csv")
        write_fig7(curve_sets, loads, path)
    except (OSError, ValueError) as exc:
        return _fail("model", exc)
    print(f"pathloss sweep: {len(levels)} levels x {len(loads)} loads -> {path}")
    return 0


def _cmd_packet_sweep(args):
    try:
        params = _load_params(args)
    except ConfigError as exc:
        return _fail("config", exc)
    scenario = params.scenario
    try:
        if args.table is not None:
            table = load_table(args.table)
        else:
            loads = sorted(set(
                min(1.0, scenario.nodes_per_channel
                    * packet_airtime(params.timing, params.mac, size)
                    * scenario.data_rate_bps / (8.0 * size))
                for size in args.sizes))
            base = _sim_config(params, args, loads[0], args.sizes[0],
                               args.trials)
            table = build_contention_table(loads, sorted(args.sizes), base,
                                           params.timing, params.mac)
    except (OSError, ValueError) as exc:
        return _fail("simulation", exc)
    try:
        points = packet_size_sweep(scenario, args.sizes, params, table)
        path = _out_path(args, "fig8.csv")
        write_fig8(points, path)
    except (OSError, ValueError) as exc:
        return _fail("optimizer", exc)
    print(f"packet sweep -> {path}")
    for p in points:
        print(f"  {p.payload_bytes:4d} B  load {p.load:.3f}  "
              f"{p.energy_per_bit * 1e9:10.1f} nJ/bit")
    return 0


def _case_pipeline(args, transition_scale=1.0, sense_power=None):
    try:
        params = _load_params(args)
    except ConfigError as exc:
        raise _StageError("config", exc)
    scenario = params.scenario
    try:
        load = derived_load(scenario, params.timing, params.mac)
        table = _get_table(args, params, [load], [scenario.payload_bytes],
                           args.trials)
    except (OSError, ValueError) as exc:
        raise _StageError("simulation", exc)
    try:
        result = evaluate_case_study(scenario, params, table,
                                     transition_scale=transition_scale,
                                     sense_power=sense_power)
    except ValueError as exc:
        raise _StageError("model", exc)
    return params, table, result


def _print_case_summary(result):
    b = result.baseline
    print(f"  derived load        {result.derived_load:.4f}")
    print(f"  average power       {b.p_avg * 1e6:.1f} uW")
    print(f"  failure probability {b.pr_fail:.3f}")
    print(f"  average delay       {b.delay:.3f} s")
    print(f"  energy per bit      {b.energy_per_bit * 1e9:.1f} nJ")
    print(f"  adapted power       {result.adapted.p_avg * 1e6:.1f} uW")
    print(f"  best-case saving    {result.savings * 100:.1f} %")
    crossings = ", ".join(f"{x:.1f}" for x in result.thresholds.crossings)
    print(f"  level thresholds    {crossings} dB")
    print(f"  feasibility limit   {result.thresholds.feasibility_limit:.1f} dB")


def _cmd_case_study(args):
    try:
        params, table, result = _case_pipeline(args)
    except _StageError as exc:
        return _fail(exc.stage, exc.error)
    try:
        path = _out_path(args, "case_study.csv")
        write_case_study(result, path)
        write_fig9(result.baseline, _out_path(args, "fig9.csv"))
    except OSError as exc:
        return _fail("model", exc)
    print(f"case study -> {path}")
    _print_case_summary(result)
    return 0


def _cmd_breakdown(args):
    try:
        params, table, result = _case_pipeline(args)
    except _StageError as exc:
        return _fail(exc.stage, exc.error)
    try:
        path = _out_path(args, "fig9.csv")
        write_fig9(result.baseline, path)
    except OSError as exc:
        return _fail("model", exc)
    print(f"energy breakdown -> {path}")
    b = result.baseline
    print(f"  {'phase':<16s} {'energy':>8s} {'time':>8s}")
    for phase in sorted(b.breakdown):
        print(f"  {phase:<16s} {b.breakdown[phase] * 100:7.1f}% "
              f"{b.time_breakdown.get(phase, 0.0) * 100:7.1f}%")
    return 0


def _cmd_what_if(args):
    if args.transition_scale == 1.0 and args.sense_power is None:
        print("error: what-if needs --transition-scale and/or --sense-power",
              file=sys.stderr)
        return 2
    try:
        params, table, ref = _case_pipeline(args)
    except _StageError as exc:
        return _fail(exc.stage, exc.error)
    try:
        mod = evaluate_case_study(params.scenario, params, table,
                                  transition_scale=args.transition_scale,
                                  sense_power=args.sense_power)
    except ValueError as exc:
        return _fail("model", exc)
    delta = (mod.baseline.p_avg - ref.baseline.p_avg) / ref.baseline.p_avg
    try:
        path = _out_path(args, "what_if.csv")
        with open(path, "w", newline="") as fh:
            fh.write("variant,p_avg,pr_fail,delay,energy_per_bit\n")
            for name, rep in (("reference", ref.baseline),
                              ("modified", mod.baseline)):
                fh.write(f"{name},{rep.p_avg!r},{rep.pr_fail!r},"
                         f"{rep.delay!r},{rep.energy_per_bit!r}\n")
    except OSError as exc:
        return _fail("model", exc)
    print(f"what-if -> {path}")
    print(f"  reference power   {ref.baseline.p_avg * 1e6:.1f} uW")
    print(f"  modified power    {mod.baseline.p_avg * 1e6:.1f} uW")
    print(f"  relative delta    {delta * 100:+.1f} %")
    return 0


def _build_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", metavar="PATH",
                        help="parameter file (defaults used when omitted)")
    common.add_argument("--set", metavar="KEY=VALUE", action="append",
                        default=[], help="override one parameter (repeatable)")
    common.add_argument("--seed", type=int, default=1,
                        help="simulation seed (default 1)")
    common.add_argument("--out", metavar="DIR", default=".",
                        help="output directory for CSV artifacts")
    common.add_argument("--table", metavar="PATH",
                        help="cached contention table; skips simulation")

    parser = argparse.ArgumentParser(
        prog="lrwpan-energy",
        description="Energy analysis of beacon-mode low-rate WPAN uplinks")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("contention", parents=[common],
                       help="simulate one contention cell")
    p.add_argument("--nodes", type=int, default=None)
    p.add_argument("--load", type=float, default=0.4)
    p.add_argument("--payload", type=int, default=120)
    p.add_argument("--trials", type=int, default=10000)
    p.set_defaults(func=_cmd_contention)

    p = sub.add_parser("table", parents=[common],
                       help="build and cache a statistics grid")
    p.add_argument("--loads", type=_float_list, default=[0.1, 0.3, 0.5, 0.7, 0.9])
    p.add_argument("--payloads", type=_int_list, default=[10, 20, 50, 100, 120])
    p.add_argument("--trials", type=int, default=2000)
    p.set_defaults(func=_cmd_table)

    p = sub.add_parser("pathloss-sweep", parents=[common],
                       help="energy vs pathloss per transmit level")
    p.add_argument("--load", type=float, action="append",
                   help="network load tag (repeatable; default derived)")
    p.add_argument("--trials", type=int, default=2000)
    p.set_defaults(func=_cmd_pathloss_sweep)

    p = sub.add_parser("packet-sweep", parents=[common],
                       help="energy vs payload size at constant data rate")
    p.add_argument("--sizes", type=_int_list, default=[10, 20, 50, 100, 123])
    p.add_argument("--trials", type=int, default=1000)
    p.set_defaults(func=_cmd_packet_sweep)

    p = sub.add_parser("case-study", parents=[common],
                       help="full deployment evaluation")
    p.add_argument("--trials", type=int, default=4000)
    p.set_defaults(func=_cmd_case_study)

    p = sub.add_parser("breakdown", parents=[common],
                       help="per-phase energy and time shares")
    p.add_argument("--trials", type=int, default=4000)
    p.set_defaults(func=_cmd_breakdown)

    p = sub.add_parser("what-if", parents=[common],
                       help="hardware variant comparison")
    p.add_argument("--transition-scale", type=float, default=1.0)
    p.add_argument("--sense-power", type=float, default=None)
    p.add_argument("--trials", type=int, default=4000)
    p.set_defaults(func=_cmd_what_if)
    return parser


def main(argv=None):
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
