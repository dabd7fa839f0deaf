"""Command-line entry points for the workbench.

Verbs: calibrate, baseline, train, evaluate, plan, serve.  The PROCRL_SEED
environment variable overrides the master seed of any verb that takes one.
"""

import argparse
import json
import os
import sys

from . import plant
from .malfunction import MalfunctionScenario
from .pid import level_controller, pressure_controller


def _master_seed(args) -> int:
    env_seed = os.environ.get("PROCRL_SEED")
    if env_seed is not None:
        return int(env_seed)
    return args.seed


def _scenario_from_args(args) -> MalfunctionScenario:
    if getattr(args, "scenario_file", None):
        return MalfunctionScenario.load(args.scenario_file)
    return MalfunctionScenario(
        kind=args.kind, magnitude=args.magnitude,
        t_complete=args.t_complete if args.kind == "ramp" else 0.0,
        t_procedure_start=args.t_proc_start)


def _add_scenario_flags(parser):
    parser.add_argument("--kind", choices=["step", "ramp"], default="step")
    parser.add_argument("--magnitude", type=float, default=1.20,
                        help="feed-pressure multiplier in [0.90, 1.20]")
    parser.add_argument("--t-complete", type=float, default=0.0, dest="t_complete",
                        help="ramp duration in seconds (ignored for step)")
    parser.add_argument("--t-proc-start", type=float, default=0.0, dest="t_proc_start",
                        help="delay before the first agent action, seconds")
    parser.add_argument("--scenario-file", help="JSON scenario file (overrides flags)")


def cmd_calibrate(args) -> int:
    cfg = (plant.PlantConfig.from_dict(json.load(open(args.config)))
           if args.config else plant.PlantConfig())
    op = plant.steady_state(cfg)
    dp, dl = plant.derivatives(op.state, cfg)

    pc = pressure_controller(bias=op.pc130_bias, sv=plant.NORMAL_PRESSURE)
    lc = level_controller(bias=op.lc130_bias, sv=op.state.level)
    state = op.state
    for _ in range(1800):
        result = plant.step(state, pc, lc, cfg.nominal_feed_pressure, cfg)
        state, pc, lc = result.state, result.pc130, result.lc130
    drift = abs(state.pressure - op.state.pressure)

    payload = {
        "pressure": op.state.pressure,
        "level": op.state.level,
        "x_pcv": op.pc130_bias,
        "x_lcv": op.lc130_bias,
        "fi101_flow": op.state.fi101_flow,
        "dP_dt": dp,
        "dL_dt": dl,
        "pressure_drift_30min": drift,
    }
    if args.json:
        print(json.dumps(payload, indent=2))
    else:
        print(f"steady vaporizer pressure : {op.state.pressure} MPa")
        print(f"steady liquid level       : {op.state.level} m")
        print(f"PCV101 / LCV130 openings  : {op.pc130_bias:.6f} / {op.lc130_bias:.6f}")
        print(f"balance residuals         : dP/dt={dp:.3e}, dL/dt={dl:.3e}")
        print(f"30-minute pressure drift  : {drift:.3e} MPa")
    ok = abs(dp) < 1e-9 and abs(dl) < 1e-9 and drift < 1e-6
    print("calibration " + ("OK" if ok else "FAILED"))
    return 0 if ok else 1


def cmd_baseline(args) -> int:
    from .experiments import run_baseline
    scenario = _scenario_from_args(args)
    report = run_baseline(scenario, out_dir=args.out)
    print(f"scenario           : {scenario.to_dict()}")
    print(f"cumulative reward  : {report.cumulative_reward:.4f} / 30")
    print(f"recovery time      : {report.recovery_time}")
    if args.out:
        print(f"traces written to  : {args.out}")
    return 0


def cmd_train(args) -> int:
    from .experiments import run_fixed_experiment, run_variable_experiment
    from .ppo import PpoConfig
    seed = _master_seed(args)
    ppo_cfg = PpoConfig()
    out = args.out or f"runs/{args.scenario}-seed{seed}"
    if args.scenario == "fixed":
        report = run_fixed_experiment(master_seed=seed, updates=args.updates,
                                      ppo_cfg=ppo_cfg, out_dir=out)
        print(f"baseline reward : {report.baseline.cumulative_reward:.4f}")
        print(f"trained reward  : {report.trained.cumulative_reward:.4f}")
        print(f"improvement     : {report.improvement:.4f}")
        print(f"recovery (s)    : trained={report.trained.recovery_time} "
              f"baseline={report.baseline.recovery_time}")
    else:
        report = run_variable_experiment(master_seed=seed,
                                         episodes=args.episodes,
                                         ppo_cfg=ppo_cfg, out_dir=out)
        print(f"episodes            : {len(report.episode_rewards)}")
        print(f"first 20-episode avg: {report.first_window_avg:.4f}")
        print(f"final 20-episode avg: {report.final_window_avg:.4f}")
    print(f"artifacts in {out}")
    return 0


def cmd_evaluate(args) -> int:
    from .experiments import evaluate_policy
    scenario = _scenario_from_args(args)
    report = evaluate_policy(args.checkpoint, scenario,
                             seed=_master_seed(args), out_dir=args.out)
    print(f"cumulative reward : {report.cumulative_reward:.4f} / 30")
    print(f"recovery time     : {report.recovery_time}")
    print(f"actions           : {[round(a, 4) for a in report.actions[:6]]} ...")
    return 0


def cmd_plan(args) -> int:
    from .influence import (diagnose, explain, load_default_rules, load_rules,
                            plan, plan_report_json)
    graph = load_rules(args.rules) if args.rules else load_default_rules()
    deviations = []
    for spec in args.deviation:
        var, _, direction = spec.rpartition(":")
        if not var or direction not in "+-":
            print(f"bad --deviation {spec!r}; expected <variable>:+ or <variable>:-",
                  file=sys.stderr)
            return 2
        deviations.append((var, direction))
    causes = diagnose(graph, deviations)

    if args.goal:
        var, _, direction = args.goal.rpartition(":")
        goal = (var, direction)
    else:
        observed = dict(deviations)
        direction = observed.get("vaporizer_pressure", "+")
        goal = ("vaporizer_pressure", "-" if direction == "+" else "+")

    p = plan(graph, goal)
    e = explain(p, graph)
    if args.json:
        payload = json.loads(plan_report_json(p, e))
        payload["diagnosis"] = [c.to_dict() for c in causes]
        print(json.dumps(payload, indent=2))
        return 0
    print("Diagnosis (ranked):")
    for c in causes:
        print(f"  {c.variable} {c.direction}  "
              f"(explains {len(c.explained)}, chain length {c.path_length})")
    if not causes:
        print("  no candidate explains the observations")
    print(f"Plan for goal {goal[0]} {goal[1]}: targets {list(p.targets)}")
    print(e.text)
    return 0


def cmd_serve(args) -> int:
    from .service import ServiceConfig, run_server
    cfg = ServiceConfig(speed=args.speed, checkpoint_path=args.checkpoint,
                        rules_path=args.rules)
    print(f"serving operator API on http://{args.host}:{args.port}")
    run_server(host=args.host, port=args.port, cfg=cfg)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="procrl",
        description="Recovery-procedure workbench for the vaporizer feed section")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("calibrate", help="solve the steady state and verify the fixpoint")
    p.add_argument("--config", help="plant config JSON file")
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_calibrate)

    p = sub.add_parser("baseline", help="run PID-only control against a scenario")
    _add_scenario_flags(p)
    p.add_argument("--out", help="directory for trace CSVs")
    p.set_defaults(func=cmd_baseline)

    p = sub.add_parser("train", help="train the setpoint agent")
    p.add_argument("--scenario", choices=["fixed", "variable"], required=True)
    p.add_argument("--updates", type=int, default=400,
                   help="policy updates for the fixed scenario")
    p.add_argument("--episodes", type=int, default=1000,
                   help="episodes for the variable scenario")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", help="output directory (default runs/<scenario>-seed<n>)")
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("evaluate", help="greedy episode from a checkpoint")
    p.add_argument("--checkpoint", required=True)
    _add_scenario_flags(p)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", help="directory for trace CSVs")
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("plan", help="diagnose deviations and plan a recovery")
    p.add_argument("--rules", help="rule file (default: packaged feed-section rules)")
    p.add_argument("--deviation", action="append", default=[],
                   metavar="VAR:+/-", help="observed deviation, repeatable")
    p.add_argument("--goal", metavar="VAR:+/-",
                   help="restore goal (default: vaporizer_pressure opposite its deviation)")
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_plan)

    p = sub.add_parser("serve", help="run the operator session service")
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=8080)
    p.add_argument("--speed", type=float, default=60.0,
                   help="simulated seconds per wall second (0 starts paused)")
    p.add_argument("--checkpoint", help="trained policy used for proposed schedules")
    p.add_argument("--rules", help="rule file for the planner")
    p.set_defaults(func=cmd_serve)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (ValueError, KeyError, RuntimeError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
