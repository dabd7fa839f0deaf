"""Greedy evaluation of a trained checkpoint against chosen scenarios.

Loads the checkpoint produced by demo 05 (or any other) and replays the
mean action, no exploration, against a step surge and a slow ramp.

    python demos/07_evaluate_checkpoint.py [checkpoint]
"""

import sys
from pathlib import Path

from procrl.experiments import evaluate_policy, run_baseline
from procrl.malfunction import MalfunctionScenario, step_surge

checkpoint = sys.argv[1] if len(sys.argv) > 1 else "runs/demo-fixed/checkpoint.json"
if not Path(checkpoint).exists():
    sys.exit(f"no checkpoint at {checkpoint}; run demos/05_train_fixed_surge.py first")

scenarios = {
    "step surge to 120%": step_surge(1.20),
    "12-minute ramp to 115%": MalfunctionScenario(kind="ramp", magnitude=1.15,
                                                  t_complete=720.0),
}
for name, scenario in scenarios.items():
    trained = evaluate_policy(checkpoint, scenario)
    baseline = run_baseline(scenario)
    print(f"{name}")
    print(f"  trained : reward {trained.cumulative_reward:6.3f}, "
          f"recovery {trained.recovery_time}")
    print(f"  baseline: reward {baseline.cumulative_reward:6.3f}, "
          f"recovery {baseline.recovery_time}")
