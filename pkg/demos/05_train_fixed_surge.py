"""Train the setpoint agent on the fixed 20% surge and beat the PID baseline.

A shortened budget (150 updates, a few minutes of CPU) is enough to see
the policy park the setpoint where the closed loop holds 0.784 MPa; pass
a different update count as the first argument for longer runs.

    python demos/05_train_fixed_surge.py [updates] [out_dir]
"""

import sys

from procrl.experiments import run_fixed_experiment

updates = int(sys.argv[1]) if len(sys.argv) > 1 else 150
out_dir = sys.argv[2] if len(sys.argv) > 2 else "runs/demo-fixed"

print(f"training for {updates} updates x 8 episodes ...")
report = run_fixed_experiment(master_seed=0, updates=updates, out_dir=out_dir)

print("\nlearning curve (mean cumulative reward per update):")
per_update = {}
for update, _, reward, *_ in report.log_rows:
    per_update.setdefault(update, []).append(reward)
for u in sorted(per_update)[:: max(1, updates // 10)]:
    rewards = per_update[u]
    bar = "#" * int(sum(rewards) / len(rewards))
    print(f"  update {u:>4}: {sum(rewards)/len(rewards):6.2f} {bar}")

def fmt_recovery(value):
    return "never (within 30 min)" if value is None else f"{value:.0f} s"

print(f"\nbaseline (constant setpoint): reward {report.baseline.cumulative_reward:.3f}, "
      f"recovery {fmt_recovery(report.baseline.recovery_time)}")
print(f"trained greedy policy       : reward {report.trained.cumulative_reward:.3f}, "
      f"recovery {fmt_recovery(report.trained.recovery_time)}")
print(f"improvement                 : {report.improvement:.3f} reward units")
print(f"first trained setpoints     : {[round(a, 4) for a in report.trained.actions[:5]]}")
print(f"artifacts written to {out_dir}/ (checkpoint.json, training_log.csv, traces)")
