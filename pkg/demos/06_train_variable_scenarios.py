"""Learning across randomized malfunctions: ramp rate, size and delay vary.

Every episode draws a fresh scenario (magnitude 90-120%, ramp up to 30
minutes, procedure delay up to 60 minutes), so the agent has to read the
sensors instead of memorizing one disturbance.  The 20-episode moving
average of cumulative reward is the learning signal to watch.

    python demos/06_train_variable_scenarios.py [episodes] [out_dir]
"""

import sys

from procrl.experiments import MOVING_AVERAGE_WINDOW, run_variable_experiment

episodes = int(sys.argv[1]) if len(sys.argv) > 1 else 300
out_dir = sys.argv[2] if len(sys.argv) > 2 else "runs/demo-variable"

print(f"training over {episodes} randomized episodes ...")
report = run_variable_experiment(master_seed=0, episodes=episodes, out_dir=out_dir)

print(f"\n20-episode moving average (window = {MOVING_AVERAGE_WINDOW}):")
stride = max(1, len(report.moving_avg) // 12)
for i in range(0, len(report.moving_avg), stride):
    avg = report.moving_avg[i]
    print(f"  episodes {i + 1:>4}-{i + MOVING_AVERAGE_WINDOW:<4}: "
          f"{avg:6.2f} {'#' * int(avg)}")

print(f"\nfirst window average: {report.first_window_avg:.3f}")
print(f"final window average: {report.final_window_avg:.3f}")
print(f"artifacts written to {out_dir}/ (reward_curve.csv, checkpoint.json)")
