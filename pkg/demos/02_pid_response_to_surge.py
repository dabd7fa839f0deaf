"""What standard PID control does with a 20% feed-pressure surge.

PC130 is deliberately sluggish: the proportional action arrests the rise
but leaves a standing offset the weak integral cannot remove within the
30-minute window, so the pressure parks well outside the reward band.
"""

from procrl.env import FeedSectionEnv
from procrl.experiments import recovery_time
from procrl.malfunction import step_surge

env = FeedSectionEnv()
env.reset(step_surge(1.20))
sigma = env.reward_cfg.sigma

print("minute  pressure   |dev|     reward")
total = 0.0
for minute in range(1, 31):
    _, r, _, _ = env.step(sigma)  # setpoint never moves: plain PID
    total += r
    if minute <= 5 or minute % 5 == 0:
        p = env.state.pressure
        print(f"{minute:>6}  {p:.5f}   {abs(p - sigma):.5f}   {r:.3f}")

rec = recovery_time([(t, p) for t, p in env.pressure_history], sigma)
print(f"\ncumulative reward : {total:.3f} / 30")
print(f"recovery time     : {rec}  (never re-enters the +/-0.002 MPa band)")
