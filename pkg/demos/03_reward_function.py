"""Shape of the per-minute reward max(0, 1 - a|s - sigma|).

With a = 50 the reward hits zero once the vaporizer pressure deviates by
0.02 MPa; an episode that holds the normal value for all 30 minutes
accumulates exactly 30.
"""

from procrl.env import RewardConfig, reward

cfg = RewardConfig()
print(f"scale a = {cfg.a}, sigma = {cfg.sigma} MPa\n")
print("pressure   deviation   reward")
for s in (0.784, 0.786, 0.790, 0.794, 0.800, 0.804, 0.810, 0.764):
    print(f"{s:.3f}      {abs(s - cfg.sigma):.3f}       {reward(s, cfg):.3f}")

print("\nsteady episode: 30 rewards of 1.0 ->", sum(reward(cfg.sigma, cfg) for _ in range(30)))
