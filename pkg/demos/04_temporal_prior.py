"""Velocity-conditioned plausibility with a temporal mixture.
=============================================================

Fit a mixture over (dt, dtheta) motion deltas from a sequence. Given the
current joint angles and elapsed time, the prior sharply limits which next
poses are plausible: a consistent step scores far above a 10x-velocity jump.
"""

import numpy as np

from posepriors import MotionSequence, compute_deltas, fit_temporal_gmm

rng = np.random.default_rng(12)
frames = 150
timestamps = np.arange(frames) / 30.0  # 30 Hz capture
velocity = np.array([0.3, -0.2, 0.1, 0.05, -0.4, 0.2])  # rad/s per axis
poses = 0.1 + timestamps[:, None] * velocity + rng.normal(0.0, 2e-3, (frames, 6))
seq = MotionSequence(timestamps=timestamps, poses=poses)

deltas = compute_deltas(seq)
print(f"{len(deltas)} motion deltas from {frames} frames")
print("mean dtheta per frame:", np.mean([d.dtheta for d in deltas], axis=0).round(4))

model = fit_temporal_gmm(deltas, k=1, seed=0)

dt = 1.0 / 30.0
candidates = {
    "consistent step": np.concatenate([[dt], velocity * dt]),
    "frozen joints": np.concatenate([[dt], np.zeros(6)]),
    "3x velocity": np.concatenate([[dt], 3.0 * velocity * dt]),
    "10x velocity": np.concatenate([[dt], 10.0 * velocity * dt]),
    "reversed motion": np.concatenate([[dt], -velocity * dt]),
}
print("\nlog-probability of candidate next steps:")
for name, vec in candidates.items():
    print(f"  {name:16s} {model.log_prob(vec):12.1f}")
print("\nknowing the angular velocity collapses the candidate set")
