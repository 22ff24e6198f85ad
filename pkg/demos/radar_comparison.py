"""The bundled 20-trial radar comparison, and why the two columns disagree.

Each trial pairs a radar-gun reading taken at the net with the pipeline's
peak speed and its speed at the net marker.

Run:
    python3 demos/radar_comparison.py
"""

from __future__ import annotations

from shuttlespeed.evalkit import load_radar_trials, radar_trial_metrics

trials = load_radar_trials()

print("trial   radar   peak    at-net   (km/h)")
for t in trials:
    print(f"{t['trial']:5d}  {t['radar_kmh']:6.1f}  {t['peak_kmh']:6.1f}  {t['at_net_kmh']:6.1f}")

m = radar_trial_metrics()
peak, net = m.peak_vs_radar, m.at_net_vs_radar
print(f"\npeak   vs radar: MAE {peak.mae_kmh:6.2f}  RMSE {peak.rmse_kmh:6.2f}  "
      f"bias {peak.mean_signed_error_kmh:+6.2f}  (n={peak.n})")
print(f"at-net vs radar: MAE {net.mae_kmh:6.2f}  RMSE {net.rmse_kmh:6.2f}  "
      f"bias {net.mean_signed_error_kmh:+6.2f}  (n={net.n})")

# The peak column overshoots the radar on every trial, and not by a little.
# That is drag, not error: the pipeline reads its peak right off the racket,
# while the radar reads at the net, after the shuttle has bled off much of
# its speed. The at-net column samples the same place the radar does, and
# lands within ~10 km/h. Comparing like with like is the whole story.
overshoot = all(t["peak_kmh"] > t["radar_kmh"] for t in trials)
print(f"\npeak > radar on every trial: {overshoot}")
