"""Inverse pinholes: a rotating blocker instead of a rotating hole.

A regular pinhole needs a large opaque sheet with a small transparent slot;
the inverse design keeps only the small blocker (a 10-gram blade) and lets
everything else through.  Because receiver noise is signal-independent at
these frequencies, flooding the receiver costs nothing, and the inverse
design actually keeps more singular values above any fixed noise floor.

This script compares the two spectra in common units and shows the per-
rotation return of a point target: for the inverse blade the target angle
is encoded in the timing of a sharp dip ("null") once per pass.
"""

import numpy as np

import mmpinhole as mp
from mmpinhole.mask import count_null_events, null_signature

rotation = mp.RotationSampling(1000)
grid = mp.build_scene_grid(20.0, -50, 50, 0.5, [0])

models = {}
for mode in ("regular-pinhole", "inverse-pinhole"):
    mask = mp.MaskGeometry(mode=mode)
    radar = mp.default_radar_config(mask)
    sampling = mp.default_plane_sampling(radar, mask)
    models[mode] = mp.build_forward(radar, grid, mask, rotation, sampling,
                                    "bidirectional")

spectra = {mode: np.linalg.svd(m.B, compute_uv=False)
           for mode, m in models.items()}
floor = 1e-3 * spectra["regular-pinhole"][0]
for mode, S in spectra.items():
    usable = int(np.count_nonzero(S >= floor))
    print(f"{mode:16s} sigma_1 = {S[0]:.3e}, usable above the shared floor: {usable}")
print("-> the blocker design passes more energy and keeps more usable modes")

# null signatures for three target angles (30 dB absorber blade)
mask = mp.MaskGeometry(mode="inverse-pinhole", attenuation_db=30.0)
radar = mp.default_radar_config(mask)
sampling = mp.default_plane_sampling(radar, mask)
traces = {}
for az in (-20.0, 0.0, 20.0):
    g = mp.build_scene_grid(20.0, az, az, 1.0, [0])
    model = mp.build_forward(radar, g, mask, rotation, sampling, "bidirectional")
    trace = null_signature(model, 0)
    timings, depths = count_null_events(trace, mask.blade_count)
    traces[az] = trace
    print(f"target at {az:+5.1f} deg: null at rotation sample {timings[0]:4d} "
          f"({depths[0]:.1f} dB deep)")
print("-> the dip timing moves monotonically with target angle")

try:
    import matplotlib
    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    fig, ax = plt.subplots(figsize=(8, 3.5))
    for az, trace in traces.items():
        ax.plot(20 * np.log10(trace / np.median(trace)), label=f"{az:+.0f} deg")
    ax.set_xlabel("rotation position")
    ax.set_ylabel("return relative to median (dB)")
    ax.legend()
    fig.tight_layout()
    fig.savefig("inverse_pinhole_nulls.png", dpi=130)
    print("wrote inverse_pinhole_nulls.png")
except ImportError:
    print("matplotlib not available; skipping the figure")
