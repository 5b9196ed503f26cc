"""Two-target resolution limit under calibrated receiver noise.

Truncating the SVD inversion to the 40 dominant singular values (the sweet
spot under realistic noise) sets the working angular resolution.  Two unit
targets in phase quadrature are separated until the -3 dB dip criterion
declares them resolved; the transition sits near 2.2 degrees.
"""

import math

import numpy as np

import mmpinhole as mp

mask = mp.MaskGeometry(mode="inverse-pinhole")
radar = mp.default_radar_config(mask)
rotation = mp.RotationSampling(1000)
sampling = mp.default_plane_sampling(radar, mask)
grid = mp.build_scene_grid(20.0, -50, 50, 0.25, [0])

print("building the default bidirectional model (a few seconds)...")
model = mp.build_forward(radar, grid, mask, rotation, sampling, "bidirectional")
fact = mp.factorize(model)
sigma_n = math.sqrt(mp.calibrate_noise_power(fact.S, usable_count=40, margin=0.1))
print(f"noise std calibrated to {sigma_n:.2e} (~40 usable singular values)")

k = 40
Uk, Sk, Vk = fact.U[:, :k], fact.S[:k], fact.V[:, :k]
az = grid.azimuth_deg
print(f"{'separation':>10s} {'resolved/12':>12s}")
transition = None
for sep in (1.5, 1.75, 2.0, 2.25, 2.5, 2.75):
    j1, j2 = grid.index_of(0.0), grid.index_of(sep)
    x = np.zeros(grid.n_points, dtype=complex)
    x[j1], x[j2] = 1.0, 1.0j
    y0 = model.B @ x
    hits = 0
    for seed in range(12):
        rng = np.random.default_rng(1000 + seed)
        noise = sigma_n / math.sqrt(2) * (rng.standard_normal(y0.size)
                                          + 1j * rng.standard_normal(y0.size))
        x_hat = Vk @ ((Uk.conj().T @ (y0 + noise)) / Sk)
        if mp.peaks_resolved(az, np.abs(x_hat), az[j1], az[j2]):
            hits += 1
    marker = ""
    if transition is None and hits >= 6:
        transition = sep
        marker = "  <- transition"
    print(f"{sep:10.2f} {hits:12d}{marker}")
print(f"measured resolution limit: about {transition} degrees with 40 "
      "singular values over the +-50 degree field of view")
