"""Moving targets and natural two-blade rotors.

Two practical effects on top of the static model:

* A radially moving target adds a two-way Doppler phase ramp across the
  rotation.  Known (or hypothesized) velocity is compensated exactly by the
  conjugate ramp before inversion.
* Stock two-blade rotors act as natural rotating blockers.  With the
  antenna on the rotation axis the mask is point-symmetric as seen from the
  antenna, so a single target returns two distinct null timings per blade
  period and a mirror ghost appears in the image.  Offsetting the antenna
  (with its narrow elevation beam) keeps only one blade in the beam at a
  time: one null timing per period, unambiguous image.
"""

import math

import numpy as np

import mmpinhole as mp
from mmpinhole.mask import count_null_events, null_signature

rotation = mp.RotationSampling(1000)

# --- Doppler compensation -------------------------------------------------
mask = mp.MaskGeometry(mode="inverse-pinhole")
radar = mp.default_radar_config(mask)
sampling = mp.default_plane_sampling(radar, mask)
grid = mp.build_scene_grid(20.0, -50, 50, 0.5, [0])
model = mp.build_forward(radar, grid, mask, rotation, sampling, "bidirectional")
fact = mp.factorize(model)

x = np.zeros(grid.n_points, dtype=complex)
x[grid.index_of(-12.0)] = 1.0
x[grid.index_of(9.0)] = 0.8j
noise = mp.NoiseModel(mp.calibrate_noise_power(fact.S, 40, margin=0.2), seed=1)
static = mp.simulate(model, x, noise)
dt = mp.sample_interval_s(600.0, rotation.count)
v = 5.0
moving = mp.apply_doppler(static, v, dt, radar.wavelength_m)
compensated = mp.apply_doppler(moving, -v, dt, radar.wavelength_m)

cfg = mp.ReconConfig(sigma_max=40, normalize_output=True)
for name, meas in (("static", static), ("moving, uncompensated", moving),
                   ("moving, compensated", compensated)):
    img = mp.reconstruct(fact, meas.y, cfg)
    peak_az = grid.azimuth_deg[int(np.argmax(img.intensity[0]))]
    print(f"{name:22s}: strongest response at {peak_az:+.1f} deg")
print(f"(5 m/s shifts the phase by {2 * math.pi * 2 * v * dt / radar.wavelength_m:.2f} "
      "rad per sample; uncompensated inversion scatters the energy)")

# --- twin-blade ambiguity ---------------------------------------------------
print()
grid11 = mp.build_scene_grid(20.0, -50, 50, 1.0, [0])
jt = grid11.index_of(10.0)
for name, offset in (("centered antenna", 0.0), ("offset antenna", 0.12)):
    mask2 = mp.MaskGeometry(blade_count=2, axis_offset_m=offset,
                            mode="inverse-pinhole")
    radar2 = mp.default_radar_config(mask2)
    sampling2 = mp.default_plane_sampling(radar2, mask2)
    model2 = mp.build_forward(radar2, grid11, mask2, rotation, sampling2,
                              "bidirectional")
    timings, depths = count_null_events(null_signature(model2, jt), 2)
    img = mp.reconstruct(mp.factorize(model2), model2.B @ np.eye(grid11.n_points)[jt],
                         mp.ReconConfig(sigma_max=40, normalize_output=True))
    inten = img.intensity[0]
    mirror = inten[grid11.index_of(-10.0)]
    print(f"{name:17s}: {timings.size} null timing(s) per blade period, "
          f"mirror-image level {mirror:.2f}")
print("-> the offset antenna removes the twin-blade direction ambiguity")
