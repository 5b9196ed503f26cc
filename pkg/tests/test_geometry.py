import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from mmpinhole import (MaskGeometry, MaskPlaneSampling, RadarConfig,
                       RotationSampling, blade_footprint, build_scene_grid,
                       default_plane_sampling, default_radar_config,
                       effective_fov_deg)
from mmpinhole.errors import ParameterError, UnsupportedConfigurationError
from mmpinhole.geometry import footprint_mask_array


class TestSceneGrid:
    def test_wide_grid_bin_count_and_range(self):
        grid = build_scene_grid(20.0, -50, 50, 0.5, [0])
        assert grid.n_azimuth == 201
        assert grid.n_points == 201
        radii = np.linalg.norm(grid.points, axis=1)
        assert np.max(np.abs(radii - 20.0)) < 1e-9

    def test_single_boresight_point(self):
        grid = build_scene_grid(5.0, 0, 0, 1, [0])
        assert grid.n_points == 1
        np.testing.assert_allclose(grid.points[0], [0.0, 0.0, 5.0], atol=1e-12)

    def test_three_elevation_rings(self):
        grid = build_scene_grid(20.0, -50, 50, 0.5, [-10, 0, 10])
        assert grid.n_points == 603
        assert grid.shape == (3, 201)

    def test_invalid_parameters(self):
        with pytest.raises(ParameterError):
            build_scene_grid(20.0, -50, 50, 0.0, [0])
        with pytest.raises(ParameterError):
            build_scene_grid(-1.0, -50, 50, 0.5, [0])
        with pytest.raises(ParameterError):
            build_scene_grid(20.0, 50, -50, 0.5, [0])

    def test_points_on_sphere_with_elevation(self):
        grid = build_scene_grid(7.5, -40, 40, 2.5, [-15, 0, 15])
        radii = np.linalg.norm(grid.points, axis=1)
        assert np.max(np.abs(radii - 7.5)) < 1e-9

    def test_index_of_picks_nearest(self):
        grid = build_scene_grid(20.0, -10, 10, 1.0, [0])
        assert grid.index_of(0.2) == 10
        assert grid.index_of(-10.0) == 0


class TestEffectiveFov:
    @pytest.mark.parametrize("length,depth,expected", [
        (0.16, 0.12, 53.13),
        (0.12, 0.12, 45.0),
        (0.16, 0.08, 63.43),
    ])
    def test_values(self, length, depth, expected):
        mask = MaskGeometry(blade_length_m=length, plane_depth_m=depth)
        assert effective_fov_deg(mask) == pytest.approx(expected, abs=0.01)


class TestBladeFootprint:
    def test_single_blade_at_zero(self):
        mask = MaskGeometry()
        covered = blade_footprint(mask, 0.0)
        inside = [0.0, mask.blade_length_m / 2, mask.plane_depth_m]
        outside = [0.0, -mask.blade_length_m / 2, mask.plane_depth_m]
        assert covered([inside])[0]
        assert not covered([outside])[0]

    def test_two_blades_cover_both_sides(self):
        mask = MaskGeometry(blade_count=2)
        covered = blade_footprint(mask, 0.0)
        pts = [[0.0, mask.blade_length_m / 2, 0.12],
               [0.0, -mask.blade_length_m / 2, 0.12]]
        assert covered(pts).all()

    def test_beyond_tip_never_covered(self):
        mask = MaskGeometry()
        point = [[0.0, mask.blade_length_m * 1.05, 0.12]]
        for angle in np.linspace(0, 2 * math.pi, 64, endpoint=False):
            assert not blade_footprint(mask, angle)(point)[0]

    def test_unsupported_blade_count(self):
        with pytest.raises(UnsupportedConfigurationError):
            MaskGeometry(blade_count=3)

    @settings(max_examples=25, deadline=None)
    @given(angle=st.floats(0, 2 * math.pi - 1e-9),
           blades=st.sampled_from([1, 2]))
    def test_rotation_periodicity(self, angle, blades):
        mask = MaskGeometry(blade_count=blades)
        rng = np.random.default_rng(0)
        pts = np.column_stack([rng.uniform(-0.2, 0.2, 50),
                               rng.uniform(-0.2, 0.2, 50),
                               np.full(50, 0.12)])
        shifted = (angle + 2 * math.pi / blades) % (2 * math.pi)
        np.testing.assert_array_equal(blade_footprint(mask, angle)(pts),
                                      blade_footprint(mask, shifted)(pts))

    def test_swept_union_fills_disc(self):
        mask = MaskGeometry()
        rng = np.random.default_rng(1)
        r = mask.blade_length_m * np.sqrt(rng.uniform(0, 1, 200))
        phi = rng.uniform(0, 2 * math.pi, 200)
        pts = np.column_stack([r * np.cos(phi), r * np.sin(phi), np.full(200, 0.12)])
        angles = np.linspace(0, 2 * math.pi, 2000, endpoint=False)
        hit = footprint_mask_array(mask, angles, pts[:, :2]).any(axis=0)
        assert hit.all()


class TestRotationSampling:
    def test_uniform_angles(self):
        rot = RotationSampling(1000)
        assert rot.angles_rad[0] == 0.0
        assert rot.count == 1000
        steps = np.diff(rot.angles_rad)
        np.testing.assert_allclose(steps, 2 * math.pi / 1000, atol=1e-12)

    def test_warped_roundtrip(self):
        angles = np.sort(np.random.default_rng(3).uniform(0, 2 * math.pi, 100))
        rot = RotationSampling.warped(angles)
        np.testing.assert_array_equal(rot.angles_rad, angles)

    def test_nonuniform_rejected_unless_warped(self):
        with pytest.raises(ParameterError):
            RotationSampling(4, angles_rad=np.array([0.0, 1.0, 2.0, 5.0]))


class TestMaskPlaneSampling:
    def test_default_covers_swept_circle(self):
        mask = MaskGeometry()
        radar = default_radar_config(mask)
        samp = default_plane_sampling(radar, mask)
        assert samp.spacing_m == pytest.approx(radar.wavelength_m / 2)
        assert samp.extent_m >= mask.blade_length_m + mask.blade_width_m - 1e-12
        pts = samp.samples
        assert pts.shape[1] == 3
        assert np.all(pts[:, 2] == mask.plane_depth_m)
        assert samp.n_samples == pts.shape[0]

    def test_pitch_above_nyquist_rejected(self):
        mask = MaskGeometry()
        radar = default_radar_config(mask)
        with pytest.raises(ParameterError):
            default_plane_sampling(radar, mask, spacing_m=radar.wavelength_m)


class TestRadarConfig:
    def test_default_separation_and_offset(self):
        mask = MaskGeometry()
        radar = default_radar_config(mask)
        sep = radar.rx - radar.tx
        np.testing.assert_allclose(sep, [0.01, 0.0, 0.0], atol=1e-12)
        assert radar.tx[1] == -mask.axis_offset_m

    def test_colocated_mode(self):
        mask = MaskGeometry()
        radar = default_radar_config(mask, colocated=True)
        assert radar.colocated

    def test_invariants(self):
        with pytest.raises(ParameterError):
            RadarConfig(wavelength_m=0.0)
        with pytest.raises(ParameterError):
            RadarConfig(azimuth_fov_deg=95.0)


class TestMaskGeometry:
    def test_attenuation_amplitude(self):
        assert MaskGeometry(attenuation_db=30.0).base_attenuation_amp == pytest.approx(0.0316, abs=2e-4)
        assert MaskGeometry(attenuation_db=math.inf).base_attenuation_amp == 0.0

    def test_invariants(self):
        with pytest.raises(ParameterError):
            MaskGeometry(blade_length_m=0.004, blade_width_m=0.016)
        with pytest.raises(ParameterError):
            MaskGeometry(plane_depth_m=0.0)
        with pytest.raises(ParameterError):
            MaskGeometry(attenuation_db=-1.0)
        with pytest.raises(ParameterError):
            MaskGeometry(mode="other")
