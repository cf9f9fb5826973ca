import numpy as np
import pytest

import oracles
import scenebuild
from conftest import write_scene
from lidarsynth import aggregate as agg
from lidarsynth import dataset_io as dio
from lidarsynth.errors import FormatError
from lidarsynth.generate import RunConfig, generate_dataset


@pytest.fixture(scope="module")
def side_wall_dataset(tmp_path_factory):
    """20-frame pure-translation drive past a wall at y = 10."""
    tmp = tmp_path_factory.mktemp("sidewall")
    scene = write_scene(tmp, scenebuild.side_wall_scene(frames=20))
    return generate_dataset(RunConfig(scene_path=scene, output=tmp / "ds"))


def random_cloud(rng, n, spread=10.0):
    return dio.PointCloud(
        xyz=rng.uniform(-spread, spread, (n, 3)).astype(np.float32),
        rgb=rng.integers(0, 256, (n, 3), dtype=np.uint8),
        intensity=rng.random(n).astype(np.float32),
        label=rng.integers(0, 7, n).astype(np.uint16))


class TestVoxelDownsample:
    def test_two_points_one_voxel_centroid(self):
        cloud = dio.PointCloud(
            np.array([[0, 0, 0], [0.4, 0, 0]], dtype=np.float32),
            np.array([[10, 20, 30], [20, 30, 40]], dtype=np.uint8),
            np.array([0.2, 0.4], dtype=np.float32),
            np.array([1, 1], dtype=np.uint16))
        out = agg.voxel_downsample(cloud, agg.VoxelGridParams(1.0))
        assert len(out) == 1
        assert np.allclose(out.xyz[0], [0.2, 0, 0], atol=1e-7)
        assert out.rgb[0].tolist() == [15, 25, 35]
        assert out.intensity[0] == pytest.approx(0.3)

    def test_distinct_voxels_identity_set(self):
        rng = np.random.default_rng(0)
        xyz = np.stack(np.meshgrid(*[np.arange(4) + 0.5] * 3),
                       axis=-1).reshape(-1, 3)
        cloud = dio.PointCloud(xyz.astype(np.float32),
                               rng.integers(0, 256, (64, 3), dtype=np.uint8),
                               rng.random(64).astype(np.float32),
                               rng.integers(0, 7, 64).astype(np.uint16))
        out = agg.voxel_downsample(cloud, agg.VoxelGridParams(1.0))
        assert len(out) == 64
        assert sorted(map(tuple, out.xyz.tolist())) \
            == sorted(map(tuple, cloud.xyz.tolist()))

    def test_matches_bruteforce_oracle(self):
        rng = np.random.default_rng(3)
        cloud = random_cloud(rng, 10_000)
        out = agg.voxel_downsample(cloud, agg.VoxelGridParams(0.25))
        keys, oxyz, orgb, oint, olab = oracles.voxel_bruteforce(
            cloud.xyz, cloud.rgb, cloud.intensity, cloud.label, 0.25)
        assert len(out) == len(keys)
        # emitted in sorted (ix, iy, iz) order matching the oracle
        got_keys = [tuple(v) for v in agg.voxel_indices(
            out.xyz, agg.VoxelGridParams(0.25))]
        assert got_keys == keys
        assert np.abs(out.xyz - oxyz).max() < 1e-6
        assert np.array_equal(out.rgb, orgb)
        assert np.abs(out.intensity - oint).max() < 1e-6
        assert np.array_equal(out.label, olab)

    def test_label_mode_tie_breaks_to_smallest(self):
        cloud = dio.PointCloud(
            np.zeros((4, 3), dtype=np.float32),
            np.zeros((4, 3), dtype=np.uint8),
            np.zeros(4, dtype=np.float32),
            np.array([5, 5, 2, 2], dtype=np.uint16))
        out = agg.voxel_downsample(cloud, agg.VoxelGridParams(1.0))
        assert out.label[0] == 2

    def test_output_never_larger(self):
        rng = np.random.default_rng(4)
        cloud = random_cloud(rng, 3000, spread=2.0)
        out = agg.voxel_downsample(cloud, agg.VoxelGridParams(0.5))
        assert len(out) <= len(cloud)

    def test_negative_coordinates(self):
        cloud = dio.PointCloud(
            np.array([[-0.1, -0.1, -0.1], [-0.9, -0.2, -0.3]], dtype=np.float32),
            np.zeros((2, 3), dtype=np.uint8), np.zeros(2, dtype=np.float32),
            np.zeros(2, dtype=np.uint16))
        out = agg.voxel_downsample(cloud, agg.VoxelGridParams(1.0))
        assert len(out) == 1  # both in voxel (-1, -1, -1)

    def test_params_validation(self):
        with pytest.raises(ValueError):
            agg.VoxelGridParams(0.0)


class TestAggregateDataset:
    def test_concatenation_count_and_order(self, side_wall_dataset):
        merged = agg.aggregate_dataset(
            side_wall_dataset, agg.AggregateOptions(modalities=("3d",)))
        counts = []
        for k in range(20):
            counts.append(len(dio.read_ply(dio.frame_path(side_wall_dataset,
                                                          "3d", k))))
        assert len(merged) == sum(counts)
        # frame order: per-point frame channel is non-decreasing
        tagged = agg.aggregate_dataset(side_wall_dataset, agg.AggregateOptions(
            modalities=("3d",), keep_frame_index=True))
        assert (np.diff(tagged.extras["frame"].astype(np.int64)) >= 0).all()

    def test_modality_recoloring(self, side_wall_dataset):
        merged = agg.aggregate_dataset(side_wall_dataset, agg.AggregateOptions(
            modalities=("3d",), color_map={"3d": (9, 8, 7)}))
        assert (merged.rgb == [9, 8, 7]).all()

    def test_wall_points_coincide_across_frames(self, side_wall_dataset):
        merged = agg.aggregate_dataset(
            side_wall_dataset, agg.AggregateOptions(modalities=("3d",)))
        wall = merged.label == 2  # building code
        assert wall.sum() > 1000
        y = merged.xyz[wall][:, 1].astype(np.float64)
        assert np.abs(y - 10.0).max() < 1e-6

    def test_cross_frame_sampling_density_bound(self, side_wall_dataset):
        from scipy.spatial import cKDTree
        manifest = dio.read_manifest(side_wall_dataset)
        rows = dio.read_poses_csv(side_wall_dataset / dio.POSES_NAME)
        mount = agg.mount_from_manifest(manifest, "3d")

        def wall_world(k):
            cloud = dio.read_ply(dio.frame_path(side_wall_dataset, "3d", k))
            m = agg.world_transform(agg.pose_of_row(rows[k]), mount)
            world = agg.transform_cloud_xyz(cloud.xyz, m)
            return world[cloud.label == 2]

        a = wall_world(0)
        b = wall_world(1)
        # restrict queries to moderate incidence around frame 0's position;
        # the target set stays unrestricted so window edges cannot fake gaps
        sel = np.abs(b[:, 0] - rows[0].x) < 5.0
        bq = b[sel]
        rng_obs = np.linalg.norm(
            bq - [rows[1].x, rows[1].y, rows[1].z + 1.8], axis=1).max()
        d, _ = cKDTree(a).query(bq)
        # nearest-neighbor gap stays below twice the azimuth arc length
        bound = 2.0 * rng_obs * np.deg2rad(0.4)
        assert d.max() < bound

    def test_missing_pose_is_loud(self, side_wall_dataset, tmp_path):
        import shutil
        ds = tmp_path / "ds"
        shutil.copytree(side_wall_dataset, ds)
        rows = dio.read_poses_csv(ds / dio.POSES_NAME)
        dio.write_poses_csv(rows[:-1], ds / dio.POSES_NAME)
        with pytest.raises(FormatError, match="frame 19"):
            agg.aggregate_dataset(ds, agg.AggregateOptions(modalities=("3d",)))

    def test_voxel_matches_streaming_accumulator(self, side_wall_dataset):
        params = agg.VoxelGridParams(0.25)
        streamed = agg.aggregate_dataset(side_wall_dataset, agg.AggregateOptions(
            modalities=("3d",), voxel=params))
        merged = agg.aggregate_dataset(
            side_wall_dataset, agg.AggregateOptions(modalities=("3d",)))
        keys, oxyz, orgb, oint, olab = oracles.voxel_bruteforce(
            merged.xyz.astype(np.float64), merged.rgb, merged.intensity,
            merged.label, 0.25)
        assert len(streamed) == len(keys)
        assert np.abs(streamed.xyz - oxyz).max() < 1e-5

    def test_section_partition_counts(self, side_wall_dataset):
        full = agg.aggregate_dataset(
            side_wall_dataset, agg.AggregateOptions(modalities=("3d",)))
        lo = full.xyz.min(axis=0) - 1.0
        hi = full.xyz.max(axis=0) + 1.0
        split = 0.0
        left = agg.aggregate_section(
            side_wall_dataset, (lo, (split, hi[1], hi[2])),
            agg.AggregateOptions(modalities=("3d",)))
        right = agg.aggregate_section(
            side_wall_dataset, ((split, lo[1], lo[2]), hi),
            agg.AggregateOptions(modalities=("3d",)))
        assert len(left) + len(right) == len(full)

    def test_section_full_region_is_identity(self, side_wall_dataset):
        full = agg.aggregate_dataset(
            side_wall_dataset, agg.AggregateOptions(modalities=("3d",)))
        lo = full.xyz.min(axis=0) - 1.0
        hi = full.xyz.max(axis=0) + 1.0
        sect = agg.aggregate_section(side_wall_dataset, (lo, hi),
                                     agg.AggregateOptions(modalities=("3d",)))
        assert len(sect) == len(full)
        assert np.array_equal(sect.xyz, full.xyz)

    def test_empty_region(self, side_wall_dataset):
        sect = agg.aggregate_section(
            side_wall_dataset, ((1e6, 1e6, 1e6), (1e6 + 1, 1e6 + 1, 1e6 + 1)),
            agg.AggregateOptions(modalities=("3d",)))
        assert len(sect) == 0

    def test_exports_both_formats(self, side_wall_dataset, tmp_path):
        merged = agg.aggregate_dataset(
            side_wall_dataset, agg.AggregateOptions(modalities=("3d",)))
        paths = agg.export_aggregate(merged, tmp_path / "agg")
        assert sorted(p.suffix for p in paths) == [".pcd", ".ply"]
        assert len(dio.read_ply(paths[0])) == len(merged)
        assert len(dio.read_pcd(paths[1])) == len(merged)

    def test_outlier_filter_removes_isolated_point(self):
        rng = np.random.default_rng(5)
        xyz = rng.normal(0, 0.5, (500, 3)).astype(np.float32)
        xyz[0] = [100, 100, 100]
        cloud = dio.PointCloud(xyz, np.zeros((500, 3), np.uint8),
                               np.zeros(500, np.float32),
                               np.zeros(500, np.uint16))
        out = agg.statistical_outlier_filter(cloud)
        assert len(out) < 500
        assert not (out.xyz == [100, 100, 100]).all(axis=1).any()
