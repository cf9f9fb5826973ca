import shutil
import subprocess
import sys

import pytest

import scenebuild
from conftest import write_scene
from lidarsynth import cli
from lidarsynth import dataset_io as dio


def run(argv):
    return cli.main(argv)


class TestHelpCoverage:
    def test_every_flag_documented(self):
        parser = cli.build_parser()
        subparsers = [a for a in parser._actions
                      if hasattr(a, "choices") and a.choices]
        assert subparsers
        seen = []
        for sp_action in subparsers:
            for name, sub in sp_action.choices.items():
                for action in sub._actions:
                    seen.append((name, action.option_strings, action.help))
                    assert action.help, (
                        f"undocumented flag {action.option_strings} "
                        f"in subcommand {name}")
        assert len(seen) > 20

    def test_help_exits_zero(self):
        out = subprocess.run([sys.executable, "-m", "lidarsynth.cli", "--help"],
                             capture_output=True, text=True)
        assert out.returncode == 0
        for cmd in ("generate", "aggregate", "attack", "defend", "vo",
                    "validate"):
            assert cmd in out.stdout

    def test_subcommand_help_lists_flags(self):
        out = subprocess.run(
            [sys.executable, "-m", "lidarsynth.cli", "generate", "--help"],
            capture_output=True, text=True)
        assert out.returncode == 0
        for flag in ("--scene", "--output", "--seed", "--jobs", "--frames",
                     "--dt", "--start-time", "--dump-every"):
            assert flag in out.stdout


class TestGenerate:
    def test_missing_scene_exits_1_naming_path(self, tmp_path, capsys):
        rc = run(["generate", "--scene", str(tmp_path / "nope.scene"),
                  "--output", str(tmp_path / "out")])
        captured = capsys.readouterr()
        assert rc == 1
        assert captured.err.startswith("error:config:")
        assert "nope.scene" in captured.err

    def test_bad_scene_exits_1(self, tmp_path, capsys):
        scene = write_scene(tmp_path, "[material m]\nreflectivity 2.0\nrgb 0 0 0\n")
        rc = run(["generate", "--scene", str(scene),
                  "--output", str(tmp_path / "out")])
        assert rc == 1
        assert capsys.readouterr().err.startswith("error:config:")

    def test_generated_dataset_validates(self, urban_dataset, capsys):
        assert run(["validate", "--dataset", str(urban_dataset)]) == 0
        assert "no discrepancies" in capsys.readouterr().out

    def test_rerun_identical_manifest(self, tmp_path):
        scene = write_scene(tmp_path, scenebuild.wall_scene(frames=4,
                                                            azimuth_steps=180))
        a = tmp_path / "a"
        b = tmp_path / "b"
        assert run(["generate", "--scene", str(scene), "--output", str(a),
                    "--seed", "5"]) == 0
        assert run(["generate", "--scene", str(scene), "--output", str(b),
                    "--seed", "5"]) == 0
        assert (a / dio.MANIFEST_NAME).read_bytes() \
            == (b / dio.MANIFEST_NAME).read_bytes()

    def test_dump_every_writes_snapshots(self, tmp_path):
        scene = write_scene(tmp_path, scenebuild.wall_scene(frames=4,
                                                            azimuth_steps=90))
        out = tmp_path / "ds"
        assert run(["generate", "--scene", str(scene), "--output", str(out),
                    "--dump-every", "2"]) == 0
        snaps = sorted((out / "derived" / "snapshots").glob("*.ppm"))
        assert [p.name for p in snaps] == ["000000.ppm", "000002.ppm"]


class TestValidate:
    def test_tampered_dataset_exits_1(self, urban_dataset, tmp_path, capsys):
        ds = tmp_path / "ds"
        shutil.copytree(urban_dataset, ds)
        victim = dio.frame_path(ds, "3d", 2)
        data = bytearray(victim.read_bytes())
        data[-1] ^= 0x01
        victim.write_bytes(bytes(data))
        assert run(["validate", "--dataset", str(ds)]) == 1
        assert "frames/3d/000002.ply" in capsys.readouterr().out

    def test_missing_dataset_dir(self, tmp_path, capsys):
        rc = run(["validate", "--dataset", str(tmp_path / "missing")])
        assert rc == 1
        assert capsys.readouterr().err.startswith("error:config:")


class TestAggregateCli:
    def test_writes_both_formats(self, urban_dataset, capsys):
        rc = run(["aggregate", "--dataset", str(urban_dataset),
                  "--modalities", "3d", "--voxel-size", "0.5"])
        assert rc == 0
        assert (urban_dataset / "derived/aggregate.ply").exists()
        assert (urban_dataset / "derived/aggregate.pcd").exists()

    def test_idempotent_bytes(self, urban_dataset):
        args = ["aggregate", "--dataset", str(urban_dataset),
                "--modalities", "3d,2d", "--name", "idem"]
        assert run(args) == 0
        first = (urban_dataset / "derived/idem.ply").read_bytes()
        assert run(args) == 0
        assert (urban_dataset / "derived/idem.ply").read_bytes() == first

    def test_bad_color_spec(self, urban_dataset, capsys):
        rc = run(["aggregate", "--dataset", str(urban_dataset),
                  "--color", "3d=red"])
        assert rc == 1
        assert capsys.readouterr().err.startswith("error:config:")

    def test_region_and_custom_color(self, urban_dataset):
        rc = run(["aggregate", "--dataset", str(urban_dataset),
                  "--modalities", "3d", "--region", "-5", "-5", "0", "5", "5", "5",
                  "--color", "3d=255,0,0", "--name", "section"])
        assert rc == 0
        cloud = dio.read_ply(urban_dataset / "derived/section.ply")
        if len(cloud):
            assert (cloud.rgb == [255, 0, 0]).all()
            assert (cloud.xyz[:, 0] >= -5).all() and (cloud.xyz[:, 0] < 5).all()


@pytest.fixture(scope="module")
def dataset(tmp_path_factory):
    tmp = tmp_path_factory.mktemp("pipe")
    scene = write_scene(tmp, scenebuild.defense_scene(frames=6))
    out = tmp / "ds"
    assert run(["generate", "--scene", str(scene), "--output", str(out)]) == 0
    return out


class TestPipeline:
    def test_attack_then_defend_recall(self, dataset, tmp_path, capsys):
        recipe = tmp_path / "r.recipe"
        recipe.write_text(scenebuild.INJECT_RECIPE.format(last=5, count=20))
        hacked = tmp_path / "hacked"
        assert run(["attack", "--dataset", str(dataset),
                    "--recipe", str(recipe), "--output", str(hacked)]) == 0
        assert run(["defend", "--dataset", str(hacked),
                    "--tolerance", "0.05"]) == 0
        report_csv = hacked / "derived/defense_report.csv"
        assert report_csv.exists()
        lines = report_csv.read_text().splitlines()
        total = lines[-1].split(",")
        recall = float(total[5])
        assert recall >= 0.9
        # stdout carries the human-readable summary
        assert "recall" in capsys.readouterr().out

    def test_defend_idempotent(self, dataset, tmp_path):
        args = ["defend", "--dataset", str(dataset)]
        assert run(args) == 0
        first = (dataset / "derived/defense_report.csv").read_bytes()
        assert run(args) == 0
        assert (dataset / "derived/defense_report.csv").read_bytes() == first

    def test_attack_missing_recipe(self, dataset, tmp_path, capsys):
        rc = run(["attack", "--dataset", str(dataset),
                  "--recipe", str(tmp_path / "no.recipe")])
        assert rc == 1
        assert capsys.readouterr().err.startswith("error:config:")

    def test_bad_recipe_is_config_error(self, dataset, tmp_path, capsys):
        recipe = tmp_path / "bad.recipe"
        recipe.write_text("[attack inject]\nframes 0\nbogus_key 1\n")
        rc = run(["attack", "--dataset", str(dataset), "--recipe", str(recipe)])
        assert rc == 1
        assert capsys.readouterr().err.startswith("error:config:")


class TestVoCli:
    def test_missing_images_exits_1_naming_directory(self, urban_dataset,
                                                     tmp_path, capsys):
        ds = tmp_path / "ds"
        shutil.copytree(urban_dataset, ds)
        shutil.rmtree(ds / "images/rgb")
        rc = run(["vo", "--dataset", str(ds)])
        captured = capsys.readouterr()
        assert rc == 1
        assert "images/rgb" in captured.err

    def test_vo_reports_written(self, urban_dataset, capsys):
        rc = run(["vo", "--dataset", str(urban_dataset),
                  "--ransac-iterations", "200"])
        assert rc == 0
        report = urban_dataset / "derived/vo_report.csv"
        traj = urban_dataset / "derived/vo_trajectory.csv"
        assert report.exists() and traj.exists()
        assert report.read_text().splitlines()[0] \
            == "frame,rot_err_deg,tdir_err_deg,inliers"
        # trajectory file is a poses CSV with a scale-free comment header
        first = traj.read_text().splitlines()[0]
        assert first.startswith("#") and "scale" in first
        rows = dio.read_poses_csv(traj)
        assert [r.frame for r in rows] == list(range(12))


def test_version_flag():
    out = subprocess.run([sys.executable, "-m", "lidarsynth.cli", "--version"],
                         capture_output=True, text=True)
    assert out.returncode == 0
    assert out.stdout.strip()
