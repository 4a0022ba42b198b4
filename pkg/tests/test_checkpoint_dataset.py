import zlib

import numpy as np
import pytest
from conftest import random_model

from benchmarks import Problem1D, ProblemHD, generate, regenerate
from components import Dataset, load_dataset, save_dataset
from density import NoiseSpec
from modules import flow
from utils.checkpoint import load_checkpoint, render_checkpoint, save_checkpoint
from utils.errors import ChecksumError, ContractError, CorruptFileError, MissingFileError, ShapeError


def test_checkpoint_round_trip_is_byte_identical(tmp_path):
    model = random_model(0, d=2, s=3, hidden=6, lam=12.5, direction="inverse")
    first = str(tmp_path / "a.ckpt")
    second = str(tmp_path / "b.ckpt")
    save_checkpoint(model, first)
    loaded = load_checkpoint(first)
    save_checkpoint(loaded, second)
    with open(first, "rb") as f, open(second, "rb") as g:
        assert f.read() == g.read()
    assert loaded.direction == "inverse" and loaded.lam == 12.5 and loaded.hidden_dim == 6
    for k, v in model.parameters().items():
        np.testing.assert_array_equal(loaded.parameters()[k], v)


def test_loaded_model_gives_identical_densities(tmp_path):
    model = random_model(1, d=1, s=2, hidden=5)
    path = str(tmp_path / "model.ckpt")
    save_checkpoint(model, path)
    loaded = load_checkpoint(path)
    rng = np.random.default_rng(0)
    cond, target = rng.standard_normal((20, 1)), rng.standard_normal((20, 2))
    np.testing.assert_array_equal(flow.log_density(loaded, cond, target), flow.log_density(model, cond, target))
    np.testing.assert_array_equal(loaded.sample([0.3], 50, 7), model.sample([0.3], 50, 7))


def test_checksum_detects_edits(tmp_path):
    path = tmp_path / "model.ckpt"
    save_checkpoint(random_model(2), str(path))
    text = path.read_text()
    marker = "[theta_g]\nW1 = 8 x 2\n"
    pos = text.index(marker) + len(marker)
    # flip one digit of the first stored weight
    digit = next(i for i in range(pos, pos + 30) if text[i].isdigit() and text[i] != "0")
    path.write_text(text[:digit] + ("1" if text[digit] != "1" else "2") + text[digit + 1:])
    with pytest.raises(ChecksumError) as info:
        load_checkpoint(str(path))
    assert info.value.exit_code == 5


def test_missing_and_garbage_checkpoints(tmp_path):
    with pytest.raises(MissingFileError):
        load_checkpoint(str(tmp_path / "nope.ckpt"))
    garbage = tmp_path / "garbage.ckpt"
    garbage.write_text("hello\n")
    with pytest.raises(CorruptFileError):
        load_checkpoint(str(garbage))


def test_structural_damage_with_a_valid_checksum_is_corrupt(tmp_path):
    text = render_checkpoint(random_model(3))
    body = text[:text.rfind("[checksum]\n")].replace("format_version = 1", "format_version = 2")
    path = tmp_path / "v2.ckpt"
    path.write_text(body + "[checksum]\nadler32 = {:08x}\n".format(zlib.adler32(body.encode("utf-8"))))
    with pytest.raises(CorruptFileError):
        load_checkpoint(str(path))


def test_training_info_survives_the_round_trip(tmp_path):
    model = random_model(4)
    model.info["epochs"] = 150
    path = str(tmp_path / "model.ckpt")
    save_checkpoint(model, path)
    assert load_checkpoint(path).info["epochs"] == "150"


def test_dataset_round_trip_is_bitwise(tmp_path):
    data = generate(Problem1D("sin", NoiseSpec("laplace", scale=0.1)), 137, 11)
    path = str(tmp_path / "data.csv")
    save_dataset(data, path)
    with open(path) as f:
        assert f.readline().rstrip("\n") == "# prnf-dataset v1"
    back = load_dataset(path)
    assert back.cond.tobytes() == data.cond.tobytes()
    assert back.target.tobytes() == data.target.tobytes()
    assert back.direction == "forward"
    assert regenerate(back.provenance).target.tobytes() == data.target.tobytes()


def test_hd_dataset_round_trip(tmp_path):
    problem = ProblemHD(5, 3, NoiseSpec("correlated_gaussian", s=3, covariance_seed=2))
    data = generate(problem, 40, 0)
    path = str(tmp_path / "hd.csv")
    save_dataset(data, path)
    back = load_dataset(path)
    assert (back.d, back.s) == (5, 3)
    np.testing.assert_array_equal(back.joint(), data.joint())


def test_bad_dataset_files(tmp_path):
    with pytest.raises(MissingFileError):
        load_dataset(str(tmp_path / "none.csv"))
    no_magic = tmp_path / "no_magic.csv"
    no_magic.write_text("0.1,0.2\n")
    with pytest.raises(CorruptFileError):
        load_dataset(str(no_magic))

    data = generate(Problem1D("sin", NoiseSpec("gaussian")), 10, 0)
    path = tmp_path / "data.csv"
    save_dataset(data, str(path))
    path.write_text(path.read_text().replace("# s: 1", "# s: 2"))
    with pytest.raises(CorruptFileError):
        load_dataset(str(path))


def test_dataset_shapes_and_directions():
    data = Dataset(np.arange(6.0).reshape(3, 2), np.arange(3.0))
    assert (data.d, data.s, len(data)) == (2, 1, 3)
    swapped = data.swap()
    assert swapped.direction == "inverse" and (swapped.d, swapped.s) == (1, 2)
    assert data.with_direction("forward") is data
    np.testing.assert_array_equal(data.with_direction("inverse").cond, data.target)
    with pytest.raises(ShapeError):
        Dataset(np.zeros((3, 1)), np.zeros((4, 1)))
    with pytest.raises(ContractError):
        Dataset(np.zeros(3), np.zeros(3), direction="sideways")
    with pytest.raises(ValueError):
        data.cond[0, 0] = 1.0
