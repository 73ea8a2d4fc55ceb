"""Corpus parsing, image I/O, ordering, and range mapping."""

import numpy as np
import pytest

from tomo_gan import (DataError, ManifestRecord, PairDataset, load_image,
                      read_manifest, save_image)
from tomo_gan.data import epoch_order, signed_from_unit, unit_from_signed

from conftest import SYNTH_ALGORITHMS, TEST_IDS, write_corpus


def test_manifest_parses_every_record(synth_manifest):
    records = read_manifest(synth_manifest)
    assert len(records) == 8 * len(SYNTH_ALGORITHMS)
    first = records[0]
    assert first.id == 0
    assert first.algorithm == SYNTH_ALGORITHMS[0]
    assert first.input_image.startswith("inputs/")
    assert first.target_image == "targets/0.png"
    assert {r.split for r in records} == {"train", "test"}
    test_ids = {r.id for r in records if r.split == "test"}
    assert test_ids == set(TEST_IDS)


def test_missing_manifest_is_rejected(tmp_path):
    with pytest.raises(DataError, match="not found"):
        read_manifest(tmp_path / "manifest.jsonl")


def test_malformed_manifest_line_is_rejected(tmp_path):
    path = tmp_path / "manifest.jsonl"
    path.write_text('{"id": 0, "algorithm": "lbp", "input_image": "a.png", '
                    '"target_image": "b.png", "split": "train"}\nnot json\n')
    with pytest.raises(DataError, match="line 2"):
        read_manifest(path)


def test_incomplete_manifest_record_is_rejected(tmp_path):
    path = tmp_path / "manifest.jsonl"
    path.write_text('{"id": 0, "algorithm": "lbp"}\n')
    with pytest.raises(DataError, match="line 1"):
        read_manifest(path)


def test_image_round_trip(tmp_path):
    rng = np.random.default_rng(0)
    values = rng.uniform(0.0, 1.0, (32, 32))
    save_image(tmp_path / "img.png", values)
    back = load_image(tmp_path / "img.png")
    assert np.abs(back - values).max() <= 0.5 / 255.0 + 1e-12


@pytest.mark.parametrize("values", [
    np.zeros(16),
    np.full((4, 4), 1.5),
    np.full((4, 4), np.nan),
])
def test_bad_image_values_are_rejected(tmp_path, values):
    with pytest.raises(DataError):
        save_image(tmp_path / "img.png", values)


def test_unreadable_image_names_the_file(tmp_path):
    path = tmp_path / "broken.png"
    path.write_bytes(b"this is not a png")
    with pytest.raises(DataError, match="broken.png"):
        load_image(path)


def test_pair_dataset_decodes_and_shares_targets(synth_manifest):
    records = read_manifest(synth_manifest)
    pairs = PairDataset(synth_manifest.parent, records)
    assert len(pairs) == len(records)
    assert pairs.image_size == 64
    sample = pairs.sample(0)
    assert sample.x.shape == (64, 64)
    assert 0.0 <= sample.x.min() and sample.x.max() <= 1.0
    assert set(np.unique(sample.y)).issubset({0.0, 1.0})
    # Both reconstructions of one phantom decode the target once.
    same_id = [i for i, r in enumerate(records) if r.id == 0]
    assert pairs.sample(same_id[0]).y is pairs.sample(same_id[1]).y


def test_pair_dataset_rejects_missing_images(synth_manifest):
    ghost = ManifestRecord(id=99, algorithm="lbp", input_image="inputs/99_lbp.png",
                           target_image="targets/99.png", split="train")
    with pytest.raises(DataError, match="99_lbp.png"):
        PairDataset(synth_manifest.parent, [ghost])


def test_pair_dataset_rejects_non_square_images(tmp_path):
    root = tmp_path / "corpus"
    manifest = write_corpus(root, count=1, algorithms=("lbp",), test_ids=())
    from PIL import Image
    Image.new("L", (64, 32)).save(root / "inputs/0_lbp.png")
    with pytest.raises(DataError, match="square"):
        PairDataset(root, read_manifest(manifest))


def test_epoch_order_is_a_seeded_permutation():
    order = epoch_order(50, seed=4, epoch=9)
    assert sorted(order.tolist()) == list(range(50))
    assert np.array_equal(order, epoch_order(50, seed=4, epoch=9))
    assert not np.array_equal(order, epoch_order(50, seed=4, epoch=10))
    assert not np.array_equal(order, epoch_order(50, seed=5, epoch=9))


def test_range_mapping_round_trips():
    rng = np.random.default_rng(1)
    values = rng.uniform(0.0, 1.0, 100)
    signed = signed_from_unit(values)
    assert signed.min() >= -1.0 and signed.max() <= 1.0
    assert np.allclose(unit_from_signed(signed), values, atol=1e-12)
    assert unit_from_signed(np.array([1.5, -3.0])).tolist() == [1.0, 0.0]
