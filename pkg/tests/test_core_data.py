import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from PIL import Image

from mer.core_data import (BlockGrid, DatasetManifest, ManifestEntry, VideoClip, load_clip, load_frames,
                           load_manifest, make_grid, read_frame, save_frames, to_luma, write_manifest)
from mer.errors import FormatError, MerWarning, ValidationError

HEADER = "subject_id,clip_id,frames_dir,au_code,emotion\n"


def test_manifest_row(tmp_path):
    p = tmp_path / "m.csv"
    p.write_text(HEADER + "s01,EP19_03f,frames/s01/EP19_03f,AU4,others\n")
    m = load_manifest(p)
    (e,) = m.entries
    assert (e.subject_id, e.clip_id, e.au_code, e.emotion) == ("s01", "EP19_03f", "AU4", "others")
    assert e.line == 2
    assert m.dataset_name == "m"


def test_manifest_empty_warns(tmp_path):
    p = tmp_path / "m.csv"
    p.write_text(HEADER)
    with pytest.warns(MerWarning):
        m = load_manifest(p)
    assert len(m) == 0


def test_manifest_duplicate_rows_named(tmp_path):
    p = tmp_path / "m.csv"
    p.write_text(HEADER + "s01,EP19_03f,a,AU4,\ns02,x,b,AU1,\ns01,EP19_03f,c,AU6,\n")
    with pytest.raises(ValidationError, match=r"rows 2 and 4"):
        load_manifest(p)


@pytest.mark.parametrize("header", ["subject_id,clip_id,frames_dir\n",
                                    "subject_id,clip_id,frames_dir,au_code,au_code\n"])
def test_manifest_bad_columns(tmp_path, header):
    p = tmp_path / "m.csv"
    p.write_text(header + "s01,c,d,AU4,AU4\n")
    with pytest.raises(FormatError):
        load_manifest(p)


def test_manifest_without_emotion_column(tmp_path):
    p = tmp_path / "m.csv"
    p.write_text("subject_id,clip_id,frames_dir,au_code\ns01,c,d,AU4\n")
    assert load_manifest(p).entries[0].emotion is None


def test_manifest_roundtrip(tmp_path):
    entries = [ManifestEntry("s1", "c1", "f/1", "AU4+AU7", "disgust"), ManifestEntry("s2", "c2", "f/2", "R12A")]
    write_manifest(entries, tmp_path / "m.csv")
    back = load_manifest(tmp_path / "m.csv")
    assert [(e.subject_id, e.clip_id, e.frames_dir, e.au_code, e.emotion) for e in back] == \
           [(e.subject_id, e.clip_id, e.frames_dir, e.au_code, e.emotion) for e in entries]


def test_relative_frames_dir_resolution(tmp_path, monkeypatch):
    monkeypatch.delenv("MER_DATA_ROOT", raising=False)
    m = DatasetManifest((ManifestEntry("s", "c", "frames/c", "AU4"),), root=tmp_path)
    assert m.resolve_frames_dir(m.entries[0]) == tmp_path / "frames/c"
    monkeypatch.setenv("MER_DATA_ROOT", "/data")
    assert str(m.resolve_frames_dir(m.entries[0])) == "/data/frames/c"


def test_load_clip_identical_frames(tmp_path):
    frame = np.random.default_rng(0).integers(0, 256, (340, 280), dtype=np.uint8)
    save_frames(np.repeat(frame[None], 100, axis=0), tmp_path / "f")
    clip = load_clip(ManifestEntry("s", "c", str(tmp_path / "f"), "AU4"))
    assert (clip.length, clip.width, clip.height) == (100, 280, 340)


def test_load_frames_dimension_mismatch(tmp_path):
    d = tmp_path / "f"
    d.mkdir()
    Image.fromarray(np.zeros((340, 280), np.uint8)).save(d / "a.png")
    Image.fromarray(np.zeros((340, 300), np.uint8)).save(d / "b.png")
    with pytest.raises(ValidationError, match="300x340"):
        load_frames(d)


def test_load_frames_needs_two(tmp_path):
    save_frames(np.zeros((1, 12, 12), np.uint8), tmp_path / "f")
    with pytest.raises(ValidationError):
        load_frames(tmp_path / "f")


def test_rgb_to_intensity(tmp_path):
    assert to_luma(np.array([255, 0, 0]))[()] == 76
    rgb = np.zeros((12, 12, 3), np.uint8)
    rgb[..., 0] = 255
    Image.fromarray(rgb).save(tmp_path / "r.png")
    assert np.all(read_frame(tmp_path / "r.png") == 76)


@settings(max_examples=15, deadline=None)
@given(st.integers(0, 2**32 - 1), st.integers(2, 6), st.integers(10, 24), st.integers(10, 24))
def test_save_load_roundtrip(tmp_path_factory, seed, t, h, w):
    vol = np.random.default_rng(seed).integers(0, 256, (t, h, w), dtype=np.uint8)
    d = tmp_path_factory.mktemp("rt")
    save_frames(vol, d)
    assert np.array_equal(load_frames(d), vol)


def test_clip_invariants():
    with pytest.raises(ValidationError):
        VideoClip("s", "c", np.zeros((1, 12, 12)))
    with pytest.raises(ValidationError):
        VideoClip("s", "c", np.zeros((3, 9, 12)))
    clip = VideoClip("s", "c", np.zeros((3, 12, 12)))
    assert not clip.frames.flags.writeable


def test_grid_examples():
    g = make_grid(280, 340)
    assert set(g.col_widths) == {56} and set(g.row_heights) == {68}
    assert make_grid(11, 10).col_widths == (2, 2, 2, 2, 3)
    with pytest.raises(ValidationError):
        make_grid(5, 5)


@given(st.integers(10, 400), st.integers(10, 400))
def test_grid_partitions_frame(w, h):
    g = BlockGrid(w, h)
    labels = g.label_map()
    counts = np.bincount(labels.ravel(), minlength=25)
    areas = [cw * rh for rh in g.row_heights for cw in g.col_widths]
    assert counts.tolist() == areas
    assert max(g.col_widths) - min(g.col_widths) <= 1
    covered = np.zeros((h, w), int)
    for rs, cs in g.cells():
        covered[rs, cs] += 1
    assert np.all(covered == 1)
    x, y = w - 1, h - 1
    assert g.cell_of(x, y) == labels[y, x] == 24
