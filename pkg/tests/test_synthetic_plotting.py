import numpy as np

from mer.core_data import load_manifest
from mer.plotting import plot_accuracy, plot_confusion
from mer.synthetic import make_volume, subject_texture, synthetic_clips, write_synthetic_dataset


def test_clip_set_shape():
    clips = synthetic_clips(n_subjects=2, clips_per_class=2, size=20, frames=8, seed=1)
    assert len(clips) == 12 and {c.frames.shape for c in clips} == {(8, 20, 20)}
    assert {c.au_code for c in clips} == {"AU12", "AU1+AU2", "AU4"}
    a = synthetic_clips(n_subjects=2, clips_per_class=2, size=20, frames=8, seed=1)
    assert all(np.array_equal(x.frames, y.frames) for x, y in zip(clips, a))


def test_motions_move_the_right_way():
    rng = np.random.default_rng(0)
    tex = subject_texture(rng, 60)
    right = make_volume("right", tex, 5, 30, rng, noise=0).astype(int)
    assert np.array_equal(right[1][:, 1:], right[0][:, :-1])
    up = make_volume("up", tex, 5, 30, rng, noise=0).astype(int)
    assert np.array_equal(up[1][:-1], up[0][1:])


def test_written_dataset_loads(tmp_path):
    path = write_synthetic_dataset(tmp_path, n_subjects=2, clips_per_class=1, size=20, frames=6)
    m = load_manifest(path)
    assert len(m) == 6 and all(not e.frames_dir.startswith("/") for e in m)


def test_figures_are_deterministic(tmp_path):
    cm = np.array([[5, 1], [2, 7]])
    a = plot_confusion(cm, ["I", "II"], tmp_path / "a.png").read_bytes()
    b = plot_confusion(cm, ["I", "II"], tmp_path / "b.png").read_bytes()
    assert a == b and a[:4] == b"\x89PNG"
    rows = [{"feature": "hog3d", "scheme": "I-V", "protocol": "kfold", "accuracy": "91.00",
             "published_accuracy": "86.35"}]
    assert plot_accuracy(rows, "kfold", tmp_path / "acc.png").stat().st_size > 0
