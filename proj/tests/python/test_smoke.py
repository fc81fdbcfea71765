import numpy as np
import pytest

import imagetypes as it


def blobs(seed=0, per=40, sigma=0.05):
    rng = np.random.default_rng(seed)
    centers = np.array([[0.0, 0.0, 0.0], [5.0, 0.0, 0.0], [0.0, 5.0, 0.0]])
    x = np.concatenate([c + sigma * rng.standard_normal((per, 3)) for c in centers]).astype(np.float32)
    labels = np.repeat(np.arange(3), per)
    return x, labels


def test_emb_round_trip(tmp_path):
    x = np.random.default_rng(1).standard_normal((7, 4)).astype(np.float32)
    path = tmp_path / "m.emb"
    it.write_embeddings(x, path)
    assert np.array_equal(it.read_embeddings(path), x)
    with open(path, "r+b") as f:
        f.write(b"XXXX")
    with pytest.raises(it.ImagetypesError):
        it.read_embeddings(path)


def test_kmeans_and_metrics():
    x, planted = blobs()
    model = it.fit_kmeans(x, k=3, seed=4)
    labels = model["assignments"]
    # Same partition up to relabeling.
    assert len(set(zip(labels.tolist(), planted.tolist()))) == 3
    hist = model["inertia_history"]
    assert all(b <= a for a, b in zip(hist, hist[1:]))
    assert np.array_equal(it.assign(model["centroids"], x), labels)
    assert it.silhouette(x, labels) > 0.9
    assert it.davies_bouldin(x, model["centroids"], labels) < 0.1
    assert [e["k"] for e in it.scan_k(x, k_min=2, k_max=4)] == [2, 3, 4]


def test_overlap_and_threshold():
    _, planted = blobs()
    ids = [f"img_{i}" for i in range(len(planted))]
    m = it.overlap_matrix(planted, planted, ids)
    assert np.array_equal(m, np.eye(3))
    assert it.threshold_pairs(m, 0.5) == [(0, 0, 1.0), (1, 1, 1.0), (2, 2, 1.0)]
    assert it.jaccard({"a", "b"}, {"b", "c"}) == pytest.approx(1 / 3)


def test_ols():
    rng = np.random.default_rng(2)
    x = np.column_stack([np.ones(100), rng.standard_normal((100, 2))])
    y = x @ np.array([1.0, 2.0, -1.0])
    fit = it.ols_fit(x, y, ["const", "a", "b"])
    assert fit["coefficients"] == pytest.approx([1.0, 2.0, -1.0], abs=1e-10)
    assert fit["r_squared"] == pytest.approx(1.0, abs=1e-10)
    assert not fit["rank_deficient"]


def test_neardup_and_spearman():
    x, _ = blobs(per=20)
    x = np.vstack([x, x[:2]])
    labels = it.assign(it.fit_kmeans(x, k=3, seed=1)["centroids"], x)
    ids = [f"img_{i:03d}" for i in range(len(x))]
    pairs = it.rank_near_duplicates(x, labels, ids, per_cluster_k=50, global_k=50)
    assert [p[2] for p in pairs[:2]] == [0.0, 0.0]
    assert pairs[2][2] > 0.0
    assert it.spearman([1, 2, 3], [3, 2, 1]) == -1.0
    curve = it.consistency_curve(pairs, pairs, k_start=10, k_step=10)
    assert all(rho == 1.0 for _, rho, _ in curve)


def test_sampling_and_crosstab():
    kept = it.sample_per_account(["a"] * 5 + ["b"] * 2, 3, 7)
    assert len(kept) == 5 and kept == sorted(kept)
    centroids = np.array([[0.0], [10.0]], dtype=np.float32)
    ext = np.array([[1.0], [9.0], [11.0]], dtype=np.float32)
    t = it.crosstab(centroids, ext, ["e0", "e1", "e2"], {"e0": "x", "e1": "y", "e2": "x"})
    assert t["counts"] == [[1, 0], [1, 1]]
    assert t["total"] == 3
