import numpy as np
import pytest

from themeflow.errors import EmptyCluster, TooFewVectors, ZeroVector
from themeflow.vectors import cosine_similarity, kmeans, normalize, top_representatives


class TestNormalize:
    def test_three_four_five(self):
        assert np.allclose(normalize([3.0, 4.0]), [0.6, 0.8])

    def test_unit_vector_unchanged(self):
        v = normalize([0.2, 0.9, -0.1])
        assert np.allclose(normalize(v), v)

    def test_zero_vector(self):
        with pytest.raises(ZeroVector):
            normalize([0.0, 0.0])


class TestCosine:
    def test_parallel(self):
        assert cosine_similarity([1, 0], [1, 0]) == pytest.approx(1.0)

    def test_orthogonal(self):
        assert cosine_similarity([1, 0], [0, 1]) == pytest.approx(0.0)

    def test_against_formula_oracle(self):
        rng = np.random.default_rng(4)
        for _ in range(50):
            a, b = rng.normal(size=6), rng.normal(size=6)
            expected = float(np.dot(a, b) / (np.linalg.norm(a) * np.linalg.norm(b)))
            assert abs(cosine_similarity(a, b) - expected) < 1e-12


def _partition_signature(labels):
    """Co-membership frozenset; invariant to cluster relabeling."""
    groups = {}
    for i, l in enumerate(labels):
        groups.setdefault(l, []).append(i)
    return frozenset(frozenset(g) for g in groups.values())


def _spherical_objective(points, labels, k):
    """Sum over clusters of the norm of the member-vector sum (equals the
    summed cosine similarity of members to their own normalized mean)."""
    total = 0.0
    for j in range(k):
        members = points[np.array(labels) == j]
        if len(members):
            total += float(np.linalg.norm(members.sum(axis=0)))
    return total


class TestKmeans:
    def test_k_equals_n_axis_points(self):
        points = [[1, 0], [-1, 0], [0, 1], [0, -1]]
        result = kmeans(points, k=4, seed=1)
        assert sorted(result.labels) == [0, 1, 2, 3]

    def test_antipodal_bundles_match_bruteforce_oracle(self):
        rng = np.random.default_rng(11)
        u = normalize(rng.normal(size=6))
        pts = np.array(
            [normalize(u + 0.05 * rng.normal(size=6)) for _ in range(10)]
            + [normalize(-u + 0.05 * rng.normal(size=6)) for _ in range(10)]
        )
        result = kmeans(pts, k=2, seed=3)
        # oracle: enumerate all 2-partitions of 20 points, maximize the objective
        n = 20
        masks = np.arange(1, 2 ** (n - 1), dtype=np.uint32)  # point 0 fixed in side A
        bits = ((masks[:, None] >> np.arange(n - 1)) & 1).astype(np.float64)
        membership = np.hstack([np.ones((len(masks), 1)), bits])  # (masks, n)
        sum_a = membership @ pts
        sum_b = (1 - membership) @ pts
        objective = np.linalg.norm(sum_a, axis=1) + np.linalg.norm(sum_b, axis=1)
        best = membership[int(np.argmax(objective))]
        oracle_labels = [int(v) for v in best]
        assert _partition_signature(result.labels) == _partition_signature(oracle_labels)
        assert _partition_signature(result.labels) == _partition_signature([1] * 10 + [0] * 10)

    def test_corpus_scale_deterministic(self):
        from themeflow.providers import stub_embedding

        vectors = [stub_embedding(f"abstract {i}", 32, seed=5) for i in range(1519)]
        a = kmeans(vectors, k=7, seed=9)
        b = kmeans(vectors, k=7, seed=9)
        assert a.labels == b.labels
        assert len({l for l in a.labels}) == 7

    def test_permutation_invariance(self):
        rng = np.random.default_rng(2)
        pts = [rng.normal(size=5) for _ in range(40)]
        base = kmeans(pts, k=4, seed=7)
        perm = rng.permutation(40)
        shuffled = kmeans([pts[i] for i in perm], k=4, seed=7)
        unshuffled = [None] * 40
        for new_pos, old_pos in enumerate(perm):
            unshuffled[old_pos] = shuffled.labels[new_pos]
        assert _partition_signature(base.labels) == _partition_signature(unshuffled)

    def test_objective_monotone_per_iteration(self):
        rng = np.random.default_rng(3)
        pts = [rng.normal(size=4) for _ in range(60)]
        result = kmeans(pts, k=5, seed=13)
        trace = result.objective_trace
        assert len(trace) == result.iterations_run
        assert all(b >= a - 1e-9 for a, b in zip(trace, trace[1:]))
        # the recorded objective matches an independent recomputation
        final = _spherical_objective(
            np.array([normalize(p) for p in pts]), result.labels, result.k
        )
        assert final == pytest.approx(trace[-1], abs=1e-9)

    def test_too_few_vectors(self):
        with pytest.raises(TooFewVectors):
            kmeans([[1, 0], [0, 1]], k=3, seed=0)

    def test_zero_vector_rejected(self):
        with pytest.raises(ZeroVector):
            kmeans([[1, 0], [0, 0], [0, 1]], k=2, seed=0)

    def test_no_empty_clusters(self):
        rng = np.random.default_rng(8)
        pts = [rng.normal(size=3) for _ in range(30)]
        result = kmeans(pts, k=6, seed=21)
        assert all(result.members(j) for j in range(6))


class TestTopRepresentatives:
    def test_single_member(self):
        assert top_representatives([("only", [1.0, 0.0])], [1.0, 0.0], m=5) == ["only"]

    def test_ordering_by_similarity(self):
        centroid = [1.0, 0.0]
        members = [
            ("far", normalize([0.7, 0.714])),
            ("mid", normalize([0.8, 0.6])),
            ("near", normalize([0.9, 0.436])),
        ]
        assert top_representatives(members, centroid, m=2) == ["near", "mid"]

    def test_matches_full_sort_oracle(self):
        rng = np.random.default_rng(17)
        centroid = rng.normal(size=8)
        members = [(f"id{i:03d}", rng.normal(size=8)) for i in range(100)]
        got = top_representatives(members, centroid, m=10)
        oracle = sorted(
            members,
            key=lambda p: (-cosine_similarity(p[1], centroid), p[0]),
        )
        assert got == [mid for mid, _ in oracle[:10]]

    def test_ties_break_by_id(self):
        v = [1.0, 0.0]
        members = [("b", v), ("a", v), ("c", v)]
        assert top_representatives(members, v, m=2) == ["a", "b"]

    def test_empty_cluster(self):
        with pytest.raises(EmptyCluster):
            top_representatives([], [1.0, 0.0], m=1)


def test_kmeans_identical_vectors_terminate_nonempty():
    result = kmeans([[1.0, 0.0, 0.0]] * 6, k=3, seed=2)
    assert all(result.members(j) for j in range(3))
    assert result.iterations_run <= 3
