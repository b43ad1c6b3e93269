import numpy as np
import pytest

from binbench import errors, raster
from conftest import nonempty_mask, random_gray, random_mask
from oracles import (
    flood_fill_component_count,
    naive_contour,
    naive_distance_sq,
    naive_histogram,
    naive_local_stats,
)


class TestHistogram:
    def test_constant_image(self):
        img = np.zeros((2, 2), np.uint8)
        h = raster.histogram(img)
        assert h[0] == 4 and h[1:].sum() == 0

    def test_two_values(self):
        h = raster.histogram(np.array([[0, 255]], np.uint8))
        assert h[0] == 1 and h[255] == 1 and h.sum() == 2

    def test_matches_per_pixel_tally(self, rng):
        img = random_gray(rng, 16, 16)
        h = raster.histogram(img)
        assert h.sum() == 256
        assert h.tolist() == naive_histogram(img)


class TestLocalStats:
    def test_constant(self):
        img = np.full((9, 7), 7, np.uint8)
        for window in (3, 5, 7):
            mean, std = raster.local_stats(img, window)
            assert np.all(mean == 7.0)
            assert np.all(std == 0.0)

    def test_center_pixel_1x3(self):
        mean, std = raster.local_stats(np.array([[0, 0, 255]], np.uint8), 3)
        assert mean[0, 1] == pytest.approx(85.0)
        # sqrt((2*85^2 + 170^2)/3)
        assert std[0, 1] == pytest.approx(120.20815280171308, abs=1e-9)

    def test_matches_naive_small(self, rng):
        img = random_gray(rng, 12, 12)
        for window in (3, 5):
            mean, std = raster.local_stats(img, window)
            nmean, nstd = naive_local_stats(img, window)
            np.testing.assert_allclose(mean, nmean, atol=1e-9)
            np.testing.assert_allclose(std, nstd, atol=1e-9)

    def test_all_window_sizes(self, rng):
        img = random_gray(rng, 20, 17)
        for window in range(3, 32, 2):
            mean, std = raster.local_stats(img, window)
            nmean, nstd = naive_local_stats(img, window)
            np.testing.assert_allclose(mean, nmean, atol=1e-9)
            np.testing.assert_allclose(std, nstd, atol=1e-9)
            assert mean.min() >= 0 and mean.max() <= 255
            assert std.min() >= 0

    @pytest.mark.parametrize("window", [2, 1, 0, -3, 4])
    def test_invalid_window(self, window):
        with pytest.raises(ValueError):
            raster.local_stats(np.zeros((4, 4), np.uint8), window)


class TestDistanceTransform:
    def test_all_seeds(self):
        seed = np.ones((4, 6), bool)
        assert np.all(raster.distance_transform(seed) == 0.0)

    def test_single_center(self):
        seed = np.zeros((5, 5), bool)
        seed[2, 2] = True
        d = raster.distance_transform(seed)
        assert d[0, 0] == pytest.approx(2 * np.sqrt(2.0))
        assert d[2, 2] == 0.0

    def test_matches_brute_force_exactly(self, rng):
        for _ in range(12):
            h, w = int(rng.integers(1, 13)), int(rng.integers(1, 13))
            seed = nonempty_mask(rng, h, w, p=0.2)
            got = raster.distance_transform_squared(seed)
            np.testing.assert_array_equal(got, naive_distance_sq(seed))

    def test_lipschitz_over_4_neighbors(self, rng):
        seed = nonempty_mask(rng, 10, 10, p=0.1)
        d = raster.distance_transform(seed)
        assert np.all(np.abs(np.diff(d, axis=0)) <= 1.0 + 1e-12)
        assert np.all(np.abs(np.diff(d, axis=1)) <= 1.0 + 1e-12)

    def test_empty_seed_raises(self):
        with pytest.raises(errors.EmptySeedError):
            raster.distance_transform(np.zeros((3, 3), bool))


class TestContour:
    def test_isolated_pixel(self):
        m = np.zeros((5, 5), bool)
        m[2, 2] = True
        assert np.array_equal(raster.extract_contour(m), m)

    def test_filled_block(self):
        m = np.zeros((8, 8), bool)
        m[2:6, 2:6] = True
        c = raster.extract_contour(m)
        assert c.sum() == 12
        assert not c[3:5, 3:5].any()

    def test_matches_definition(self, rng):
        m = random_mask(rng, 11, 13)
        assert np.array_equal(raster.extract_contour(m), naive_contour(m))

    def test_subset_and_neighbor_property(self, rng):
        m = random_mask(rng, 9, 9)
        c = raster.extract_contour(m)
        assert not (c & ~m).any()
        padded = np.pad(m, 1, constant_values=False)
        for y, x in np.argwhere(c):
            neighbors = [
                padded[y, x + 1], padded[y + 2, x + 1],
                padded[y + 1, x], padded[y + 1, x + 2],
            ]
            assert not all(neighbors)


class TestSkeletonize:
    def test_empty(self):
        m = np.zeros((4, 4), bool)
        assert not raster.skeletonize(m).any()

    def test_thin_line_unchanged(self):
        m = np.zeros((5, 9), bool)
        m[2, 1:8] = True
        assert np.array_equal(raster.skeletonize(m), m)

    def test_solid_bar(self):
        m = np.zeros((9, 24), bool)
        m[2:7, 2:22] = True
        sk = raster.skeletonize(m)
        assert not (sk & ~m).any()
        # width 1: no 2x2 block fully set
        quad = sk[:-1, :-1] & sk[1:, :-1] & sk[:-1, 1:] & sk[1:, 1:]
        assert not quad.any()
        _, counts = raster.connected_components(sk)
        assert len(counts) == 1

    def test_idempotent(self, rng):
        for _ in range(10):
            m = random_mask(rng, 14, 14, p=0.55)
            sk = raster.skeletonize(m)
            assert np.array_equal(raster.skeletonize(sk), sk)
            assert not (sk & ~m).any()

    def test_component_count_preserved(self, rng):
        for _ in range(10):
            m = random_mask(rng, 16, 16, p=0.5)
            _, before = raster.connected_components(m)
            _, after = raster.connected_components(raster.skeletonize(m))
            assert len(before) == len(after)

    def test_small_blob_survives(self):
        m = np.zeros((6, 6), bool)
        m[2:4, 2:4] = True
        sk = raster.skeletonize(m)
        assert sk.sum() == 1
        assert not (sk & ~m).any()


class TestDetectEdges:
    def test_constant_no_edges(self):
        assert not raster.detect_edges(np.full((10, 10), 77, np.uint8)).any()

    def test_vertical_step(self):
        img = np.zeros((12, 16), np.uint8)
        img[:, 8:] = 255
        e = raster.detect_edges(img)
        assert np.all(e.sum(axis=1) == 1)  # one edge pixel per row
        cols = np.unique(np.nonzero(e)[1])
        assert len(cols) == 1 and 6 <= cols[0] <= 9

    def test_disk_gives_closed_ring(self):
        yy, xx = np.mgrid[0:40, 0:40]
        disk = (yy - 20) ** 2 + (xx - 20) ** 2 <= 100
        img = np.where(disk, 30, 220).astype(np.uint8)
        e = raster.detect_edges(img)
        _, counts = raster.connected_components(e)
        assert len(counts) == 1
        # 4-connected flood from the border over non-edge pixels must not
        # reach the disk center: the ring is closed
        h, w = e.shape
        reach = np.zeros((h, w), bool)
        stack = [(y, x) for y in range(h) for x in (0, w - 1) if not e[y, x]]
        stack += [(y, x) for x in range(w) for y in (0, h - 1) if not e[y, x]]
        for y, x in stack:
            reach[y, x] = True
        while stack:
            y, x = stack.pop()
            for dy, dx in ((-1, 0), (1, 0), (0, -1), (0, 1)):
                yy2, xx2 = y + dy, x + dx
                if 0 <= yy2 < h and 0 <= xx2 < w and not reach[yy2, xx2] and not e[yy2, xx2]:
                    reach[yy2, xx2] = True
                    stack.append((yy2, xx2))
        assert not reach[20, 20]

    def test_bad_thresholds(self):
        with pytest.raises(ValueError):
            raster.detect_edges(np.zeros((5, 5), np.uint8), low=50, high=10)


class TestConnectedComponents:
    def test_empty(self):
        labels, counts = raster.connected_components(np.zeros((4, 4), bool))
        assert len(counts) == 0 and not labels.any()

    def test_two_pixels(self):
        m = np.zeros((5, 5), bool)
        m[0, 0] = m[4, 4] = True
        labels, counts = raster.connected_components(m)
        assert counts.tolist() == [1, 1]
        assert labels[0, 0] == 1 and labels[4, 4] == 2

    def test_diagonal_is_connected(self):
        m = np.eye(5, dtype=bool)
        _, counts = raster.connected_components(m)
        assert counts.tolist() == [5]

    def test_label_order_is_raster(self):
        m = np.zeros((5, 7), bool)
        m[3, 1] = True      # later row, leftmost column
        m[0, 5] = True      # first row
        m[2, 3] = True
        labels, _ = raster.connected_components(m)
        assert labels[0, 5] == 1 and labels[2, 3] == 2 and labels[3, 1] == 3

    def test_matches_flood_fill(self, rng):
        for _ in range(15):
            m = random_mask(rng, 12, 12, p=float(rng.uniform(0.2, 0.8)))
            _, counts = raster.connected_components(m)
            assert len(counts) == flood_fill_component_count(m)
            assert counts.sum() == m.sum()

    def test_adversarial_patterns(self, rng):
        # checkerboard: every pixel 8-touches its diagonal neighbors
        checker = np.indices((16, 16)).sum(axis=0) % 2 == 0
        _, counts = raster.connected_components(checker)
        assert len(counts) == flood_fill_component_count(checker)
        # comb: vertical teeth joined by a spine, a run overlapping many
        comb = np.zeros((10, 21), bool)
        comb[0, :] = True
        for x in range(0, 21, 2):
            comb[:, x] = True
        _, counts = raster.connected_components(comb)
        assert len(counts) == 1
        # spiral
        spiral = np.zeros((15, 15), bool)
        spiral[0, :] = spiral[:, -1] = spiral[-1, :] = True
        spiral[2:, 0] = True
        spiral[2, 2:-2] = True
        _, counts = raster.connected_components(spiral)
        assert len(counts) == flood_fill_component_count(spiral)
        # wide masks against the oracle
        for _ in range(5):
            m = random_mask(rng, 6, 40, p=0.6)
            _, counts = raster.connected_components(m)
            assert len(counts) == flood_fill_component_count(m)

    def test_counts_match_labels(self, rng):
        m = random_mask(rng, 20, 20)
        labels, counts = raster.connected_components(m)
        for k, c in enumerate(counts, start=1):
            assert (labels == k).sum() == c


class TestDegenerateShapes:
    """Single-row, single-column and single-pixel inputs must not crash."""

    def test_one_pixel_image(self):
        img = np.array([[128]], np.uint8)
        assert raster.histogram(img)[128] == 1
        mean, std = raster.local_stats(img, 3)
        assert mean[0, 0] == 128.0 and std[0, 0] == 0.0
        assert not raster.detect_edges(img).any()
        seed = np.array([[True]])
        assert raster.distance_transform(seed)[0, 0] == 0.0
        assert raster.skeletonize(seed)[0, 0]
        assert raster.extract_contour(seed)[0, 0]

    def test_single_row(self, rng):
        img = random_gray(rng, 1, 9)
        raster.local_stats(img, 3)
        raster.detect_edges(img)
        seed = np.zeros((1, 9), bool)
        seed[0, 4] = True
        d2 = raster.distance_transform_squared(seed)
        assert d2[0, 0] == 16 and d2[0, 8] == 16

    def test_single_column(self, rng):
        seed = np.zeros((7, 1), bool)
        seed[3, 0] = True
        d2 = raster.distance_transform_squared(seed)
        assert d2[0, 0] == 9 and d2[6, 0] == 9
        mask = np.ones((7, 1), bool)
        labels, counts = raster.connected_components(mask)
        assert counts.tolist() == [7]


class TestRemoveSmallComponents:
    def test_removes_small_keeps_large(self):
        m = np.zeros((8, 8), bool)
        m[0, 0] = True            # size 1
        m[4:6, 4:7] = True        # size 6
        out = raster.remove_small_components(m, 6)
        assert not out[0, 0]
        assert out[4:6, 4:7].all()
