"""Independent reference implementations used only by the tests."""

import numpy as np
from numba import njit


@njit(cache=True)
def _project(z, y, C):
    # Euclidean projection onto {0 <= a <= C, y.a = 0}; y.clip(z - lam*y) is non-increasing in lam
    lo = -np.abs(z).max() - C - 1.0
    hi = -lo
    a = np.empty_like(z)
    for _ in range(200):
        lam = 0.5 * (lo + hi)
        s = 0.0
        for i in range(z.size):
            v = z[i] - lam * y[i]
            v = min(max(v, 0.0), C)
            a[i] = v
            s += y[i] * v
        if s > 0:
            lo = lam
        else:
            hi = lam
        if hi - lo < 1e-16:
            break
    lam = 0.5 * (lo + hi)
    for i in range(z.size):
        a[i] = min(max(z[i] - lam * y[i], 0.0), C)
    return a


@njit(cache=True)
def _pg(Q, y, C, step, iterations, tol):
    n = y.size
    a = np.zeros(n)
    for it in range(iterations):
        grad = Q @ a - 1.0
        nxt = _project(a - step * grad, y, C)
        diff = np.abs(nxt - a).max()
        a = nxt
        if diff < tol:
            break
    return a, it + 1


def projected_gradient_dual(K, y, C, iterations=1_000_000, tol=1e-15):
    """Maximise the SVM dual by projected gradient ascent; returns (alpha, objective, iterations)."""
    y = np.asarray(y, dtype=np.float64)
    Q = (y[:, None] * y[None, :]) * np.asarray(K, dtype=np.float64)
    L = max(np.linalg.eigvalsh(Q).max(), 1e-12)
    alpha, used = _pg(Q, y, float(C), 1.0 / L, iterations, tol)
    obj = alpha.sum() - 0.5 * alpha @ Q @ alpha
    return alpha, float(obj), int(used)


def naive_lbp_top_counts(volume, grid, cfg):
    """Triple loop over every interior centre using the per-pixel code definition."""
    from mer.descriptors.lbp_top import PLANES, lbp_code

    n_t, h, w = volume.shape
    counts = np.zeros((grid.n_cells, 3, cfg.bins_per_plane), dtype=np.int64)
    for t in range(cfg.radius_t, n_t - cfg.radius_t):
        for y in range(cfg.radius_y, h - cfg.radius_y):
            for x in range(cfg.radius_x, w - cfg.radius_x):
                block = grid.cell_of(x, y)
                for p, plane in enumerate(PLANES):
                    counts[block, p, lbp_code(volume, (x, y, t), plane, cfg)] += 1
    return counts


def naive_hog3d(volume, grid, cfg):
    """Per-pixel loop; gradients by explicit central differences on the interior."""
    vol = np.asarray(volume, dtype=np.float64)
    n_t, h, w = vol.shape
    hists = [np.zeros((grid.n_cells, b)) for b in cfg.segments]
    for t in range(1, n_t - 1):
        for y in range(1, h - 1):
            for x in range(1, w - 1):
                gx = (vol[t, y, x + 1] - vol[t, y, x - 1]) / 2
                gy = (vol[t, y + 1, x] - vol[t, y - 1, x]) / 2
                gt = (vol[t + 1, y, x] - vol[t - 1, y, x]) / 2
                block = grid.cell_of(x, y)
                for hist, (num, den), bins in zip(hists, ((gy, gx), (gt, gx), (gt, gy)), cfg.segments):
                    m = np.hypot(num, den)
                    if m == 0:
                        continue
                    theta = np.arctan2(num, den) % (2 * np.pi)
                    hist[block, int(theta // (2 * np.pi / bins)) % bins] += m
    return hists


@njit(cache=True)
def _lbp_loop(vol, labels, rx, ry, rt, n_cells):
    n_t, h, w = vol.shape
    counts = np.zeros((n_cells, 3, 16), dtype=np.int64)
    for t in range(rt, n_t - rt):
        for y in range(ry, h - ry):
            for x in range(rx, w - rx):
                c = vol[t, y, x]
                b = labels[y, x]
                xy = ((vol[t, y, x + rx] >= c) * 1 + (vol[t, y - ry, x] >= c) * 2
                      + (vol[t, y, x - rx] >= c) * 4 + (vol[t, y + ry, x] >= c) * 8)
                xt = ((vol[t, y, x + rx] >= c) * 1 + (vol[t + rt, y, x] >= c) * 2
                      + (vol[t, y, x - rx] >= c) * 4 + (vol[t - rt, y, x] >= c) * 8)
                yt = ((vol[t, y + ry, x] >= c) * 1 + (vol[t + rt, y, x] >= c) * 2
                      + (vol[t, y - ry, x] >= c) * 4 + (vol[t - rt, y, x] >= c) * 8)
                counts[b, 0, xy] += 1
                counts[b, 1, xt] += 1
                counts[b, 2, yt] += 1
    return counts


def naive_lbp_top_counts_fast(volume, grid, cfg):
    """Compiled direct-definition loop with hand-written comparisons, for large volumes."""
    labels = np.empty((grid.height, grid.width), dtype=np.int64)
    for y in range(grid.height):
        for x in range(grid.width):
            labels[y, x] = grid.cell_of(x, y)
    return _lbp_loop(np.asarray(volume, dtype=np.int64), labels, cfg.radius_x, cfg.radius_y, cfg.radius_t,
                     grid.n_cells)


def random_svm_dataset(rng, trial):
    """2-D dataset with 4..20 points; even trials separable with a margin, odd trials noisy."""
    n = int(rng.integers(4, 21))
    X = rng.normal(size=(n, 2))
    if trial % 2 == 0:
        y = np.where(X[:, 0] + 0.5 * X[:, 1] > 0, 1, -1)
        X += y[:, None] * 0.3
    else:
        y = np.where(X[:, 0] + rng.normal(scale=1.0, size=n) > 0, 1, -1)
    if len(set(y.tolist())) < 2:
        y[0] = -y[0]
    return X, y
