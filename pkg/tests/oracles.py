"""Independent reference implementations used to verify the package.

Everything here is deliberately written with plain Python loops and no
scipy/package imports, so a bug in the implementation under test cannot
hide in a shared dependency.
"""

from __future__ import annotations

import math
from collections import deque

NEIGHBORS8 = ((-1, -1), (0, -1), (1, -1), (-1, 0), (1, 0), (-1, 1), (0, 1), (1, 1))


def flood_components(mask) -> list[set[tuple[int, int]]]:
    """Eight-connected components by BFS, ordered by first pixel in raster scan.

    mask is any 2-D indexable of 0/1 values; returns sets of (x, y) pixels.
    """
    h = len(mask)
    w = len(mask[0])
    seen = [[False] * w for _ in range(h)]
    components: list[set[tuple[int, int]]] = []
    for y in range(h):
        for x in range(w):
            if not mask[y][x] or seen[y][x]:
                continue
            comp: set[tuple[int, int]] = set()
            queue = deque([(x, y)])
            seen[y][x] = True
            while queue:
                cx, cy = queue.popleft()
                comp.add((cx, cy))
                for dx, dy in NEIGHBORS8:
                    nx, ny = cx + dx, cy + dy
                    if 0 <= nx < w and 0 <= ny < h and mask[ny][nx] and not seen[ny][nx]:
                        seen[ny][nx] = True
                        queue.append((nx, ny))
            components.append(comp)
    return components


def component_centroid(pixels) -> tuple[float, float]:
    xs = [p[0] for p in pixels]
    ys = [p[1] for p in pixels]
    return sum(xs) / len(xs), sum(ys) / len(ys)


def component_bbox(pixels) -> tuple[int, int, int, int]:
    xs = [p[0] for p in pixels]
    ys = [p[1] for p in pixels]
    return min(xs), min(ys), max(xs), max(ys)


def nearest_pixel(pixels, cx: float, cy: float) -> tuple[int, int]:
    """Exhaustive nearest-in-component scan; ties by (distance^2, y, x)."""
    best = None
    best_key = None
    for (x, y) in pixels:
        key = ((x - cx) ** 2 + (y - cy) ** 2, y, x)
        if best_key is None or key < best_key:
            best_key = key
            best = (x, y)
    return best


def gaussian_value(dx: float, dy: float, sigma: float, radius: float) -> float:
    d2 = dx * dx + dy * dy
    if d2 > radius * radius:
        return 0.0
    return math.exp(-d2 / (2.0 * sigma * sigma))


def sobel_magnitude(image) -> list[list[float]]:
    """3x3 Sobel gradient magnitude with replicate borders, max-normalized.

    image is a 2-D indexable of floats; returns nested lists.
    """
    h = len(image)
    w = len(image[0])

    def px(x: int, y: int) -> float:
        x = min(max(x, 0), w - 1)
        y = min(max(y, 0), h - 1)
        return image[y][x]

    kx = ((-1, 0, 1), (-2, 0, 2), (-1, 0, 1))
    ky = ((-1, -2, -1), (0, 0, 0), (1, 2, 1))
    mag = [[0.0] * w for _ in range(h)]
    peak = 0.0
    for y in range(h):
        for x in range(w):
            gx = 0.0
            gy = 0.0
            for j in range(3):
                for i in range(3):
                    v = px(x + i - 1, y + j - 1)
                    gx += kx[j][i] * v
                    gy += ky[j][i] * v
            m = math.sqrt(gx * gx + gy * gy)
            mag[y][x] = m
            peak = max(peak, m)
    if peak > 0:
        for y in range(h):
            for x in range(w):
                mag[y][x] /= peak
    return mag


def bbm_kept(components, prompts) -> list[int]:
    """Brute-force replay of bounding-box matching.

    components: list of pixel sets in label order (index i = label i+1).
    prompts: list of (x, y). Returns kept component indices (0-based).
    """
    boxes = [component_bbox(c) for c in components]
    claimed: set[int] = set()
    kept: list[int] = []
    for (px_, py_) in prompts:
        for idx, (x1, y1, x2, y2) in enumerate(boxes):
            if idx in claimed:
                continue
            if x1 <= px_ <= x2 and y1 <= py_ <= y2:
                claimed.add(idx)
                kept.append(idx)
                break
    return kept


def greedy_target_matching(pred_components, gt_components, deviation: float):
    """Brute-force one-to-one centroid matching.

    Components are pixel sets in label order. Pairs within the deviation are
    claimed in ascending (distance, gt index, pred index) order. Returns
    (pred index, gt index, distance) triples.
    """
    pairs = []
    for gi, g in enumerate(gt_components):
        gx, gy = component_centroid(g)
        for pi, p in enumerate(pred_components):
            px_, py_ = component_centroid(p)
            d = math.hypot(px_ - gx, py_ - gy)
            if d <= deviation:
                pairs.append((d, gi, pi))
    pairs.sort()
    used_g: set[int] = set()
    used_p: set[int] = set()
    matched = []
    for d, gi, pi in pairs:
        if gi in used_g or pi in used_p:
            continue
        used_g.add(gi)
        used_p.add(pi)
        matched.append((pi, gi, d))
    return matched


def brute_metrics(pred, gt, deviation: float = 3.0) -> dict:
    """All metric counts by direct pixel loops and BFS components."""
    h = len(pred)
    w = len(pred[0])
    inter = union = false_px = 0
    for y in range(h):
        for x in range(w):
            p, g = bool(pred[y][x]), bool(gt[y][x])
            inter += p and g
            union += p or g
            false_px += p and not g
    pred_comps = flood_components(pred)
    gt_comps = flood_components(gt)
    matched = greedy_target_matching(pred_comps, gt_comps, deviation)
    n_all = len(gt_comps)
    detected = len(matched)
    t_false = len(pred_comps) - detected
    return {
        "intersection": inter,
        "union": union,
        "n_all": n_all,
        "detected": detected,
        "t_false": t_false,
        "false_px": false_px,
        "total_px": w * h,
        "iou": 1.0 if union == 0 else inter / union,
        "pd": 1.0 if n_all == 0 else detected / n_all,
        "fa": false_px / (w * h),
        "fat": t_false / n_all if n_all > 0 else 0.0,
    }


def reference_saliency_oracle(data, prompts, window=8, k=0.5, max_radius=16):
    """Local-contrast segmentation replayed with plain loops.

    data is a 2-D list/array of floats in [0, 1]; prompts is a list of
    (x, y). Returns an h x w list-of-lists saliency map.
    """
    h = len(data)
    w = len(data[0])
    out = [[0.0] * w for _ in range(h)]
    for (px, py) in prompts:
        # snap to the brightest 5x5 pixel, first in row-major order on ties
        sx, sy, peak = px, py, None
        for y in range(max(0, py - 2), min(h - 1, py + 2) + 1):
            for x in range(max(0, px - 2), min(w - 1, px + 2) + 1):
                v = float(data[y][x])
                if peak is None or v > peak:
                    sx, sy, peak = x, y, v
        # mean over the Chebyshev ring window .. window+2
        ring = []
        for y in range(max(0, sy - window - 2), min(h - 1, sy + window + 2) + 1):
            for x in range(max(0, sx - window - 2), min(w - 1, sx + window + 2) + 1):
                cheb = max(abs(x - sx), abs(y - sy))
                if window <= cheb <= window + 2:
                    ring.append(float(data[y][x]))
        if not ring:
            continue
        mu = math.fsum(ring) / len(ring)
        if peak <= mu:
            continue
        threshold = mu + k * (peak - mu)
        # BFS growth over pixels >= threshold, capped at Chebyshev max_radius
        region = set()
        queue = deque([(sx, sy)])
        region.add((sx, sy))
        while queue:
            cx, cy = queue.popleft()
            for dx, dy in NEIGHBORS8:
                nx, ny = cx + dx, cy + dy
                if not (0 <= nx < w and 0 <= ny < h) or (nx, ny) in region:
                    continue
                if max(abs(nx - sx), abs(ny - sy)) > max_radius:
                    continue
                if float(data[ny][nx]) >= threshold:
                    region.add((nx, ny))
                    queue.append((nx, ny))
        for (x, y) in region:
            value = (float(data[y][x]) - mu) / (peak - mu)
            out[y][x] = max(out[y][x], min(1.0, max(0.0, value)))
    return out
