#!/usr/bin/env python3
"""Procedurally generate the 256x256 aerial-style test fixture (fields, roads, roofs, trees)."""
import argparse

import numpy as np
from PIL import Image


def generate(size: int, seed: int) -> np.ndarray:
    rng = np.random.default_rng(seed)
    yy, xx = np.mgrid[0:size, 0:size].astype(np.float64)

    # field patchwork: Voronoi cells with striped crop texture
    palette = np.array([
        [0.36, 0.47, 0.22], [0.52, 0.58, 0.30], [0.62, 0.53, 0.36], [0.45, 0.38, 0.26],
        [0.70, 0.66, 0.48], [0.30, 0.40, 0.20], [0.58, 0.62, 0.40], [0.50, 0.44, 0.33],
    ])
    n_cells = 22
    centers = rng.uniform(0, size, (n_cells, 2))
    d = (yy[..., None] - centers[:, 0]) ** 2 + (xx[..., None] - centers[:, 1]) ** 2
    cell = np.argmin(d, axis=-1)
    colors = palette[rng.integers(0, len(palette), n_cells)]
    angles = rng.uniform(0, np.pi, n_cells)
    periods = rng.uniform(3.0, 9.0, n_cells)
    img = colors[cell].copy()
    phase = (np.cos(angles[cell]) * xx + np.sin(angles[cell]) * yy) * 2 * np.pi / periods[cell]
    img *= (1.0 + 0.10 * np.sin(phase))[..., None]
    img *= (1.0 + 0.06 * rng.standard_normal((size, size)))[..., None]

    # field boundaries
    edge = np.zeros((size, size), bool)
    edge[1:, :] |= cell[1:, :] != cell[:-1, :]
    edge[:, 1:] |= cell[:, 1:] != cell[:, :-1]
    img[edge] = img[edge] * 0.75

    # roads
    for _ in range(3):
        p = rng.uniform(0, size, 2)
        theta = rng.uniform(0, np.pi)
        dist = np.abs((xx - p[1]) * np.sin(theta) - (yy - p[0]) * np.cos(theta))
        width = rng.uniform(2.0, 3.5)
        mask = dist < width
        img[mask] = np.array([0.68, 0.67, 0.64]) + 0.03 * rng.standard_normal((mask.sum(), 1))
        img[(dist >= width) & (dist < width + 1.0)] *= 0.6

    # buildings with cast shadows
    roof_colors = np.array([[0.62, 0.30, 0.22], [0.78, 0.78, 0.76], [0.45, 0.47, 0.50], [0.85, 0.72, 0.55]])
    for _ in range(40):
        h, w = rng.integers(6, 18, 2)
        y0, x0 = rng.integers(0, size - h - 3), rng.integers(0, size - w - 3)
        img[y0 + 3:y0 + h + 3, x0 + 3:x0 + w + 3] *= 0.45
        roof = roof_colors[rng.integers(0, len(roof_colors))]
        img[y0:y0 + h, x0:x0 + w] = roof
        # ridge line
        img[y0 + h // 2, x0:x0 + w] = roof * 0.8

    # tree clusters
    for _ in range(60):
        c = rng.uniform(0, size, 2)
        r = rng.uniform(2.0, 5.0)
        mask = (yy - c[0]) ** 2 + (xx - c[1]) ** 2 < r * r
        shade = 0.8 + 0.4 * np.clip(((c[0] - yy) + (c[1] - xx)) / (2 * r), -0.5, 0.5)
        img[mask] = np.array([0.16, 0.30, 0.12]) * shade[mask][:, None]

    return np.clip(img, 0.0, 1.0)


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("output")
    ap.add_argument("--size", type=int, default=256)
    ap.add_argument("--seed", type=int, default=2017)
    args = ap.parse_args()
    img = generate(args.size, args.seed)
    Image.fromarray(np.round(img * 255).astype(np.uint8), "RGB").save(args.output)


if __name__ == "__main__":
    main()
