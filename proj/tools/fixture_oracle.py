"""Reference values for the metric and degradation tests, computed with numpy/scipy/skimage.

Writes tests/fixtures/ssim_a.png, ssim_b.png and oracle.txt.
"""
import math
from pathlib import Path

import numpy as np
from PIL import Image
from scipy import ndimage
from skimage.metrics import structural_similarity

FIX = Path(__file__).resolve().parent.parent / "tests" / "fixtures"


def load(p):
    return np.asarray(Image.open(p).convert("RGB"), dtype=np.float64) / 255.0


def luma(img):
    return 0.299 * img[..., 0] + 0.587 * img[..., 1] + 0.114 * img[..., 2]


def psnr(a, b):
    return 10.0 * math.log10(1.0 / np.mean((a - b) ** 2))


def degrade_default(img):
    out = np.clip(img * np.array([0.8, 1.1, 0.8]), 0.0, 1.0)
    sigma = 1.5
    radius = math.ceil(3 * sigma)
    # scipy's "mirror" is reflection about the edge sample
    out = np.stack([ndimage.gaussian_filter(out[..., c], sigma, mode="mirror", truncate=radius / sigma)
                    for c in range(3)], axis=-1)
    return 0.7 * out + 0.3 * 0.9


def main():
    clean = load(FIX / "aerial_256.png")
    rng = np.random.default_rng(41)
    a = clean[20:68, 30:70]
    b = np.clip(a + rng.normal(0, 0.08, a.shape), 0, 1)
    Image.fromarray(np.round(a * 255).astype(np.uint8)).save(FIX / "ssim_a.png")
    Image.fromarray(np.round(b * 255).astype(np.uint8)).save(FIX / "ssim_b.png")
    a, b = load(FIX / "ssim_a.png"), load(FIX / "ssim_b.png")
    ssim = structural_similarity(luma(a), luma(b), data_range=1.0, gaussian_weights=True, sigma=1.5,
                                 use_sample_covariance=False, K1=0.01, K2=0.03)

    gt = clean[16:256, 16:256]
    dist = degrade_default(gt)

    lines = [
        f"ssim_pair_ssim {float(ssim)!r}",
        f"ssim_pair_psnr {psnr(a, b)!r}",
        f"default_spec_offset16_psnr {psnr(dist, gt)!r}",
    ]
    (FIX / "oracle.txt").write_text("\n".join(lines) + "\n")
    print("\n".join(lines))


if __name__ == "__main__":
    main()
