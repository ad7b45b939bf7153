"""Regenerate the golden fixtures used by the unit tests.

The signal and phantom are evaluated from their defining formulas with
numpy; SSIM reference values come from scikit-image.
"""
import numpy as np
from pathlib import Path
from skimage.metrics import structural_similarity

HERE = Path(__file__).resolve().parent

BREAKS = [0.1, 0.25, 0.4, 0.6, 0.75, 0.9]
LEVELS = [0.0, 1.0, -0.5, 2.0, 0.5, 0.0]

ELLIPSES = [
    (1.0, 0.69, 0.92, 0.0, 0.0, 0.0),
    (-0.8, 0.6624, 0.8740, 0.0, -0.0184, 0.0),
    (-0.2, 0.1100, 0.3100, 0.22, 0.0, -18.0),
    (-0.2, 0.1600, 0.4100, -0.22, 0.0, 18.0),
    (0.1, 0.2100, 0.2500, 0.0, 0.35, 0.0),
    (0.1, 0.0460, 0.0460, 0.0, 0.1, 0.0),
    (0.1, 0.0460, 0.0460, 0.0, -0.1, 0.0),
    (0.1, 0.0460, 0.0230, -0.08, -0.605, 0.0),
    (0.1, 0.0230, 0.0230, 0.0, -0.606, 0.0),
    (0.1, 0.0230, 0.0460, 0.06, -0.605, 0.0),
]


def signal(n):
    t = np.arange(n) / n
    seg = np.searchsorted(BREAKS, t, side="right")
    return np.asarray(LEVELS)[np.minimum(seg, len(LEVELS) - 1)]


def phantom(n):
    centers = -1.0 + (2.0 * np.arange(n) + 1.0) / n
    x = centers[None, :]
    y = -centers[:, None]
    img = np.zeros((n, n))
    for val, a, b, x0, y0, deg in ELLIPSES:
        phi = np.deg2rad(deg)
        dx, dy = x - x0, y - y0
        u = dx * np.cos(phi) + dy * np.sin(phi)
        v = -dx * np.sin(phi) + dy * np.cos(phi)
        img += val * ((u / a) ** 2 + (v / b) ** 2 <= 1.0)
    return img


def ssim_ref(x, y):
    return structural_similarity(
        x, y, gaussian_weights=True, sigma=1.5, use_sample_covariance=False,
        data_range=y.max() - y.min())


def main():
    np.savetxt(HERE / "signal_1000.csv", signal(1000), fmt="%.17g")
    np.savetxt(HERE / "shepp_logan_64.csv", phantom(64), fmt="%.17g", delimiter=",")

    rng = np.random.default_rng(20240611)
    rows = []
    for case in range(4):
        shape = (24, 31) if case < 2 else (40, 40)
        ref = rng.standard_normal(shape).cumsum(axis=0).cumsum(axis=1)
        x = ref + (0.5 + case) * rng.standard_normal(shape)
        np.savetxt(HERE / f"ssim_case{case}_x.csv", x, fmt="%.17g", delimiter=",")
        np.savetxt(HERE / f"ssim_case{case}_ref.csv", ref, fmt="%.17g", delimiter=",")
        rows.append((case, shape[0], shape[1], ssim_ref(x, ref)))
    with open(HERE / "ssim_cases.csv", "w") as f:
        f.write("case,rows,cols,ssim\n")
        for case, r, c, s in rows:
            f.write(f"{case},{r},{c},{s:.17g}\n")


if __name__ == "__main__":
    main()
