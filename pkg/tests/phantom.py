"""Synthetic chest-radiograph phantom used as a repository test fixture.

Regenerate the committed fixture with:  python tests/phantom.py
"""

import numpy as np


def make_phantom(n: int = 256, seed: int = 7) -> np.ndarray:
    """A deterministic lung-like test image in [0, 1].

    Torso ellipse, two darker lung fields, rib bands, a bright spine column
    and mild grain: enough oriented structure at several scales to light up
    all three phase feature maps.
    """
    rng = np.random.default_rng(seed)
    y, x = np.mgrid[0:n, 0:n] / (n - 1)
    img = 0.22 + 0.14 * y
    torso = (((x - 0.5) / 0.46) ** 2 + ((y - 0.52) / 0.48) ** 2) < 1.0
    img += 0.34 * torso
    for cx in (0.32, 0.68):
        lung = (((x - cx) / 0.155) ** 2 + ((y - 0.45) / 0.27) ** 2) < 1.0
        img -= 0.26 * lung
    img += torso * 0.05 * np.sin(2 * np.pi * (9.0 * y + 0.15 * np.sin(2 * np.pi * x)))
    img += 0.10 * np.exp(-(((x - 0.5) / 0.05) ** 2))
    img += rng.normal(0.0, 0.008, (n, n))
    return np.clip(img, 0.0, 1.0)


if __name__ == "__main__":
    from pathlib import Path

    from cxrphase.image_io import save_image

    out = Path(__file__).parent / "fixtures" / "cxr_sample.png"
    out.parent.mkdir(exist_ok=True)
    save_image(make_phantom(), out, bit_depth=16)
    print(f"wrote {out}")
