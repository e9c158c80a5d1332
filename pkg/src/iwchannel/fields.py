"""Field post-processing: raster export and beam-slope estimation."""

from __future__ import annotations

import numpy as np
from scipy import ndimage

__all__ = ["write_ppm", "beam_slope", "orientation_field"]


def _diverging_rgb(v):
    """Map values in [-1, 1] to a blue-white-red ramp, uint8 per channel."""
    v = np.clip(v, -1.0, 1.0)
    r = np.where(v >= 0, 1.0, 1.0 + v)
    g = 1.0 - np.abs(v)
    b = np.where(v <= 0, 1.0, 1.0 - v)
    return (np.stack([r, g, b], axis=-1) * 255).astype(np.uint8)


def write_ppm(path, field, vmax=None):
    """Write a real 2D field as a binary PPM image.

    ``field`` is indexed (row, column) top to bottom; values are scaled by
    ``vmax`` (default: max absolute value) and rendered blue-white-red.
    """
    field = np.asarray(field, dtype=float)
    if field.ndim != 2:
        raise ValueError("field must be 2D")
    if vmax is None:
        vmax = np.max(np.abs(field)) or 1.0
    rgb = _diverging_rgb(field / vmax)
    h, w = field.shape
    with open(path, "wb") as fh:
        fh.write(f"P6\n{w} {h}\n255\n".encode())
        fh.write(rgb.tobytes())
    return path


def orientation_field(field, dx1, dx2, window: float = 2.0):
    """Structure-tensor orientation of a real field on a uniform grid.

    ``field`` is indexed (i1, i2) with spacings dx1, dx2.  Returns
    (slope, coherence): slope[i, j] is dx2/dx1 along the local level sets
    (the beam direction) and coherence in [0, 1] measures how anisotropic
    the window is; both arrays match the field shape.  ``window`` is the
    smoothing radius in units of the *larger* of the two spacings.
    """
    f = np.asarray(field, dtype=float)
    g1, g2 = np.gradient(f, dx1, dx2)
    sig = window * max(dx1, dx2)
    s1, s2 = sig / dx1, sig / dx2
    J11 = ndimage.gaussian_filter(g1 * g1, (s1, s2))
    J12 = ndimage.gaussian_filter(g1 * g2, (s1, s2))
    J22 = ndimage.gaussian_filter(g2 * g2, (s1, s2))
    tr = J11 + J22
    disc = np.sqrt((J11 - J22) ** 2 + 4.0 * J12 ** 2)
    coherence = np.where(tr > 0, disc / np.maximum(tr, 1e-300), 0.0)
    # dominant eigenvector (n1, n2) of J is the gradient direction; level
    # sets run along (-n2, n1), giving slope dx2/dx1 = -n1/n2.
    lam = 0.5 * (tr + disc)
    n1 = np.where(np.abs(J12) > 1e-300, J12, 0.0)
    n2 = lam - J11
    # fall back to the axis-aligned case when J is (near) diagonal
    diag = np.abs(J12) <= 1e-12 * np.maximum(tr, 1e-300)
    n1 = np.where(diag, np.where(J11 >= J22, 1.0, 0.0), n1)
    n2 = np.where(diag, np.where(J11 >= J22, 0.0, 1.0), n2)
    with np.errstate(divide="ignore", invalid="ignore"):
        slope = -n1 / n2
    return slope, coherence


def beam_slope(field, dx1, dx2, window: float = 2.0,
               coherence_min: float = 0.9, amp_quantile: float = 0.5):
    """Estimate the dominant |slope| of beam-like stripes in a real field.

    Keeps pixels whose structure tensor is strongly anisotropic
    (coherence above ``coherence_min``) and whose local energy is above the
    ``amp_quantile`` quantile, then returns the median |slope| there.
    """
    f = np.asarray(field, dtype=float)
    slope, coh = orientation_field(f, dx1, dx2, window)
    sig = window * max(dx1, dx2)
    energy = ndimage.gaussian_filter(f * f, (sig / dx1, sig / dx2))
    keep = (coh > coherence_min) & (energy > np.quantile(energy, amp_quantile))
    keep &= np.isfinite(slope)
    if not keep.any():
        raise ValueError("no coherent beam pixels found")
    return float(np.median(np.abs(slope[keep])))
