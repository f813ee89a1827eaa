"""Color adaptation with sliced partial transport.

Pipeline: summarise each image by a k-means palette, transport the source
palette toward the target palette slice by slice, then shift every source
pixel by the displacement of its palette entry.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .core import CostSpec, ValidationError
from .sliced import sample_directions, sopt_slice_displacement


@dataclass(frozen=True)
class Image:
    """RGB image with channels in ``[0, 1]``; ``pixels`` has shape ``(h, w, 3)``."""

    pixels: np.ndarray

    def __post_init__(self):
        px = np.asarray(self.pixels, dtype=float)
        if px.ndim != 3 or px.shape[2] != 3:
            raise ValidationError("pixels must have shape (h, w, 3)")
        if px.size and (px.min() < 0.0 or px.max() > 1.0):
            raise ValidationError("pixel channels must lie in [0, 1]")
        object.__setattr__(self, "pixels", px)

    @property
    def height(self) -> int:
        return self.pixels.shape[0]

    @property
    def width(self) -> int:
        return self.pixels.shape[1]

    def flat(self) -> np.ndarray:
        return self.pixels.reshape(-1, 3)

    @classmethod
    def from_uint8(cls, rgb8) -> "Image":
        return cls(np.asarray(rgb8, dtype=np.uint8) / 255.0)

    def to_uint8(self) -> np.ndarray:
        return np.rint(self.pixels * 255.0).astype(np.uint8)


@dataclass(frozen=True)
class Palette:
    centroids: np.ndarray
    assignment: np.ndarray
    sse: list = field(default_factory=list)

    @property
    def k(self) -> int:
        return self.centroids.shape[0]


def _nearest(points, centroids, chunk=4096):
    labels = np.empty(points.shape[0], dtype=np.int64)
    dists = np.empty(points.shape[0])
    cn = (centroids * centroids).sum(axis=1)
    for s in range(0, points.shape[0], chunk):
        P = points[s:s + chunk]
        D = (P * P).sum(axis=1)[:, None] - 2.0 * P @ centroids.T + cn[None, :]
        lab = D.argmin(axis=1)
        labels[s:s + chunk] = lab
        dists[s:s + chunk] = np.maximum(D[np.arange(P.shape[0]), lab], 0.0)
    return labels, dists


def kmeans_palette(img: Image, k: int, seed: int, iters: int = 20) -> Palette:
    """Lloyd's k-means on the pixel colors.

    Centroids start at ``k`` distinct colors drawn at random from the image
    (repeats only if the image has fewer than ``k`` distinct colors). An
    empty cluster keeps its previous centroid. ``sse`` records the
    within-cluster sum of squares after every assignment step.
    """
    P = img.flat()
    if k < 1:
        raise ValidationError("k must be >= 1")
    if k > P.shape[0]:
        raise ValidationError(f"k={k} exceeds the pixel count {P.shape[0]}")
    rng = np.random.default_rng(seed)
    colors = np.unique(P, axis=0)
    if colors.shape[0] >= k:
        C = colors[rng.choice(colors.shape[0], size=k, replace=False)].copy()
    else:
        extra = rng.choice(colors.shape[0], size=k - colors.shape[0], replace=True)
        C = np.vstack([colors, colors[extra]])

    sse = []
    labels, d = _nearest(P, C)
    sse.append(float(d.sum()))
    for _ in range(iters):
        counts = np.bincount(labels, minlength=k)
        sums = np.zeros_like(C)
        np.add.at(sums, labels, P)
        nonempty = counts > 0
        C_new = C.copy()
        C_new[nonempty] = sums[nonempty] / counts[nonempty, None]
        new_labels, d = _nearest(P, C_new)
        C = C_new
        sse.append(float(d.sum()))
        if np.array_equal(new_labels, labels):
            labels = new_labels
            break
        labels = new_labels
    return Palette(np.clip(C, 0.0, 1.0), labels, sse)


def transfer_palette(src: Palette, tgt: Palette, lam: float, N: int, seed: int,
                     cost: CostSpec | None = None, return_counts: bool = False):
    """Move source centroids toward the target palette over ``N`` slices.

    On each slice only the centroids matched by the 1-D partial plan move;
    the result is clamped to the unit cube once at the end.
    """
    cost = cost or CostSpec()
    X = np.array(src.centroids, dtype=float)
    Y = np.asarray(tgt.centroids, dtype=float)
    if X.shape[1] != 3 or Y.shape[1] != 3:
        raise ValidationError("palettes must live in RGB space")
    thetas = sample_directions(3, N, seed).directions
    counts = np.empty(N, dtype=np.int64)
    for l, theta in enumerate(thetas):
        disp, dom = sopt_slice_displacement(X, Y, theta, lam, cost)
        X += disp
        counts[l] = len(dom)
    X = np.clip(X, 0.0, 1.0)
    if return_counts:
        return X, counts
    return X


def reconstruct(img: Image, src: Palette, transported) -> Image:
    """Shift each pixel by its centroid's displacement, then clamp to ``[0, 1]``."""
    transported = np.asarray(transported, dtype=float)
    if transported.shape != src.centroids.shape:
        raise ValidationError("transported centroids do not match the palette")
    if src.assignment.size != img.height * img.width:
        raise ValidationError("palette was not fitted on this image")
    shift = (transported - src.centroids)[src.assignment]
    out = np.clip(img.flat() + shift, 0.0, 1.0)
    return Image(out.reshape(img.pixels.shape))


def color_adapt(source: Image, target: Image, lam: float, k: int = 500,
                k_target: int | None = None, N: int = 400, seed: int = 0,
                iters: int = 20) -> Image:
    """Full pipeline: palettes, sliced partial transport, reconstruction."""
    k_target = k_target or k
    ps = kmeans_palette(source, min(k, source.height * source.width), seed, iters)
    pt = kmeans_palette(target, min(k_target, target.height * target.width), seed, iters)
    moved = transfer_palette(ps, pt, lam, N, seed)
    return reconstruct(source, ps, moved)
