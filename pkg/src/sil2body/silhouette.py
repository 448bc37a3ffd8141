"""Binary silhouettes, outer-border extraction and contour resampling.

Image conventions: a ``BinaryImage`` is indexed ``bits[row, col]`` with row 0
at the top. Boundaries and contour samples use y-up coordinates of pixel
centres, ``x = col + 0.5`` and ``y = height - row - 0.5``, so that
"anti-clockwise" means positive signed area as displayed.
"""
from __future__ import annotations

import json
import logging
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from scipy import ndimage

from ._container import Reader, Writer
from .errors import InvalidInputError, NoContourError, RenderError
from .mesh import Mesh

log = logging.getLogger(__name__)

IMAGE_WIDTH, IMAGE_HEIGHT = 500, 600
# 2 m subject fills 90% of the image height at the nominal distance
NOMINAL_DISTANCE = 3.0
FRAMED_HEIGHT = 2.0 / 0.9
CAMERA_HEIGHT = 1.0
JITTER_STD = 0.05
DEFAULT_M = 648
CONTOUR_POINT_COUNTS = (324, 486, 648, 972)

CNTR_MAGIC = "S2SCNTR"
CNTR_VERSION = 1
VIEWS = ("front", "side")


@dataclass(frozen=True)
class Camera:
    """Pinhole camera looking horizontally at a subject standing at the origin.

    ``front`` looks along -z from +z; ``side`` looks along +x from -x, so the
    subject's right side (-x) faces the camera.
    """

    view: str = "front"
    width: int = IMAGE_WIDTH
    height: int = IMAGE_HEIGHT
    distance: float = NOMINAL_DISTANCE
    center_height: float = CAMERA_HEIGHT
    framed_height: float = FRAMED_HEIGHT
    jitter_std: float = JITTER_STD

    def __post_init__(self):
        if self.view not in VIEWS:
            raise InvalidInputError(f"view must be one of {VIEWS}")
        if self.width <= 0 or self.height <= 0:
            raise InvalidInputError("image size must be positive")
        if self.jitter_std < 0 or self.distance <= 0 or self.framed_height <= 0:
            raise InvalidInputError("invalid camera parameters")

    @property
    def focal_px(self) -> float:
        return self.height * self.distance / self.framed_height

    def position(self, offset=(0.0, 0.0)) -> np.ndarray:
        """Camera centre; ``offset`` is (lateral, vertical) in meters."""
        lateral, vertical = offset
        if self.view == "front":
            return np.array([lateral, self.center_height + vertical, self.distance])
        return np.array([-self.distance, self.center_height + vertical, lateral])

    def project(self, points: np.ndarray, offset=(0.0, 0.0)) -> tuple[np.ndarray, np.ndarray]:
        """World points -> continuous image coords (u right, v down) and depth."""
        c = self.position(offset)
        rel = np.asarray(points, dtype=np.float64) - c
        if self.view == "front":
            depth, right = -rel[:, 2], rel[:, 0]
        else:
            depth, right = rel[:, 0], rel[:, 2]
        up = rel[:, 1]
        f = self.focal_px
        with np.errstate(divide="ignore", invalid="ignore"):
            u = self.width / 2 + f * right / depth
            v = self.height / 2 - f * up / depth
        return np.stack([u, v], axis=1), depth

    def draw_offset(self, rng: np.random.Generator) -> tuple[float, float]:
        if self.jitter_std == 0:
            return (0.0, 0.0)
        off = rng.normal(0.0, self.jitter_std, size=2)
        return (float(off[0]), float(off[1]))


@dataclass
class BinaryImage:
    bits: np.ndarray   # (height, width) bool

    def __post_init__(self):
        self.bits = np.asarray(self.bits, dtype=bool)
        if self.bits.ndim != 2:
            raise InvalidInputError("binary image must be 2-D")

    @property
    def width(self) -> int:
        return self.bits.shape[1]

    @property
    def height(self) -> int:
        return self.bits.shape[0]

    def to_pbm(self) -> bytes:
        header = f"P4\n{self.width} {self.height}\n".encode()
        return header + np.packbits(self.bits, axis=1).tobytes()

    def save_pbm(self, path) -> None:
        Path(path).write_bytes(self.to_pbm())

    @classmethod
    def from_pbm(cls, data: bytes) -> "BinaryImage":
        tokens, pos = [], 0
        while len(tokens) < 3:
            while data[pos:pos + 1].isspace():
                pos += 1
            if data[pos:pos + 1] == b"#":
                pos = data.index(b"\n", pos) + 1
                continue
            start = pos
            while not data[pos:pos + 1].isspace():
                pos += 1
            tokens.append(data[start:pos])
        if tokens[0] != b"P4":
            raise InvalidInputError("not a binary PBM (P4) file")
        w, h = int(tokens[1]), int(tokens[2])
        raw = np.frombuffer(data[pos + 1:], dtype=np.uint8)
        row_bytes = (w + 7) // 8
        bits = np.unpackbits(raw[:row_bytes * h].reshape(h, row_bytes), axis=1)[:, :w]
        return cls(bits.astype(bool))


def rasterize(uv: np.ndarray, triangles: np.ndarray, width: int, height: int,
              chunk: int = 4_000_000) -> np.ndarray:
    """Set every pixel whose centre lies inside (or on) a projected triangle."""
    out = np.zeros((height, width), dtype=bool)
    tri = uv[triangles]                          # (T, 3, 2)
    ok = np.isfinite(tri).all(axis=(1, 2))
    tri = tri[ok]
    if not len(tri):
        return out
    # pixel (r, c) has centre (c + 0.5, r + 0.5)
    lo = np.floor(tri.min(axis=1) - 0.5) + 1
    hi = np.floor(tri.max(axis=1) - 0.5)
    c0 = np.clip(lo[:, 0], 0, width).astype(np.int64)
    c1 = np.clip(hi[:, 0], -1, width - 1).astype(np.int64)
    r0 = np.clip(lo[:, 1], 0, height).astype(np.int64)
    r1 = np.clip(hi[:, 1], -1, height - 1).astype(np.int64)
    nx = np.maximum(c1 - c0 + 1, 0)
    ny = np.maximum(r1 - r0 + 1, 0)
    counts = nx * ny
    keep = counts > 0
    tri, c0, r0, nx, counts = tri[keep], c0[keep], r0[keep], nx[keep], counts[keep]

    start = 0
    while start < len(tri):
        # batch triangles so the candidate list stays bounded
        csum = np.cumsum(counts[start:])
        stop = start + max(1, int(np.searchsorted(csum, chunk, side="right")))
        sl = slice(start, stop)
        cnt = counts[sl]
        tid = np.repeat(np.arange(stop - start), cnt)
        local = np.arange(cnt.sum()) - np.repeat(np.cumsum(cnt) - cnt, cnt)
        cols = c0[sl][tid] + local % nx[sl][tid]
        rows = r0[sl][tid] + local // nx[sl][tid]
        px, py = cols + 0.5, rows + 0.5
        t = tri[sl][tid]
        inside_pos = np.ones(len(tid), dtype=bool)
        inside_neg = np.ones(len(tid), dtype=bool)
        for i in range(3):
            a, b = t[:, i], t[:, (i + 1) % 3]
            e = (b[:, 0] - a[:, 0]) * (py - a[:, 1]) - (b[:, 1] - a[:, 1]) * (px - a[:, 0])
            inside_pos &= e >= 0
            inside_neg &= e <= 0
        hit = inside_pos | inside_neg
        out[rows[hit], cols[hit]] = True
        start = stop
    return out


def render_silhouette(mesh: Mesh, camera: Camera, seed: int | None = 0,
                      offset: tuple[float, float] | None = None) -> BinaryImage:
    """Perspective-render ``mesh`` (meters) to a binary occupancy image.

    The camera is displaced by a Gaussian offset drawn from ``seed`` unless an
    explicit ``offset`` is given.
    """
    if mesh.n_vertices < 3 or len(mesh.triangles) == 0:
        raise InvalidInputError("mesh is degenerate")
    if offset is None:
        offset = camera.draw_offset(np.random.default_rng(seed))
    uv, depth = camera.project(mesh.vertices, offset)
    if (depth <= 1e-6).any():
        raise RenderError("mesh crosses the camera plane")
    bits = rasterize(uv, mesh.triangles, camera.width, camera.height)
    if not bits.any():
        raise RenderError("body projects fully outside the frame")
    return BinaryImage(bits)


# neighbour offsets (drow, dcol), anti-clockwise as displayed, starting east
_NEIGHBORS = np.array([(0, 1), (-1, 1), (-1, 0), (-1, -1), (0, -1), (1, -1), (1, 0), (1, 1)])


def _direction(d) -> int:
    return int(np.nonzero((_NEIGHBORS == d).all(axis=1))[0][0])


@dataclass
class Boundary:
    """Closed outer border as y-up pixel-centre coordinates (anti-clockwise)."""

    points: np.ndarray
    image_height: int
    multiple_components: bool = False
    warnings: list = field(default_factory=list)

    def __len__(self):
        return len(self.points)

    @property
    def pixel_height(self) -> float:
        """Number of pixel rows spanned by the border."""
        y = self.points[:, 1]
        return float(y.max() - y.min() + 1.0)


def _trace_outer(mask: np.ndarray) -> list:
    """Outer border of the single component in ``mask`` (Suzuki-Abe border following)."""
    padded = np.pad(mask, 1)
    rows, cols = np.nonzero(padded)
    i0, j0 = int(rows[0]), int(cols[0])       # first pixel in raster order
    start = np.array([i0, j0])

    def find(center, from_dir, step):
        for n in range(1, 9):
            d = (from_dir + step * n) % 8
            r, c = center + _NEIGHBORS[d]
            if padded[r, c]:
                return d
        return None

    # clockwise search from the west neighbour (known background)
    west = _direction((0, -1))
    if not any(padded[tuple(start + _NEIGHBORS[d])] for d in range(8)):
        return [(i0 - 1, j0 - 1)]
    d1 = find(start, west + 1, -1)   # +1 so the search includes the west pixel itself
    p1 = start + _NEIGHBORS[d1]
    chain = []
    prev, cur = p1, start
    while True:
        chain.append((int(cur[0]) - 1, int(cur[1]) - 1))
        back = _direction(tuple(prev - cur))
        d = find(cur, back, 1)
        nxt = cur + _NEIGHBORS[d]
        if (nxt == start).all() and (cur == p1).all():
            break
        prev, cur = cur, nxt
        if len(chain) > 4 * padded.size:
            raise NoContourError("border following did not terminate")
    return chain


def extract_contour(image: BinaryImage) -> Boundary:
    """Outer border of the largest 4-connected foreground component."""
    bits = image.bits
    if not bits.any():
        raise NoContourError("image has no foreground pixels")
    labels, n = ndimage.label(bits)
    warnings = []
    if n > 1:
        sizes = ndimage.sum_labels(bits, labels, index=np.arange(1, n + 1))
        keep = int(np.argmax(sizes)) + 1
        mask = labels == keep
        msg = f"{n} foreground components; using the largest ({int(sizes[keep - 1])} px)"
        log.warning(msg)
        warnings.append(msg)
    else:
        mask = bits
    chain = np.array(_trace_outer(mask), dtype=np.float64)
    pts = np.stack([chain[:, 1] + 0.5, image.height - chain[:, 0] - 0.5], axis=1)
    if len(pts) >= 3 and signed_area(pts) < 0:
        pts = pts[::-1]
    return Boundary(pts, image.height, n > 1, warnings)


def signed_area(points: np.ndarray) -> float:
    x, y = points[:, 0], points[:, 1]
    return 0.5 * float(np.dot(x, np.roll(y, -1)) - np.dot(np.roll(x, -1), y))


@dataclass
class ContourSamples:
    """``points`` is (M + 2, 2): [p_M, p_1, ..., p_M, p_1] in unit-body-height units."""

    points: np.ndarray
    view: str = "front"

    def __post_init__(self):
        self.points = np.asarray(self.points, dtype=np.float64)
        if self.points.ndim != 2 or self.points.shape[1] != 2 or len(self.points) < 5:
            raise InvalidInputError("contour samples must be (M + 2, 2) with M >= 3")

    @property
    def M(self) -> int:
        return len(self.points) - 2

    @property
    def interior(self) -> np.ndarray:
        return self.points[1:-1]

    def as_input(self, dtype=np.float32) -> np.ndarray:
        """Channels-first (2, M + 2) network input."""
        return np.ascontiguousarray(self.points.T, dtype=dtype)

    def to_json(self) -> dict:
        return {"view": self.view, "M": self.M, "points": self.points.tolist()}


def resample_contour(boundary, M: int = DEFAULT_M, body_height_px: float | None = None,
                     view: str = "front") -> ContourSamples:
    """Uniform arc-length resampling into the network's ordered contour samples.

    Samples start at the highest boundary point (ties: nearest the bounding-box
    centre), run anti-clockwise, are divided by ``body_height_px`` and centred
    on their mean. The boundary must be at least M pixels long.
    """
    if isinstance(boundary, Boundary):
        pts = boundary.points
        if body_height_px is None:
            body_height_px = boundary.pixel_height
    else:
        pts = np.asarray(boundary, dtype=np.float64)
    if M < 3:
        raise InvalidInputError("M must be >= 3")
    if pts.ndim != 2 or pts.shape[1] != 2 or len(pts) < 3:
        raise InvalidInputError("boundary needs at least 3 points")
    if body_height_px is None or not body_height_px > 0:
        raise InvalidInputError("body_height_px must be positive")
    if np.allclose(pts[0], pts[-1]):
        pts = pts[:-1]
    steps = np.linalg.norm(np.diff(pts, axis=0), axis=1)
    gap = float(np.linalg.norm(pts[0] - pts[-1]))
    if gap > max(steps.max(), np.sqrt(2.0)) + 1e-9:
        raise InvalidInputError("boundary is not closed")
    # at least one pixel of boundary per sample
    if steps.sum() + gap < M:
        raise InvalidInputError(f"boundary arc length {steps.sum() + gap:.1f} px is shorter than M={M}")
    if signed_area(pts) < 0:
        pts = pts[::-1]

    top = pts[:, 1].max()
    cand = np.nonzero(pts[:, 1] >= top - 1e-9)[0]
    mid_x = 0.5 * (pts[:, 0].min() + pts[:, 0].max())
    first = cand[np.argmin(np.abs(pts[cand, 0] - mid_x))]
    pts = np.roll(pts, -first, axis=0)

    closed = np.vstack([pts, pts[:1]])
    seg = np.linalg.norm(np.diff(closed, axis=0), axis=1)
    arc = np.concatenate([[0.0], np.cumsum(seg)])
    total = arc[-1]
    s = total * np.arange(M) / M
    x = np.interp(s, arc, closed[:, 0])
    y = np.interp(s, arc, closed[:, 1])
    samples = np.stack([x, y], axis=1) / body_height_px
    samples -= samples.mean(axis=0)
    wrapped = np.vstack([samples[-1:], samples, samples[:1]])
    return ContourSamples(wrapped, view)


def place_on_floor(mesh: Mesh, height_m: float | None = None) -> Mesh:
    """Scale to ``height_m`` (if given), stand on y=0 and centre x/z on the origin."""
    v = mesh.vertices.copy()
    if height_m is not None:
        v *= height_m / mesh.extent(1)
    lo, hi = v.min(axis=0), v.max(axis=0)
    v[:, 0] -= 0.5 * (lo[0] + hi[0])
    v[:, 2] -= 0.5 * (lo[2] + hi[2])
    v[:, 1] -= lo[1]
    return mesh.with_vertices(v)


def sample_views(mesh: Mesh, M: int = DEFAULT_M, seed: int = 0, height_m: float = 1.75,
                 jitter_std: float = JITTER_STD) -> tuple[ContourSamples, ContourSamples]:
    """Render front and side silhouettes and resample both contours."""
    body = place_on_floor(mesh, height_m)
    out = []
    rng = np.random.default_rng(seed)
    for view in VIEWS:
        cam = Camera(view=view, jitter_std=jitter_std)
        img = render_silhouette(body, cam, offset=cam.draw_offset(rng))
        out.append(resample_contour(extract_contour(img), M, view=view))
    return out[0], out[1]


def save_contours(contours, path) -> None:
    """Binary container of one view: view tag, M, count, then float32 (x, y) pairs."""
    contours = list(contours)
    if not contours:
        raise InvalidInputError("no contours to save")
    view, M = contours[0].view, contours[0].M
    if any(c.view != view or c.M != M for c in contours):
        raise InvalidInputError("contours in one file must share view and M")
    w = Writer(CNTR_MAGIC, CNTR_VERSION)
    w.u8(VIEWS.index(view))
    w.u32(M, len(contours))
    w.array(np.stack([c.points for c in contours]), "f4")
    w.save(path)


def load_contours(path) -> list:
    r = Reader.open(path, CNTR_MAGIC)
    view = VIEWS[r.u8()]
    M, n = r.u32(), r.u32()
    data = r.array((n, M + 2, 2), "f4").astype(np.float64)
    return [ContourSamples(p, view) for p in data]


def save_contours_json(contours, path) -> None:
    Path(path).write_text(json.dumps([c.to_json() for c in contours]))
