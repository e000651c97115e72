"""Integer-preserving grayscale image compression by cross approximation.

Only integer pixels are stored: the selected rows ``M[I, :]`` and the
selected columns without the rows already stored, ``M[I^c, J]``. The core
``M[I, J]`` lives inside the row panel, so a rank-r container holds
``r*w + r*h - r*r`` pixels. The decoder rebuilds the core and inverts it.
"""

from __future__ import annotations

import math
import re
import struct
from dataclasses import dataclass, field

import numpy as np

from .densemat import lu_factor, solve
from .errors import (
    BadMagic,
    BadVersion,
    DimensionMismatch,
    IndexOutOfRange,
    LengthMismatch,
    MalformedHeader,
    RankDeficient,
    SingularCore,
    TargetUnachievable,
    TruncatedData,
    UnsupportedMaxval,
)
from .maxvol import IndexPair, MaxvolConfig, initial_submatrix, maxvol_general, numerical_rank

MAGIC = b"XCUR"
VERSION = 1
_HEADER = struct.Struct("<4sBIII")


@dataclass(frozen=True)
class GrayImage:
    pixels: np.ndarray  # uint8, height x width

    def __post_init__(self):
        px = np.asarray(self.pixels)
        if px.ndim != 2:
            raise DimensionMismatch("pixels must be a 2-D array")
        if px.dtype != np.uint8:
            if np.any(px < 0) or np.any(px > 255) or np.any(px != np.round(px)):
                raise ValueError("pixels must be integers in [0, 255]")
            px = px.astype(np.uint8)
        object.__setattr__(self, "pixels", px)

    @property
    def height(self) -> int:
        return self.pixels.shape[0]

    @property
    def width(self) -> int:
        return self.pixels.shape[1]


@dataclass(frozen=True)
class CompressedImage:
    width: int
    height: int
    I: tuple[int, ...]
    J: tuple[int, ...]
    row_panel: np.ndarray  # uint8, r x width
    col_complement: np.ndarray  # uint8, (height - r) x r

    def __post_init__(self):
        r = len(self.I)
        if len(self.J) != r:
            raise LengthMismatch("I and J lengths differ")
        if not 1 <= r <= min(self.width, self.height):
            raise IndexOutOfRange(f"rank {r} out of range")
        for name, idx, bound in (("I", self.I, self.height), ("J", self.J, self.width)):
            if any(a >= b for a, b in zip(idx, idx[1:])):
                raise IndexOutOfRange(f"{name} is not strictly increasing")
            if idx[0] < 0 or idx[-1] >= bound:
                raise IndexOutOfRange(f"{name} index out of range")
        if self.row_panel.shape != (r, self.width):
            raise LengthMismatch("row panel has the wrong shape")
        if self.col_complement.shape != (self.height - r, r):
            raise LengthMismatch("column panel has the wrong shape")

    @property
    def rank(self) -> int:
        return len(self.I)

    @property
    def stored_entry_count(self) -> int:
        return self.row_panel.size + self.col_complement.size

    @property
    def ratio(self) -> float:
        return self.stored_entry_count / (self.width * self.height)

    def col_panel(self) -> np.ndarray:
        """Reassemble ``M[:, J]`` from the two stored panels."""
        full = np.empty((self.height, self.rank), dtype=np.uint8)
        in_i = np.zeros(self.height, dtype=bool)
        in_i[list(self.I)] = True
        full[in_i] = self.row_panel[:, list(self.J)]
        full[~in_i] = self.col_complement
        return full


def stored_entries(width: int, height: int, r: int) -> int:
    return r * width + r * height - r * r


def compression_ratio(width: int, height: int, r: int) -> float:
    return stored_entries(width, height, r) / (width * height)


# ---------------------------------------------------------------------------
# PGM

_TOKEN = re.compile(rb"#[^\n\r]*[\n\r]?|\S+")


def _header_tokens(data: bytes, count: int) -> tuple[list[bytes], int]:
    tokens = []
    pos = 0
    while len(tokens) < count:
        m = _TOKEN.search(data, pos)
        if m is None:
            raise MalformedHeader("PGM header is incomplete")
        pos = m.end()
        tok = m.group()
        if not tok.startswith(b"#"):
            tokens.append(tok)
    return tokens, pos


def load_pgm(data: bytes) -> GrayImage:
    """Parse a P2 (ASCII) or P5 (binary) PGM with maxval <= 255."""
    tokens, pos = _header_tokens(data, 4)
    magic = tokens[0]
    if magic not in (b"P2", b"P5"):
        raise MalformedHeader(f"unsupported PGM magic {magic!r}")
    try:
        width, height, maxval = (int(t) for t in tokens[1:4])
    except ValueError as exc:
        raise MalformedHeader("non-numeric PGM header field") from exc
    if width <= 0 or height <= 0:
        raise MalformedHeader("PGM dimensions must be positive")
    if not 0 < maxval <= 255:
        raise UnsupportedMaxval(f"maxval {maxval} not supported (need <= 255)")
    n = width * height
    if magic == b"P5":
        # exactly one whitespace byte separates header and raster
        raster = data[pos + 1 : pos + 1 + n]
        if len(raster) < n:
            raise TruncatedData(f"expected {n} pixel bytes, found {len(raster)}")
        px = np.frombuffer(raster, dtype=np.uint8)
    else:
        values = data[pos:].split()
        if len(values) < n:
            raise TruncatedData(f"expected {n} pixel values, found {len(values)}")
        try:
            px = np.array([int(v) for v in values[:n]], dtype=np.int64)
        except ValueError as exc:
            raise MalformedHeader("non-numeric pixel value") from exc
    if np.any(px > maxval):
        raise MalformedHeader("pixel value exceeds maxval")
    return GrayImage(px.reshape(height, width).astype(np.uint8))


def save_pgm(img: GrayImage) -> bytes:
    """Canonical binary P5 encoding."""
    header = f"P5\n{img.width} {img.height}\n255\n".encode("ascii")
    return header + img.pixels.tobytes()


# ---------------------------------------------------------------------------
# XCUR container


def xcur_encode(c: CompressedImage) -> bytes:
    r = c.rank
    parts = [
        _HEADER.pack(MAGIC, VERSION, c.width, c.height, r),
        struct.pack(f"<{r}I", *c.I),
        struct.pack(f"<{r}I", *c.J),
        np.ascontiguousarray(c.row_panel, dtype=np.uint8).tobytes(),
        np.ascontiguousarray(c.col_complement, dtype=np.uint8).tobytes(),
    ]
    return b"".join(parts)


def xcur_size(width: int, height: int, r: int) -> int:
    return _HEADER.size + 8 * r + r * width + (height - r) * r


def xcur_decode(data: bytes) -> CompressedImage:
    if len(data) < 4 or data[:4] != MAGIC:
        raise BadMagic("not an XCUR stream")
    if len(data) < _HEADER.size:
        raise LengthMismatch("stream shorter than the XCUR header")
    _, version, width, height, r = _HEADER.unpack_from(data)
    if version != VERSION:
        raise BadVersion(f"unsupported XCUR version {version}")
    if width == 0 or height == 0 or not 1 <= r <= min(width, height):
        raise IndexOutOfRange(f"invalid dimensions {width}x{height} with rank {r}")
    expected = xcur_size(width, height, r)
    if len(data) != expected:
        raise LengthMismatch(f"expected {expected} bytes, got {len(data)}")
    off = _HEADER.size
    rows = struct.unpack_from(f"<{r}I", data, off)
    off += 4 * r
    cols = struct.unpack_from(f"<{r}I", data, off)
    off += 4 * r
    row_panel = np.frombuffer(data, dtype=np.uint8, count=r * width, offset=off).reshape(r, width)
    off += r * width
    comp = np.frombuffer(data, dtype=np.uint8, count=(height - r) * r, offset=off).reshape(height - r, r)
    return CompressedImage(width, height, rows, cols, row_panel.copy(), comp.copy())


# ---------------------------------------------------------------------------
# codec


def psnr(a: GrayImage, b: GrayImage) -> float:
    """``10 log10(255^2 / MSE)``; ``inf`` for identical images."""
    if a.pixels.shape != b.pixels.shape:
        raise DimensionMismatch("images differ in size")
    diff = a.pixels.astype(np.float64) - b.pixels.astype(np.float64)
    mse = float(np.mean(diff * diff))
    if mse == 0.0:
        return math.inf
    return 10.0 * math.log10(255.0**2 / mse)


def _round_half_away(x: np.ndarray) -> np.ndarray:
    return np.sign(x) * np.floor(np.abs(x) + 0.5)


def decompress(c: CompressedImage) -> GrayImage:
    cols = c.col_panel().astype(np.float64)
    rows = c.row_panel.astype(np.float64)
    core = lu_factor(rows[:, list(c.J)])
    if core.singular:
        raise SingularCore("stored core block is singular")
    approx = cols @ solve(core, rows)
    px = np.clip(_round_half_away(approx), 0, 255).astype(np.uint8)
    return GrayImage(px)


def _pack(img: GrayImage, pair: IndexPair) -> CompressedImage:
    px = img.pixels
    if lu_factor(pair.block(px.astype(np.float64))).singular:
        raise SingularCore("selected core block is singular")
    in_i = np.zeros(img.height, dtype=bool)
    in_i[list(pair.I)] = True
    row_panel = px[list(pair.I), :].copy()
    comp = px[~in_i][:, list(pair.J)].copy()
    return CompressedImage(img.width, img.height, pair.I, pair.J, row_panel, comp)


def compress_rank(img: GrayImage, r: int, cfg: MaxvolConfig | None = None) -> tuple[CompressedImage, float]:
    """Compress at a fixed rank; returns the container and its decode PSNR."""
    cfg = cfg or MaxvolConfig(mode="alternating")
    if not 1 <= r <= min(img.width, img.height):
        raise ValueError(f"rank {r} out of range for a {img.height}x{img.width} image")
    m = img.pixels.astype(np.float64)
    start = initial_submatrix(m, r, cfg.init, cfg.seed)
    report = maxvol_general(m, start, cfg)
    c = _pack(img, report.indices)
    return c, psnr(img, decompress(c))


@dataclass
class RankSearch:
    """Outcome of a PSNR-targeted rank search.

    `probes` lists every ``(rank, psnr)`` tried, in order.
    """

    rank: int
    psnr: float
    target: float
    probes: list[tuple[int, float]] = field(default_factory=list)

    @property
    def failing_below(self) -> list[int]:
        return [r for r, p in self.probes if r < self.rank and p < self.target]


def compress_psnr(
    img: GrayImage, target: float, cfg: MaxvolConfig | None = None, start_rank: int = 8
) -> tuple[CompressedImage, float, RankSearch]:
    """Smallest probed rank whose decode reaches `target` dB.

    Ranks double from `start_rank` until the target is met, then bisect
    between the last failure and the first success. Decode PSNR is not
    guaranteed monotone in rank, so the result is the best certificate the
    probes support rather than a proven minimum.
    """
    if not target > 0:
        raise ValueError("PSNR target must be positive")
    cfg = cfg or MaxvolConfig(mode="alternating")
    m = img.pixels.astype(np.float64)
    rmax = numerical_rank(m)
    if rmax == 0:
        raise RankDeficient("image is all zeros")
    cache: dict[int, tuple[CompressedImage, float]] = {}
    search = RankSearch(0, -math.inf, target)

    def probe(r: int) -> float:
        if r not in cache:
            cache[r] = compress_rank(img, r, cfg)
            search.probes.append((r, cache[r][1]))
        return cache[r][1]

    lo, hi = 0, None
    r = min(start_rank, rmax)
    while True:
        if probe(r) >= target:
            hi = r
            break
        lo = r
        if r == rmax:
            break
        r = min(2 * r, rmax)
    if hi is None:
        raise TargetUnachievable(f"rank {rmax} reaches only {cache[rmax][1]:.2f} dB < {target} dB")
    while hi - lo > 1:
        mid = (lo + hi) // 2
        if probe(mid) >= target:
            hi = mid
        else:
            lo = mid
    c, achieved = cache[hi]
    search.rank, search.psnr = hi, achieved
    return c, achieved, search


def compress(img: GrayImage, *, rank: int | None = None, psnr_target: float | None = None,
             cfg: MaxvolConfig | None = None) -> tuple[CompressedImage, float]:
    """Compress to a fixed `rank` or to the smallest rank meeting `psnr_target`."""
    if (rank is None) == (psnr_target is None):
        raise ValueError("give exactly one of rank or psnr_target")
    if rank is not None:
        return compress_rank(img, rank, cfg)
    c, achieved, _ = compress_psnr(img, psnr_target, cfg)
    return c, achieved
