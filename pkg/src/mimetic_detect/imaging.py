"""Grayscale image I/O and the staggered-grid field layout.

Decoders cover the two formats the pipeline actually meets: PNG
(non-interlaced, 8/16-bit, gray/RGB/palette, alpha dropped) and binary PGM
(P5, 8/16-bit).  Samples are normalized to [0, 1] floats on decode.  The
export side writes 8-bit P5 only.

`pad_and_vectorize` turns an H x W image into the (H+2)(W+2) extended-center
vector the gradient operators consume: one replicated ghost pixel on each
side, raveled x-fastest (index = i + j*(W+2)).
"""

import struct
import zlib

import numpy as np

PNG_SIGNATURE = b"\x89PNG\r\n\x1a\n"

# Luma coefficients of the usual RGB -> gray conversion.
LUMA_R, LUMA_G, LUMA_B = 0.2989, 0.5870, 0.1140


class ImageDecodeError(ValueError):
    """Base class for all decode failures."""


class MalformedHeaderError(ImageDecodeError):
    """Signature, chunk structure, or header fields are invalid."""


class TruncatedDataError(ImageDecodeError):
    """The payload ends before the advertised number of samples."""


class UnsupportedFormatError(ImageDecodeError):
    """Valid file, but a variant outside this decoder's scope."""


def decode_image(data: bytes, format_hint: str | None = None) -> np.ndarray:
    """Decode PNG or binary PGM bytes.

    Returns float64 samples in [0, 1]: shape (H, W) for grayscale sources,
    (H, W, 3) for color ones.  `format_hint` ("png"/"pgm") overrides
    signature sniffing.
    """
    fmt = (format_hint or "").lower()
    if not fmt:
        if data[:8] == PNG_SIGNATURE:
            fmt = "png"
        elif data[:2] == b"P5":
            fmt = "pgm"
        elif data[:2] == b"P2":
            raise UnsupportedFormatError("ASCII PGM (P2) is not supported, use binary P5")
        else:
            raise MalformedHeaderError("not a PNG or binary PGM file")
    if fmt == "png":
        return _decode_png(data)
    if fmt == "pgm":
        return _decode_pgm(data)
    raise UnsupportedFormatError(f"unknown format hint {format_hint!r}")


def load_image(path) -> np.ndarray:
    """Read a file and return a grayscale (H, W) float array in [0, 1]."""
    with open(path, "rb") as fh:
        img = decode_image(fh.read())
    if img.ndim == 3:
        img = to_grayscale(img)
    return img


# ---------------------------------------------------------------------------
# PNG

_PNG_CHANNELS = {0: 1, 2: 3, 3: 1, 4: 2, 6: 4}


def _validate_ihdr(ihdr) -> None:
    width, height, depth, color, compression, filt, interlace = ihdr
    if width == 0 or height == 0:
        raise MalformedHeaderError("PNG with zero dimension")
    if compression != 0 or filt != 0:
        raise MalformedHeaderError("unknown PNG compression/filter method")
    if interlace != 0:
        raise UnsupportedFormatError("interlaced PNG is not supported")
    if color not in _PNG_CHANNELS:
        raise UnsupportedFormatError(f"PNG color type {color} is not supported")
    if depth not in (8, 16) or (color == 3 and depth != 8):
        raise UnsupportedFormatError(f"PNG bit depth {depth} is not supported")


def _decode_png(data: bytes) -> np.ndarray:
    if data[:8] != PNG_SIGNATURE:
        raise MalformedHeaderError("bad PNG signature")
    pos = 8
    ihdr = None
    palette = None
    idat = bytearray()
    seen_iend = False
    while pos < len(data):
        if pos + 8 > len(data):
            raise TruncatedDataError("PNG chunk header truncated")
        length, ctype = struct.unpack(">I4s", data[pos : pos + 8])
        body_end = pos + 8 + length
        if body_end + 4 > len(data):
            raise TruncatedDataError(f"PNG chunk {ctype!r} truncated")
        body = data[pos + 8 : body_end]
        (crc,) = struct.unpack(">I", data[body_end : body_end + 4])
        if crc != zlib.crc32(ctype + body):
            raise MalformedHeaderError(f"CRC mismatch in PNG chunk {ctype!r}")
        pos = body_end + 4
        if ctype == b"IHDR":
            ihdr = struct.unpack(">IIBBBBB", body)
            _validate_ihdr(ihdr)
        elif ctype == b"PLTE":
            palette = body
        elif ctype == b"IDAT":
            idat += body
        elif ctype == b"IEND":
            seen_iend = True
            break
    if ihdr is None:
        raise MalformedHeaderError("PNG has no IHDR chunk")
    if not seen_iend:
        raise TruncatedDataError("PNG missing IEND chunk")
    width, height, depth, color, _, _, _ = ihdr
    if color == 3 and palette is None:
        raise MalformedHeaderError("palette PNG without PLTE chunk")
    if not idat:
        raise TruncatedDataError("PNG has no IDAT data")

    channels = _PNG_CHANNELS[color]
    sample_bytes = depth // 8
    stride = width * channels * sample_bytes
    try:
        raw = zlib.decompress(bytes(idat))
    except zlib.error as exc:
        raise TruncatedDataError(f"PNG IDAT stream corrupt: {exc}") from exc
    if len(raw) < (stride + 1) * height:
        raise TruncatedDataError("PNG pixel data shorter than expected")

    flat = _unfilter(raw, height, stride, channels * sample_bytes)
    if depth == 8:
        arr = flat.reshape(height, width, channels).astype(np.float64)
        maxval = 255.0
    else:
        arr = (
            flat.reshape(height, stride)
            .view(">u2")
            .reshape(height, width, channels)
            .astype(np.float64)
        )
        maxval = 65535.0

    if color == 3:
        lut = np.frombuffer(palette, dtype=np.uint8)
        if lut.size % 3 != 0:
            raise MalformedHeaderError("PLTE length is not a multiple of 3")
        lut = lut.reshape(-1, 3).astype(np.float64)
        idx = arr[:, :, 0].astype(np.intp)
        if idx.max() >= lut.shape[0]:
            raise MalformedHeaderError("palette index out of range")
        return lut[idx] / 255.0

    arr = arr / maxval
    if color == 0:
        return arr[:, :, 0]
    if color == 4:  # gray + alpha: drop alpha
        return arr[:, :, 0]
    if color == 6:  # RGBA: drop alpha
        return arr[:, :, :3]
    return arr  # RGB


def _unfilter(raw: bytes, height: int, stride: int, bpp: int) -> np.ndarray:
    """Undo per-scanline PNG filtering; returns uint8 array (height, stride)."""
    out = np.zeros((height, stride), dtype=np.int64)
    data = np.frombuffer(raw, dtype=np.uint8)
    for y in range(height):
        ftype = int(data[y * (stride + 1)])
        line = data[y * (stride + 1) + 1 : (y + 1) * (stride + 1)].astype(np.int64)
        prev = out[y - 1] if y > 0 else np.zeros(stride, dtype=np.int64)
        if ftype == 0:
            out[y] = line
        elif ftype == 1:  # Sub: per-lane running sum mod 256
            for lane in range(bpp):
                out[y, lane::bpp] = np.cumsum(line[lane::bpp]) % 256
        elif ftype == 2:  # Up
            out[y] = (line + prev) % 256
        elif ftype == 3:  # Average
            row = out[y]
            for x in range(stride):
                left = row[x - bpp] if x >= bpp else 0
                row[x] = (line[x] + (left + prev[x]) // 2) % 256
        elif ftype == 4:  # Paeth
            row = out[y]
            for x in range(stride):
                a = row[x - bpp] if x >= bpp else 0
                b = prev[x]
                c = prev[x - bpp] if x >= bpp else 0
                p = a + b - c
                pa, pb, pc = abs(p - a), abs(p - b), abs(p - c)
                if pa <= pb and pa <= pc:
                    pred = a
                elif pb <= pc:
                    pred = b
                else:
                    pred = c
                row[x] = (line[x] + pred) % 256
        else:
            raise MalformedHeaderError(f"invalid PNG filter type {ftype}")
    return out.astype(np.uint8)


# ---------------------------------------------------------------------------
# PGM (binary, P5)


def _decode_pgm(data: bytes) -> np.ndarray:
    if data[:2] != b"P5":
        raise MalformedHeaderError("bad PGM magic (expected P5)")
    pos = 2
    fields = []
    while len(fields) < 3:
        if pos >= len(data):
            raise MalformedHeaderError("PGM header ended early")
        ch = data[pos : pos + 1]
        if ch.isspace():
            pos += 1
        elif ch == b"#":
            while pos < len(data) and data[pos : pos + 1] not in (b"\n", b"\r"):
                pos += 1
        elif ch.isdigit():
            start = pos
            while pos < len(data) and data[pos : pos + 1].isdigit():
                pos += 1
            fields.append(int(data[start:pos]))
        else:
            raise MalformedHeaderError(f"unexpected byte {ch!r} in PGM header")
    width, height, maxval = fields
    if width == 0 or height == 0:
        raise MalformedHeaderError("PGM with zero dimension")
    if not 0 < maxval < 65536:
        raise MalformedHeaderError(f"PGM maxval {maxval} out of range")
    pos += 1  # single whitespace byte after maxval
    n = width * height
    if maxval < 256:
        payload = data[pos : pos + n]
        if len(payload) < n:
            raise TruncatedDataError("PGM payload shorter than width*height")
        arr = np.frombuffer(payload, dtype=np.uint8).astype(np.float64)
    else:
        payload = data[pos : pos + 2 * n]
        if len(payload) < 2 * n:
            raise TruncatedDataError("PGM payload shorter than 2*width*height")
        arr = np.frombuffer(payload, dtype=">u2").astype(np.float64)
    return (arr / maxval).reshape(height, width)


def encode_pgm(img: np.ndarray) -> bytes:
    """8-bit binary PGM; samples quantized by round(v * 255)."""
    a = np.asarray(img, dtype=float)
    if a.ndim != 2:
        raise ValueError("encode_pgm expects a 2D grayscale array")
    q = np.round(np.clip(a, 0.0, 1.0) * 255.0).astype(np.uint8)
    header = f"P5\n{a.shape[1]} {a.shape[0]}\n255\n".encode("ascii")
    return header + q.tobytes()


# ---------------------------------------------------------------------------
# Conversions


def to_grayscale(rgb: np.ndarray) -> np.ndarray:
    """Luma grayscale conversion of an (H, W, 3) raster in [0, 1]."""
    a = np.asarray(rgb, dtype=float)
    if a.ndim != 3 or a.shape[2] != 3:
        raise ValueError(f"expected (H, W, 3) RGB raster, got shape {a.shape}")
    return LUMA_R * a[:, :, 0] + LUMA_G * a[:, :, 1] + LUMA_B * a[:, :, 2]


def _cubic(x: np.ndarray) -> np.ndarray:
    # Keys cubic (a = -1/2), support [-2, 2]
    ax = np.abs(x)
    ax2 = ax * ax
    ax3 = ax2 * ax
    return np.where(
        ax <= 1.0,
        1.5 * ax3 - 2.5 * ax2 + 1.0,
        np.where(ax < 2.0, -0.5 * ax3 + 2.5 * ax2 - 4.0 * ax + 2.0, 0.0),
    )


def _axis_weights(n_in: int, n_out: int):
    """Sample indices and normalized bicubic weights for one axis.

    Downscaling stretches the kernel by the scale factor (antialiasing
    prefilter); indices are clamped at the borders (edge replication).
    """
    scale = n_out / n_in
    kscale = min(scale, 1.0)
    support = 2.0 / kscale
    centers = (np.arange(n_out) + 0.5) / scale - 0.5
    n_taps = 2 * int(np.ceil(support)) + 2
    left = np.floor(centers).astype(int) - n_taps // 2 + 1
    idx = left[:, None] + np.arange(n_taps)[None, :]
    w = _cubic((centers[:, None] - idx) * kscale) * kscale
    w /= w.sum(axis=1, keepdims=True)
    return np.clip(idx, 0, n_in - 1), w


def resize(img: np.ndarray, out_h: int, out_w: int) -> np.ndarray:
    """Deterministic bicubic resize of a grayscale image, output in [0, 1]."""
    a = np.asarray(img, dtype=float)
    if a.ndim != 2:
        raise ValueError("resize expects a 2D grayscale array")
    if out_h < 2 or out_w < 2:
        raise ValueError(f"degenerate target size {out_h}x{out_w}")
    idx, w = _axis_weights(a.shape[0], out_h)
    a = np.einsum("ot,otw->ow", w, a[idx, :])
    idx, w = _axis_weights(a.shape[1], out_w)
    a = np.einsum("ot,hot->ho", w, a[:, idx])
    return np.clip(a, 0.0, 1.0)


def extend(img: np.ndarray) -> np.ndarray:
    """(H+2) x (W+2) extended field: one replicated ghost pixel per side."""
    a = np.asarray(img, dtype=float)
    if a.ndim != 2:
        raise ValueError("extend expects a 2D grayscale array")
    return np.pad(a, 1, mode="edge")


def pad_and_vectorize(img: np.ndarray) -> np.ndarray:
    """Replicate-padded image as an x-fastest extended-center vector."""
    return extend(img).ravel()
