"""Image file I/O: binary PGM (P5) and PBM (P4), plus a PNG reader.

PGM and PBM are the toolkit's native formats and round-trip bit-exactly.
Binary masks follow the toolkit polarity: ink/text = True, written as 0
(black) in PGM and as set bits in PBM (the PBM convention is 1 = black).

PNG support is read-only and self-contained (stdlib zlib): 8-bit gray,
RGB, palette, and alpha variants, non-interlaced.  Color converts to gray
with the Rec. 601 luma weights 0.299/0.587/0.114.
"""
from __future__ import annotations

import struct
import zlib
from pathlib import Path

import numpy as np

from .errors import DecodeError
from .raster import BinaryImage, GrayImage, as_gray, as_mask

PNG_SIGNATURE = b"\x89PNG\r\n\x1a\n"


# ---------------------------------------------------------------------------
# PNM (PGM P5 / PBM P4)


def _pnm_tokens(data: bytes, count: int) -> tuple[list[int], int]:
    """Read ``count`` whitespace-separated integers after the magic.

    Comments (# to end of line) may appear anywhere in the header.
    Returns the values and the offset just past the single whitespace byte
    terminating the last one.
    """
    tokens: list[int] = []
    i = 2  # past the 2-byte magic
    n = len(data)
    while len(tokens) < count:
        while i < n and data[i:i + 1].isspace():
            i += 1
        if i < n and data[i] == ord("#"):
            while i < n and data[i] != ord("\n"):
                i += 1
            continue
        j = i
        while j < n and not data[j:j + 1].isspace() and data[j] != ord("#"):
            j += 1
        if j == i:
            raise DecodeError("truncated PNM header")
        try:
            tokens.append(int(data[i:j]))
        except ValueError as exc:
            raise DecodeError(f"bad PNM header token {data[i:j]!r}") from exc
        i = j
    if i >= n or not data[i:i + 1].isspace():
        raise DecodeError("PNM header must end with a whitespace byte")
    return tokens, i + 1


def decode_pgm(data: bytes) -> GrayImage:
    """Decode a binary PGM (P5) byte string into a gray image."""
    if data[:2] != b"P5":
        raise DecodeError("not a binary PGM (P5) file")
    (width, height, maxval), offset = _pnm_tokens(data, 3)
    if width < 1 or height < 1:
        raise DecodeError(f"bad PGM dimensions {width}x{height}")
    if not (1 <= maxval <= 255):
        raise DecodeError(f"only 8-bit PGM supported, maxval={maxval}")
    need = width * height
    raw = data[offset:offset + need]
    if len(raw) < need:
        raise DecodeError("PGM pixel data truncated")
    return np.frombuffer(raw, dtype=np.uint8).reshape(height, width).copy()


def encode_pgm(img: GrayImage) -> bytes:
    img = as_gray(img)
    h, w = img.shape
    return b"P5\n%d %d\n255\n" % (w, h) + img.tobytes()


def decode_pbm(data: bytes) -> BinaryImage:
    """Decode a binary PBM (P4); set bits (black) become True."""
    if data[:2] != b"P4":
        raise DecodeError("not a binary PBM (P4) file")
    (width, height), offset = _pnm_tokens(data, 2)
    if width < 1 or height < 1:
        raise DecodeError(f"bad PBM dimensions {width}x{height}")
    row_bytes = (width + 7) // 8
    need = row_bytes * height
    raw = data[offset:offset + need]
    if len(raw) < need:
        raise DecodeError("PBM pixel data truncated")
    bits = np.unpackbits(
        np.frombuffer(raw, dtype=np.uint8).reshape(height, row_bytes), axis=1
    )
    return bits[:, :width].astype(bool)


def encode_pbm(mask: BinaryImage) -> bytes:
    mask = as_mask(mask)
    h, w = mask.shape
    packed = np.packbits(mask, axis=1)
    return b"P4\n%d %d\n" % (w, h) + packed.tobytes()


# ---------------------------------------------------------------------------
# PNG (decode only)


def _unfilter_scanlines(raw: bytes, width: int, height: int, channels: int) -> np.ndarray:
    stride = width * channels
    out = np.zeros((height, stride), dtype=np.uint8)
    pos = 0
    bpp = channels
    for y in range(height):
        ftype = raw[pos]
        line = np.frombuffer(raw, dtype=np.uint8, count=stride, offset=pos + 1)
        pos += stride + 1
        prev = out[y - 1] if y > 0 else np.zeros(stride, dtype=np.uint8)
        if ftype == 0:
            out[y] = line
        elif ftype == 1:  # Sub: cumulative per channel offset
            rec = line.astype(np.int64).reshape(-1, bpp)
            out[y] = (np.cumsum(rec, axis=0) % 256).astype(np.uint8).reshape(-1)
        elif ftype == 2:  # Up
            out[y] = line + prev
        elif ftype == 3:  # Average
            row = out[y]
            for i in range(stride):
                left = int(row[i - bpp]) if i >= bpp else 0
                row[i] = (int(line[i]) + (left + int(prev[i])) // 2) & 0xFF
        elif ftype == 4:  # Paeth
            row = out[y]
            for i in range(stride):
                a = int(row[i - bpp]) if i >= bpp else 0
                b = int(prev[i])
                c = int(prev[i - bpp]) if i >= bpp else 0
                p = a + b - c
                pa, pb, pc = abs(p - a), abs(p - b), abs(p - c)
                if pa <= pb and pa <= pc:
                    pred = a
                elif pb <= pc:
                    pred = b
                else:
                    pred = c
                row[i] = (int(line[i]) + pred) & 0xFF
        else:
            raise DecodeError(f"unknown PNG filter type {ftype}")
    return out


def _to_luma(rgb: np.ndarray) -> np.ndarray:
    r = rgb[..., 0].astype(np.float64)
    g = rgb[..., 1].astype(np.float64)
    b = rgb[..., 2].astype(np.float64)
    return np.clip(np.rint(0.299 * r + 0.587 * g + 0.114 * b), 0, 255).astype(np.uint8)


def decode_png(data: bytes) -> GrayImage:
    """Decode an 8-bit, non-interlaced PNG into a gray image."""
    if data[:8] != PNG_SIGNATURE:
        raise DecodeError("not a PNG file")
    pos = 8
    ihdr = None
    palette = None
    idat = bytearray()
    while pos + 8 <= len(data):
        length, ctype = struct.unpack(">I4s", data[pos:pos + 8])
        chunk = data[pos + 8:pos + 8 + length]
        pos += 12 + length
        if ctype == b"IHDR":
            ihdr = struct.unpack(">IIBBBBB", chunk)
        elif ctype == b"PLTE":
            palette = np.frombuffer(chunk, dtype=np.uint8).reshape(-1, 3)
        elif ctype == b"IDAT":
            idat.extend(chunk)
        elif ctype == b"IEND":
            break
    if ihdr is None:
        raise DecodeError("PNG missing IHDR")
    width, height, depth, color, comp, filt, interlace = ihdr
    if depth != 8:
        raise DecodeError(f"only 8-bit PNG supported, depth={depth}")
    if comp != 0 or filt != 0:
        raise DecodeError("unsupported PNG compression/filter method")
    if interlace != 0:
        raise DecodeError("interlaced PNG not supported")
    channels = {0: 1, 2: 3, 3: 1, 4: 2, 6: 4}.get(color)
    if channels is None:
        raise DecodeError(f"unsupported PNG color type {color}")
    try:
        raw = zlib.decompress(bytes(idat))
    except zlib.error as exc:
        raise DecodeError(f"corrupt PNG stream: {exc}") from exc
    expect = height * (width * channels + 1)
    if len(raw) < expect:
        raise DecodeError("PNG pixel data truncated")
    flat = _unfilter_scanlines(raw, width, height, channels)

    if color == 0:
        return flat.copy()
    if color == 3:
        if palette is None:
            raise DecodeError("palette PNG missing PLTE")
        rgb = palette[flat.reshape(height, width)]
        return _to_luma(rgb)
    px = flat.reshape(height, width, channels)
    if color == 4:  # gray + alpha, composite over white
        gray = px[..., 0].astype(np.int64)
        alpha = px[..., 1].astype(np.int64)
        val = (gray * alpha + 255 * (255 - alpha) + 127) // 255
        return val.astype(np.uint8)
    if color == 6:  # RGBA, composite over white then luma
        alpha = px[..., 3].astype(np.int64)
        rgb = (px[..., :3].astype(np.int64) * alpha[..., None]
               + 255 * (255 - alpha[..., None]) + 127) // 255
        return _to_luma(rgb.astype(np.uint8))
    return _to_luma(px)  # color == 2, plain RGB


# ---------------------------------------------------------------------------
# file-level helpers


def read_gray(path) -> GrayImage:
    """Load a gray image from PGM (P5) or PNG; PBM loads as 0/255."""
    data = Path(path).read_bytes()
    if data[:2] == b"P5":
        return decode_pgm(data)
    if data[:2] == b"P4":
        return np.where(decode_pbm(data), 0, 255).astype(np.uint8)
    if data[:8] == PNG_SIGNATURE:
        return decode_png(data)
    raise DecodeError(f"{path}: unrecognized image format")


def read_mask(path) -> BinaryImage:
    """Load a binary mask; gray sources map intensity < 128 to ink."""
    data = Path(path).read_bytes()
    if data[:2] == b"P4":
        return decode_pbm(data)
    if data[:2] == b"P5":
        return decode_pgm(data) < 128
    if data[:8] == PNG_SIGNATURE:
        return decode_png(data) < 128
    raise DecodeError(f"{path}: unrecognized image format")


def write_gray(path, img: GrayImage) -> None:
    Path(path).write_bytes(encode_pgm(img))


def write_mask(path, mask: BinaryImage) -> None:
    """Write a mask: P4 for ``.pbm`` paths, otherwise P5 with ink = 0."""
    path = Path(path)
    if path.suffix.lower() == ".pbm":
        path.write_bytes(encode_pbm(mask))
    else:
        mask = as_mask(mask)
        path.write_bytes(encode_pgm(np.where(mask, 0, 255).astype(np.uint8)))


def mask_to_gray(mask: BinaryImage) -> GrayImage:
    """Render a mask as an 8-bit image, ink = 0, background = 255."""
    return np.where(as_mask(mask), 0, 255).astype(np.uint8)
