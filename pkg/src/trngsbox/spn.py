"""Substitution-permutation image cipher and its plaintext-sensitivity scores.

Each RGB channel is enciphered on its own by 16 rounds of: XOR with the
round subkey, bytewise substitution through the round S-box, and a
permutation of the channel's bits through the round P-box. Permuting at
bit level spreads every substituted byte over several output bytes, which
is what lets a one-pixel change reach the whole channel.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import numpy as np

from . import sbox as sbox_mod
from .entropy.bits import BitReader, BitStream
from .errors import DimensionMismatch, InsufficientBits, LengthMismatch, ParseError
from .sbox import SBox

log = logging.getLogger(__name__)

ROUNDS = 16
MATERIAL_MAGIC = "trngsbox-spn-material 1"


@dataclass(frozen=True, eq=False)
class RoundMaterial:
    sboxes: tuple[SBox, ...]
    pboxes: tuple[np.ndarray, ...]  # bit permutations: out bit j = in bit pbox[j]
    keys: tuple[np.ndarray, ...]

    def __post_init__(self):
        rounds = len(self.sboxes)
        if not (rounds == len(self.pboxes) == len(self.keys)) or rounds == 0:
            raise ValueError("sboxes, pboxes and keys must have the same nonzero count")
        length = len(self.keys[0])
        pboxes, keys = [], []
        for i, (p, k) in enumerate(zip(self.pboxes, self.keys)):
            p = np.asarray(p, dtype=np.int64)
            k = np.asarray(k, dtype=np.uint8)
            if len(k) != length:
                raise LengthMismatch(f"key {i} has {len(k)} bytes, expected {length}")
            if len(p) != 8 * length or not np.array_equal(np.sort(p), np.arange(8 * length)):
                raise ValueError(f"pbox {i} is not a permutation of {8 * length} bit positions")
            p.setflags(write=False)
            k.setflags(write=False)
            pboxes.append(p)
            keys.append(k)
        object.__setattr__(self, "sboxes", tuple(self.sboxes))
        object.__setattr__(self, "pboxes", tuple(pboxes))
        object.__setattr__(self, "keys", tuple(keys))

    @property
    def rounds(self) -> int:
        return len(self.sboxes)

    @property
    def channel_len(self) -> int:
        return len(self.keys[0])

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, RoundMaterial)
            and self.sboxes == other.sboxes
            and all(np.array_equal(a, b) for a, b in zip(self.pboxes, other.pboxes))
            and all(np.array_equal(a, b) for a, b in zip(self.keys, other.keys))
            and self.rounds == other.rounds
        )

    @classmethod
    def identity(cls, channel_len: int, rounds: int = ROUNDS) -> RoundMaterial:
        ident = SBox.identity()
        return cls(
            (ident,) * rounds,
            (np.arange(8 * channel_len),) * rounds,
            (np.zeros(channel_len, dtype=np.uint8),) * rounds,
        )


def derive_material(
    bits: BitStream,
    channel_len: int,
    sboxes: Sequence[SBox] | None = None,
    rounds: int = ROUNDS,
) -> RoundMaterial:
    """Round keys, P-boxes and S-boxes drawn from an entropy stream.

    Keys take ``channel_len`` raw bytes per round. Each P-box is a shuffle
    of the channel's bit positions seeded with the next 64 bits. S-boxes
    come from ``sboxes`` (cycled if fewer than ``rounds``) or, when none
    are given, are constructed from the remaining bits.
    """
    reader = BitReader(bits)
    try:
        keys = [np.packbits(reader.take(8 * channel_len)) for _ in range(rounds)]
        seeds = [reader.take_int(64) for _ in range(rounds)]
    except InsufficientBits:
        need = rounds * (8 * channel_len + 64)
        raise InsufficientBits(
            f"material for {rounds} rounds of {channel_len} bytes needs {need} bits, "
            f"got {len(bits)}"
        ) from None
    pboxes = [np.random.default_rng(seed).permutation(8 * channel_len) for seed in seeds]
    if sboxes:
        chosen = [sboxes[i % len(sboxes)] for i in range(rounds)]
    else:
        from .walker import construct_sboxes

        chosen = construct_sboxes(bits[reader.pos:], rounds)
    return RoundMaterial(tuple(chosen), tuple(pboxes), tuple(keys))


def _check_plane(plane, m: RoundMaterial) -> np.ndarray:
    plane = np.asarray(plane, dtype=np.uint8).reshape(-1)
    if len(plane) != m.channel_len:
        raise LengthMismatch(
            f"channel has {len(plane)} bytes but material is for {m.channel_len}"
        )
    return plane


def encrypt_channel(plain, m: RoundMaterial) -> np.ndarray:
    state = _check_plane(plain, m)
    for s, p, k in zip(m.sboxes, m.pboxes, m.keys):
        state = s.array[state ^ k]
        state = np.packbits(np.unpackbits(state)[p])
    return state


def decrypt_channel(cipher, m: RoundMaterial) -> np.ndarray:
    state = _check_plane(cipher, m)
    for s, p, k in zip(reversed(m.sboxes), reversed(m.pboxes), reversed(m.keys)):
        bits = np.empty(len(p), dtype=np.uint8)
        bits[p] = np.unpackbits(state)
        state = sbox_mod.reverse_sbox(s).array[np.packbits(bits)] ^ k
    return state


@dataclass(frozen=True, eq=False)
class ImageBuffer:
    pixels: np.ndarray  # (height, width, 3) uint8

    def __post_init__(self):
        px = np.ascontiguousarray(self.pixels, dtype=np.uint8)
        if px.ndim != 3 or px.shape[2] != 3:
            raise ValueError(f"expected (height, width, 3) pixels, got {px.shape}")
        object.__setattr__(self, "pixels", px)

    @property
    def width(self) -> int:
        return self.pixels.shape[1]

    @property
    def height(self) -> int:
        return self.pixels.shape[0]

    def channel(self, i: int) -> np.ndarray:
        return self.pixels[:, :, i].reshape(-1)

    def __eq__(self, other) -> bool:
        return isinstance(other, ImageBuffer) and np.array_equal(self.pixels, other.pixels)

    @classmethod
    def from_channels(cls, width: int, height: int, planes: Sequence[np.ndarray]) -> ImageBuffer:
        return cls(np.stack([np.asarray(p).reshape(height, width) for p in planes], axis=2))


def _map_channels(img: ImageBuffer, m: RoundMaterial, func) -> ImageBuffer:
    planes = [func(img.channel(i), m) for i in range(3)]
    return ImageBuffer.from_channels(img.width, img.height, planes)


def encrypt_image(img: ImageBuffer, m: RoundMaterial) -> ImageBuffer:
    return _map_channels(img, m, encrypt_channel)


def decrypt_image(img: ImageBuffer, m: RoundMaterial) -> ImageBuffer:
    return _map_channels(img, m, decrypt_channel)


def _pair(c1: ImageBuffer, c2: ImageBuffer) -> tuple[np.ndarray, np.ndarray]:
    if c1.pixels.shape != c2.pixels.shape:
        raise DimensionMismatch(f"{c1.pixels.shape} vs {c2.pixels.shape}")
    return c1.pixels.astype(np.int64), c2.pixels.astype(np.int64)


def npcr(c1: ImageBuffer, c2: ImageBuffer) -> np.ndarray:
    """Per-channel percentage of pixel positions that differ."""
    a, b = _pair(c1, c2)
    return 100.0 * (a != b).mean(axis=(0, 1))


def uaci(c1: ImageBuffer, c2: ImageBuffer) -> np.ndarray:
    """Per-channel mean absolute intensity difference, as a percentage of 255."""
    a, b = _pair(c1, c2)
    return 100.0 * np.abs(a - b).mean(axis=(0, 1)) / 255.0


def one_pixel_twin(img: ImageBuffer, where: tuple[int, int] | None = None) -> ImageBuffer:
    """Copy of ``img`` with the low bit of every channel flipped at one pixel."""
    px = img.pixels.copy()
    r, c = where if where is not None else (img.height // 2, img.width // 2)
    px[r, c] ^= 1
    return ImageBuffer(px)


def sensitivity(img: ImageBuffer, m: RoundMaterial, where=None) -> tuple[np.ndarray, np.ndarray]:
    c1 = encrypt_image(img, m)
    c2 = encrypt_image(one_pixel_twin(img, where), m)
    return npcr(c1, c2), uaci(c1, c2)


# image I/O

def read_ppm(path) -> ImageBuffer:
    data = Path(path).read_bytes()
    fields, pos = [], 0
    while len(fields) < 4:
        while pos < len(data) and data[pos:pos + 1].isspace():
            pos += 1
        if data[pos:pos + 1] == b"#":
            while pos < len(data) and data[pos:pos + 1] not in (b"\n", b"\r"):
                pos += 1
            continue
        start = pos
        while pos < len(data) and not data[pos:pos + 1].isspace():
            pos += 1
        if start == pos:
            raise ParseError("truncated PPM header")
        fields.append(data[start:pos])
    if fields[0] != b"P6":
        raise ParseError(f"not a binary PPM (magic {fields[0]!r})")
    width, height, maxval = (int(f) for f in fields[1:])
    if maxval != 255:
        raise ParseError(f"only 8-bit PPM supported, maxval {maxval}")
    pos += 1  # single whitespace byte after maxval
    body = np.frombuffer(data[pos:pos + width * height * 3], dtype=np.uint8)
    if body.size != width * height * 3:
        raise ParseError("PPM pixel data truncated")
    return ImageBuffer(body.reshape(height, width, 3))


def write_ppm(img: ImageBuffer, path) -> None:
    header = f"P6\n{img.width} {img.height}\n255\n".encode("ascii")
    Path(path).write_bytes(header + img.pixels.tobytes())


def read_raw(path) -> ImageBuffer:
    """Raw interleaved RGB; dimensions come from the ``<path>.dims`` sidecar."""
    width, height = (int(v) for v in Path(str(path) + ".dims").read_text().split())
    body = np.frombuffer(Path(path).read_bytes(), dtype=np.uint8)
    if body.size != width * height * 3:
        raise DimensionMismatch(f"raw file holds {body.size} bytes, expected {width * height * 3}")
    return ImageBuffer(body.reshape(height, width, 3))


def write_raw(img: ImageBuffer, path) -> None:
    Path(path).write_bytes(img.pixels.tobytes())
    Path(str(path) + ".dims").write_text(f"{img.width} {img.height}\n")


def read_image(path) -> ImageBuffer:
    path = Path(path)
    if path.suffix.lower() in (".ppm", ".pnm"):
        return read_ppm(path)
    return read_raw(path)


def write_image(img: ImageBuffer, path) -> None:
    path = Path(path)
    if path.suffix.lower() in (".ppm", ".pnm"):
        write_ppm(img, path)
    else:
        write_raw(img, path)


# material files

def dump_material(m: RoundMaterial) -> str:
    out = [MATERIAL_MAGIC, f"channel_len {m.channel_len}", f"rounds {m.rounds}"]
    for i, s in enumerate(m.sboxes):
        out.append(f"sbox {i}")
        out.append(sbox_mod.serialize(s).rstrip("\n"))
    for i, p in enumerate(m.pboxes):
        out.append(f"pbox {i}")
        out.append(" ".join(map(str, p.tolist())))
    for i, k in enumerate(m.keys):
        out.append(f"key {i}")
        out.append(k.tobytes().hex())
    return "\n".join(out) + "\n"


def load_material(text: str) -> RoundMaterial:
    lines = text.splitlines()
    if not lines or lines[0].strip() != MATERIAL_MAGIC:
        raise ParseError("missing material header", row=1)
    try:
        channel_len = int(lines[1].split()[1])
        rounds = int(lines[2].split()[1])
    except (IndexError, ValueError):
        raise ParseError("bad channel_len/rounds header", row=2) from None
    pos = 3

    def expect(tag: str, i: int) -> None:
        nonlocal pos
        if pos >= len(lines) or lines[pos].split() != [tag, str(i)]:
            raise ParseError(f"expected '{tag} {i}'", row=pos + 1)
        pos += 1

    sboxes, pboxes, keys = [], [], []
    for i in range(rounds):
        expect("sbox", i)
        sboxes.append(sbox_mod.parse("\n".join(lines[pos:pos + 16]), sbox_mod.GRID16))
        pos += 16
    for i in range(rounds):
        expect("pbox", i)
        try:
            pboxes.append(np.array([int(v) for v in lines[pos].split()], dtype=np.int64))
        except (IndexError, ValueError):
            raise ParseError("bad permutation line", row=pos + 1) from None
        pos += 1
    for i in range(rounds):
        expect("key", i)
        try:
            key = np.frombuffer(bytes.fromhex(lines[pos].strip()), dtype=np.uint8)
        except (IndexError, ValueError):
            raise ParseError("bad key line", row=pos + 1) from None
        if len(key) != channel_len:
            raise LengthMismatch(f"key {i} has {len(key)} bytes, header says {channel_len}")
        keys.append(key)
        pos += 1
    return RoundMaterial(tuple(sboxes), tuple(pboxes), tuple(keys))


def save_material(m: RoundMaterial, path) -> None:
    Path(path).write_text(dump_material(m), encoding="ascii")


def read_material(path) -> RoundMaterial:
    return load_material(Path(path).read_text(encoding="ascii"))
