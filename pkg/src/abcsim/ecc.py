"""Redundancy schemes for the body link: packet repetition and linear block codes.

Bits are uint8 numpy arrays. Only the frame payload is coded; start and stop
bits stay outside the code because the receiver uses them for framing.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from itertools import product

import numpy as np


class EccConfigError(ValueError):
    pass


class LinearBlockCode:
    """Binary (n, k) linear block code with single-error syndrome decoding.

    ``generator`` is k x n, ``parity_check`` is (n-k) x n, and G H^T = 0 over
    GF(2) is enforced.
    """

    def __init__(self, generator, parity_check, name: str | None = None):
        g = np.asarray(generator, dtype=np.uint8) % 2
        h = np.asarray(parity_check, dtype=np.uint8) % 2
        if g.ndim != 2 or h.ndim != 2 or g.shape[1] != h.shape[1]:
            raise EccConfigError("generator and parity_check must be matrices with n columns")
        if np.any((g.astype(int) @ h.T.astype(int)) % 2):
            raise EccConfigError("generator and parity_check are inconsistent: G H^T != 0")
        self.k, self.n = g.shape
        if h.shape[0] != self.n - self.k:
            raise EccConfigError(f"parity_check needs {self.n - self.k} rows, has {h.shape[0]}")
        self.generator = g
        self.parity_check = h
        self.name = name or f"linear({self.n},{self.k})"

        # codeword -> message, for recovering messages from non-systematic codes
        self._messages = {}
        for msg in product((0, 1), repeat=self.k):
            word = self._encode_block(np.array(msg, dtype=np.uint8))
            if word.tobytes() in self._messages:
                raise EccConfigError("generator matrix is not full rank")
            self._messages[word.tobytes()] = np.array(msg, dtype=np.uint8)
        self._codewords = np.array(
            [np.frombuffer(w, dtype=np.uint8) for w in self._messages], dtype=np.uint8
        )
        # syndrome of a single flip at position j is column j of H
        self._flip_for_syndrome = {}
        for j in range(self.n):
            key = h[:, j].tobytes()
            if any(h[:, j]) and key not in self._flip_for_syndrome:
                self._flip_for_syndrome[key] = j

    def _encode_block(self, msg):
        return ((msg.astype(int) @ self.generator.astype(int)) % 2).astype(np.uint8)

    def encode(self, bits) -> np.ndarray:
        bits = np.asarray(bits, dtype=np.uint8)
        if bits.size % self.k:
            raise EccConfigError(f"{bits.size} message bits not divisible by k={self.k}")
        blocks = bits.reshape(-1, self.k)
        return ((blocks.astype(int) @ self.generator.astype(int)) % 2).astype(np.uint8).ravel()

    def syndrome(self, word) -> np.ndarray:
        return ((self.parity_check.astype(int) @ np.asarray(word, dtype=int)) % 2).astype(np.uint8)

    def decode(self, bits) -> tuple[np.ndarray, int, int]:
        """Returns (message bits, corrected blocks, uncorrectable blocks).

        Uncorrectable blocks fall back to the nearest codeword.
        """
        bits = np.asarray(bits, dtype=np.uint8)
        if bits.size % self.n:
            raise EccConfigError(f"{bits.size} coded bits not divisible by n={self.n}")
        out = []
        corrected = uncorrectable = 0
        for word in bits.reshape(-1, self.n):
            word = word.copy()
            s = self.syndrome(word)
            if s.any():
                j = self._flip_for_syndrome.get(s.tobytes())
                if j is not None:
                    word[j] ^= 1
                    corrected += 1
                else:
                    uncorrectable += 1
                    dist = np.count_nonzero(self._codewords != word, axis=1)
                    word = self._codewords[int(np.argmin(dist))]
            out.append(self._messages[word.tobytes()])
        return np.concatenate(out) if out else np.zeros(0, np.uint8), corrected, uncorrectable

    @property
    def min_distance(self) -> int:
        weights = np.count_nonzero(self._codewords, axis=1)
        return int(weights[weights > 0].min())

    def __repr__(self):
        return f"LinearBlockCode({self.name})"


def hamming74() -> LinearBlockCode:
    """Systematic Hamming(7,4): message bits first, then three parity bits."""
    p = np.array([[1, 1, 0], [1, 0, 1], [0, 1, 1], [1, 1, 1]], dtype=np.uint8)
    g = np.hstack([np.eye(4, dtype=np.uint8), p])
    h = np.hstack([p.T, np.eye(3, dtype=np.uint8)])
    return LinearBlockCode(g, h, name="hamming74")


@dataclass(frozen=True)
class EccConfig:
    """``repetition`` copies of each frame (1 = no repetition) and an optional block code."""

    repetition: int = 1
    code: LinearBlockCode | None = field(default=None, compare=False)

    def __post_init__(self):
        if not isinstance(self.repetition, int) or self.repetition < 1:
            raise EccConfigError(f"repetition must be an integer >= 1, got {self.repetition!r}")

    @property
    def scheme(self) -> str:
        parts = []
        if self.repetition > 1:
            parts.append("repetition")
        if self.code is not None:
            parts.append("linear_block")
        return "+".join(parts) or "none"

    def coded_payload_bits(self, payload_bits: int = 24) -> int:
        if self.code is None:
            return payload_bits
        if payload_bits % self.code.k:
            raise EccConfigError(
                f"payload of {payload_bits} bits not divisible by code k={self.code.k}"
            )
        return payload_bits // self.code.k * self.code.n


NONE = EccConfig()


def encode(bits, config: EccConfig) -> np.ndarray:
    """Payload bits -> coded payload bits (block code only; repetition acts on frames)."""
    bits = np.asarray(bits, dtype=np.uint8)
    if config.code is None:
        return bits.copy()
    return config.code.encode(bits)


def decode(bits, config: EccConfig) -> tuple[np.ndarray, int, int]:
    """Coded payload bits -> (payload bits, corrected blocks, uncorrectable blocks)."""
    bits = np.asarray(bits, dtype=np.uint8)
    if config.code is None:
        return bits.copy(), 0, 0
    return config.code.decode(bits)


def repeat_frames(frames: list, config: EccConfig) -> list:
    """Each frame emitted ``repetition`` times back to back."""
    return [f for f in frames for _ in range(config.repetition)]


def select_copy(copies) -> tuple[int, object] | None:
    """First-valid-copy rule for repeated frames.

    ``copies`` is a sequence of candidates in transmit order, ``None`` for a
    copy that never arrived or failed validation. Returns ``(index, copy)`` of
    the winner or ``None`` when every copy is lost.
    """
    for i, c in enumerate(copies):
        if c is not None:
            return i, c
    return None
