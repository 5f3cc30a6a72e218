"""Deterministic named random substreams.

Every random draw in the engine flows from a single root seed through a
tree of named substreams, so that independent consumers (candidate
sampling, CE iterations, RRT* queries, ...) cannot perturb each other's
sequences.  Stream identity is derived from the label path with SHA-256,
which is stable across platforms and Python processes (unlike ``hash``).
"""

from __future__ import annotations

import hashlib

import numpy as np


def _encode_labels(labels) -> list[int]:
    words = []
    for label in labels:
        digest = hashlib.sha256(repr(label).encode("utf-8")).digest()
        words.append(int.from_bytes(digest[:4], "big"))
    return words


class Stream:
    """A node in the substream tree; wraps a ``numpy`` generator factory."""

    def __init__(self, seed: int, path: tuple = ()):
        self.seed = int(seed)
        self.path = tuple(path)

    def child(self, *labels) -> "Stream":
        return Stream(self.seed, self.path + labels)

    def generator(self) -> np.random.Generator:
        entropy = [self.seed & 0xFFFFFFFF, (self.seed >> 32) & 0xFFFFFFFF]
        entropy.extend(_encode_labels(self.path))
        return np.random.Generator(np.random.PCG64(np.random.SeedSequence(entropy)))

    def __repr__(self):
        return f"Stream(seed={self.seed}, path={self.path!r})"


def substream(seed: int, *labels) -> np.random.Generator:
    """Shorthand: generator for the substream at ``labels`` under ``seed``."""
    return Stream(seed).child(*labels).generator()
