"""Deterministic seed derivation.

A single master seed fans out to sub-seeds through a splitmix64 chain:
``derive_seed(master, a, b, ...)`` mixes each path component in turn, so
independent jobs (trees, folds, repeats) get decorrelated, reproducible
seeds and partial re-runs match full runs.
"""

from __future__ import annotations

_MASK = (1 << 64) - 1
_GOLDEN = 0x9E3779B97F4A7C15


def splitmix64(state: int) -> int:
    """One splitmix64 output step for the given 64-bit state."""
    z = (state + _GOLDEN) & _MASK
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK
    return (z ^ (z >> 31)) & _MASK


def derive_seed(master: int, *path: int) -> int:
    """Derive a sub-seed from ``master`` and a sequence of path indices."""
    s = master & _MASK
    for p in path:
        s = splitmix64(s ^ ((p * _GOLDEN) & _MASK))
    return s
