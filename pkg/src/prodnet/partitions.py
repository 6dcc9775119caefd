"""Set partitions of ``{0, .., n-1}`` via restricted growth strings."""
from __future__ import annotations

from typing import Iterator, Sequence

from .errors import CapExceededError, ModelError

Partition = tuple[tuple[int, ...], ...]

DEFAULT_PARTITION_CAP = 6


def restricted_growth_strings(n: int) -> Iterator[tuple[int, ...]]:
    """All strings ``s`` with ``s[0] = 0`` and ``s[k] <= 1 + max(s[:k])``, lexicographic."""
    if n == 0:
        yield ()
        return
    s = [0] * n
    top = [0] * n  # top[k] = max(s[:k + 1])
    while True:
        yield tuple(s)
        k = n - 1
        while k > 0 and s[k] > top[k - 1]:
            k -= 1
        if k == 0:
            return
        s[k] += 1
        top[k] = max(top[k - 1], s[k])
        for t in range(k + 1, n):
            s[t] = 0
            top[t] = top[k]


def from_rgs(rgs: Sequence[int]) -> Partition:
    blocks: dict[int, list[int]] = {}
    for element, label in enumerate(rgs):
        blocks.setdefault(label, []).append(element)
    return tuple(tuple(blocks[k]) for k in sorted(blocks))


def to_rgs(partition: Sequence[Sequence[int]], n: int) -> tuple[int, ...]:
    label = [0] * n
    # canonical order lists blocks by smallest element, i.e. by first appearance
    for k, block in enumerate(canonical(partition, n)):
        for e in block:
            label[e] = k
    return tuple(label)


def canonical(partition: Sequence[Sequence[int]], n: int) -> Partition:
    """Validate a partition of ``range(n)`` and put it in canonical order."""
    blocks = [tuple(sorted(int(e) for e in block)) for block in partition]
    flat = [e for block in blocks for e in block]
    if any(len(b) == 0 for b in blocks):
        raise ModelError("partition blocks must be non-empty")
    if sorted(flat) != list(range(n)):
        raise ModelError(f"not a partition of {{0..{n - 1}}}: {partition!r}")
    return tuple(sorted(blocks))


def set_partitions(n: int, cap: int = DEFAULT_PARTITION_CAP) -> list[Partition]:
    if n > cap:
        raise CapExceededError("partition cap", cap, n)
    return [from_rgs(s) for s in restricted_growth_strings(n)]


def islands(n: int) -> Partition:
    return tuple((c,) for c in range(n))


def fully_connected(n: int) -> Partition:
    return (tuple(range(n)),)


def bell_number(n: int) -> int:
    """Bell numbers via the Bell triangle."""
    row = [1]
    for _ in range(n):
        nxt = [row[-1]]
        for x in row:
            nxt.append(nxt[-1] + x)
        row = nxt
    return row[0]
