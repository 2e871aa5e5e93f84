"""Class / sub-class layout of the augmented dataset.

Data points are indexed sub-class-contiguously: the first ``sizes[0]`` rows
belong to sub-class 0, the next ``sizes[1]`` to sub-class 1, and so on.
Each sub-class belongs to exactly one class; several sub-classes may share
a class (e.g. two visually distinct clusters carrying the same label).
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from typing import Sequence

import numpy as np


@dataclass(frozen=True)
class SubclassStructure:
    """Immutable layout: sub-class sizes and the sub-class -> class map."""

    sizes: tuple[int, ...]
    class_of: tuple[int, ...]

    def __post_init__(self):
        sizes = tuple(int(s) for s in self.sizes)
        class_of = tuple(int(c) for c in self.class_of)
        object.__setattr__(self, "sizes", sizes)
        object.__setattr__(self, "class_of", class_of)
        if len(sizes) != len(class_of):
            raise ValueError(
                f"sizes has {len(sizes)} entries but class_of has {len(class_of)}"
            )
        if any(s < 2 for s in sizes):
            raise ValueError(f"every sub-class needs at least 2 points, got {sizes}")
        k = self.num_classes
        if k < 2:
            raise ValueError(f"need at least 2 classes, got {k}")
        # covering classes 0..k-1 with one label per sub-class forces K_bar >= K
        if set(class_of) != set(range(k)):
            raise ValueError(
                f"class indices must be exactly 0..{k - 1}, got {sorted(set(class_of))}"
            )

    @property
    def num_subclasses(self) -> int:
        return len(self.sizes)

    @property
    def num_classes(self) -> int:
        return max(self.class_of) + 1

    @property
    def total(self) -> int:
        return sum(self.sizes)

    @property
    def n_min(self) -> int:
        return min(self.sizes)

    @property
    def n_max(self) -> int:
        return max(self.sizes)

    @property
    def offsets(self) -> tuple[int, ...]:
        """Start index of each sub-class block."""
        out, acc = [], 0
        for s in self.sizes:
            out.append(acc)
            acc += s
        return tuple(out)

    def subclass_slice(self, k: int) -> slice:
        start = self.offsets[k]
        return slice(start, start + self.sizes[k])

    def subclass_slices(self) -> list[slice]:
        return [self.subclass_slice(k) for k in range(self.num_subclasses)]

    def subclasses_of_class(self, c: int) -> tuple[int, ...]:
        return tuple(k for k, cc in enumerate(self.class_of) if cc == c)

    def subclass_of_rows(self) -> np.ndarray:
        """Length-n vector mapping row index -> sub-class index."""
        return np.repeat(np.arange(self.num_subclasses), self.sizes)

    def class_of_rows(self) -> np.ndarray:
        """Length-n vector mapping row index -> class index."""
        return np.repeat(np.asarray(self.class_of), self.sizes)

    @classmethod
    def balanced(cls, num_classes: int, num_subclasses: int, block_size: int) -> "SubclassStructure":
        """Equal-size sub-classes dealt to classes contiguously.

        The first ``num_subclasses // num_classes`` (plus one for the leading
        remainder classes) sub-classes go to class 0, and so on.
        """
        if num_subclasses < num_classes:
            raise ValueError("need at least one sub-class per class")
        base, extra = divmod(num_subclasses, num_classes)
        class_of: list[int] = []
        for c in range(num_classes):
            class_of.extend([c] * (base + (1 if c < extra else 0)))
        return cls(sizes=(block_size,) * num_subclasses, class_of=tuple(class_of))

    @classmethod
    def from_sizes(cls, sizes: Sequence[int], class_of: Sequence[int]) -> "SubclassStructure":
        return cls(sizes=tuple(sizes), class_of=tuple(class_of))


@lru_cache(maxsize=64)
def in_block_mask(structure: SubclassStructure) -> np.ndarray:
    """Boolean n x n mask of same-sub-class pairs (diagonal included)."""
    labels = structure.subclass_of_rows()
    mask = labels[:, None] == labels[None, :]
    mask.setflags(write=False)
    return mask
