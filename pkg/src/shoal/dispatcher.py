"""Keyword dispatcher: folder-defined vocabularies map tasks to plane coordinates.

A *field* is a directory whose text-file names form an ordered keyword
vocabulary. A task *item* is a text file naming its field plus the keywords
it contains. The item's keyword-presence bit vector, split into a lower and
an upper half and read as two binary numbers (first keyword = least
significant bit), yields integer coordinates (x, y) on a 2-D plane.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Sequence

__all__ = [
    "DispatcherError",
    "KeywordField",
    "TaskItem",
    "TaskCoordinates",
    "load_fields",
    "load_items",
    "make_item",
    "encode_bits",
    "split_halves",
    "bits_to_decimal",
    "coordinates",
    "plane_size",
]

# Larger vocabularies would overflow a signed 64-bit coordinate.
MAX_FIELD_KEYWORDS = 126


class DispatcherError(ValueError):
    """Malformed field/item folders or unknown domain/keyword references."""


@dataclass(frozen=True)
class KeywordField:
    """Named, ordered keyword vocabulary; the first keyword is the least
    significant bit of the presence encoding."""

    name: str
    keywords: tuple[str, ...]

    def __post_init__(self):
        if not self.keywords:
            raise DispatcherError(f"field '{self.name}' has no keywords")
        if len(self.keywords) > MAX_FIELD_KEYWORDS:
            raise DispatcherError(
                f"field '{self.name}' has {len(self.keywords)} keywords; at most {MAX_FIELD_KEYWORDS} are supported"
            )
        folded = [kw.casefold() for kw in self.keywords]
        if len(set(folded)) != len(folded):
            dupes = sorted({kw for kw in folded if folded.count(kw) > 1})
            raise DispatcherError(f"field '{self.name}' has duplicate keywords after case-folding: {dupes}")


@dataclass(frozen=True)
class TaskItem:
    """One task: its name, the field that scopes it and its keyword set."""

    name: str
    field_name: str
    keywords: frozenset[str]


@dataclass(frozen=True)
class TaskCoordinates:
    """Integer plane position decoded from a task's keyword presence."""

    x: int
    y: int


def _text_files(directory: Path) -> list[Path]:
    return sorted((p for p in directory.iterdir() if p.is_file() and p.suffix.lower() == ".txt"),
                  key=lambda p: p.name)


def load_fields(root_path) -> list[KeywordField]:
    """Load one field per subdirectory of ``root_path``.

    Keywords are the case-folded base names of the ``.txt`` files inside
    each subdirectory, ordered lexicographically ascending so the result
    is independent of directory listing order. File contents are ignored.
    """
    root = Path(root_path)
    if not root.is_dir():
        raise DispatcherError(f"fields root '{root}' is not a directory")
    subdirs = sorted((p for p in root.iterdir() if p.is_dir()), key=lambda p: p.name)
    if not subdirs:
        raise DispatcherError(f"fields root '{root}' contains no field directories")
    fields = []
    for sub in subdirs:
        stems = [p.stem for p in _text_files(sub)]
        if not stems:
            raise DispatcherError(f"field '{sub.name}' has no keywords")
        folded = sorted(stem.casefold() for stem in stems)
        collisions = sorted({kw for kw in folded if folded.count(kw) > 1})
        if collisions:
            raise DispatcherError(f"field '{sub.name}' has duplicate keywords after case-folding: {collisions}")
        fields.append(KeywordField(name=sub.name, keywords=tuple(folded)))
    return fields


def make_item(field: KeywordField, name: str, keywords: Iterable[str], strict: bool = True) -> TaskItem:
    """Build a task item from raw keywords, case-folding each one.

    Unknown keywords raise in strict mode and are dropped in lenient mode.
    """
    folded = {kw.casefold() for kw in keywords}
    unknown = sorted(folded - set(field.keywords))
    if unknown:
        if strict:
            raise DispatcherError(f"item '{name}' uses keywords unknown to field '{field.name}': {unknown}")
        folded -= set(unknown)
    return TaskItem(name=name, field_name=field.name, keywords=frozenset(folded))


def load_items(root_path, fields: Sequence[KeywordField], strict: bool = True) -> list[TaskItem]:
    """Load one task item per ``.txt`` file under ``root_path``.

    File format: first non-blank line is the field (domain) name, every
    following non-blank line is one keyword.
    """
    root = Path(root_path)
    if not root.is_dir():
        raise DispatcherError(f"items root '{root}' is not a directory")
    by_name = {f.name: f for f in fields}
    items = []
    for path in _text_files(root):
        lines = [line.strip() for line in path.read_text(encoding="utf-8").splitlines()]
        lines = [line for line in lines if line]
        if not lines:
            raise DispatcherError(f"item '{path.stem}' is empty")
        domain = lines[0]
        if domain not in by_name:
            raise DispatcherError(f"item '{path.stem}' names unknown domain '{domain}'")
        items.append(make_item(by_name[domain], path.stem, lines[1:], strict=strict))
    return items


def encode_bits(field: KeywordField, item: TaskItem) -> list[int]:
    """Keyword-presence bits in field order; index 0 is the LSB."""
    if item.field_name != field.name:
        raise DispatcherError(f"item '{item.name}' belongs to field '{item.field_name}', not '{field.name}'")
    return [1 if kw in item.keywords else 0 for kw in field.keywords]


def split_halves(bits: Sequence[int]) -> tuple[list[int], list[int]]:
    """Split into the lower ceil(n/2) bits and the upper floor(n/2) bits."""
    n = len(bits)
    if n < 2:
        raise DispatcherError(f"field too small to split: need at least 2 keywords, got {n}")
    cut = (n + 1) // 2
    return list(bits[:cut]), list(bits[cut:])


def bits_to_decimal(bits: Sequence[int]) -> int:
    """Value of an LSB-first bit vector."""
    return sum(bit << i for i, bit in enumerate(bits))


def coordinates(field: KeywordField, item: TaskItem) -> TaskCoordinates:
    """Task plane position: x from the lower half, y from the upper half."""
    lower, upper = split_halves(encode_bits(field, item))
    return TaskCoordinates(x=bits_to_decimal(lower), y=bits_to_decimal(upper))


def plane_size(field: KeywordField) -> tuple[int, int]:
    """Exclusive coordinate ranges of the field's plane: (2^ceil(n/2), 2^floor(n/2))."""
    n = len(field.keywords)
    cut = (n + 1) // 2
    return (1 << cut, 1 << (n - cut))
