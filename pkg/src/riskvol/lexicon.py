"""Finance sentiment lexicon loading and embedding-based expansion."""

from __future__ import annotations

from dataclasses import dataclass, field

from ._porter import stem
from .embeddings import EmbeddingTable, top_k_neighbors
from .errors import EmptyLexicon, FormatError

CATEGORIES = frozenset({"positive", "negative", "uncertainty"})

ORIGINAL = "original"
EXPANSION = "expansion"

DEFAULT_EXPANSION_K = 20


@dataclass(frozen=True)
class Lexicon:
    """Ordered keyword set: original stems in file order, then expansions.

    All entries are stemmed; expansion entries inherit the categories of
    the original term that produced them.
    """

    entries: tuple[str, ...]
    categories: dict = field(default_factory=dict)
    origin: dict = field(default_factory=dict)
    source_of: dict = field(default_factory=dict)

    def __post_init__(self):
        if len(set(self.entries)) != len(self.entries):
            raise ValueError("entries must be unique")
        for term in self.entries:
            if not self.categories.get(term):
                raise ValueError(f"entry {term!r} has no category")

    def __len__(self) -> int:
        return len(self.entries)

    def __contains__(self, term: str) -> bool:
        return term in self.categories

    def originals(self) -> tuple[str, ...]:
        return tuple(t for t in self.entries if self.origin[t] == ORIGINAL)


def load_lexicon(path, categories=("positive", "negative", "uncertainty")) -> Lexicon:
    """Read a delimited word,category file and stem the retained words.

    Rows whose category is outside the requested set are skipped; a
    header row is recognized and ignored. Duplicate stems merge their
    categories, keeping the first position.
    """
    wanted = {c.lower() for c in categories}
    unknown = wanted - CATEGORIES
    if unknown:
        raise ValueError(f"unsupported categories: {sorted(unknown)}")
    entries: list[str] = []
    cats: dict[str, set] = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            cols = [c.strip() for c in (line.split("\t") if "\t" in line else line.split(","))]
            if len(cols) != 2:
                raise FormatError(f"expected 2 columns, got {len(cols)}", line=lineno)
            word, category = cols[0].lower(), cols[1].lower()
            if lineno == 1 and (word, category) == ("word", "category"):
                continue
            if category not in wanted:
                continue
            if not word.isalpha():
                raise FormatError(f"word {cols[0]!r} is not alphabetic", line=lineno)
            stemmed = stem(word)
            if stemmed in cats:
                cats[stemmed].add(category)
            else:
                cats[stemmed] = {category}
                entries.append(stemmed)
    if not entries:
        raise EmptyLexicon("no lexicon entries in the requested categories")
    return Lexicon(
        entries=tuple(entries),
        categories={t: frozenset(c) for t, c in cats.items()},
        origin={t: ORIGINAL for t in entries},
        source_of={},
    )


def expand_lexicon(lex: Lexicon, table: EmbeddingTable, k: int = DEFAULT_EXPANSION_K) -> Lexicon:
    """Add the top-k embedding neighbors of each original entry.

    Terms already present are never displaced: originals beat expansions
    and earlier originals beat later ones. Originals missing from the
    embedding vocabulary contribute no expansions.
    """
    if k < 1:
        raise ValueError("k must be at least 1")
    entries = list(lex.entries)
    cats = dict(lex.categories)
    origin = dict(lex.origin)
    source_of = dict(lex.source_of)
    for term in lex.originals():
        if term not in table:
            continue
        for neighbor, _sim in top_k_neighbors(table, term, k).neighbors:
            if neighbor in cats:
                continue
            entries.append(neighbor)
            cats[neighbor] = lex.categories[term]
            origin[neighbor] = EXPANSION
            source_of[neighbor] = term
    return Lexicon(
        entries=tuple(entries),
        categories=cats,
        origin=origin,
        source_of=source_of,
    )
