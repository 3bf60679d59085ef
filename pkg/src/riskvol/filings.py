"""Parsing of raw annual-report filings into stemmed Risk Factors token streams.

The pipeline is strip_markup -> extract_risk_factors -> tokenize_and_stem.
All functions are pure; batch ingestion over a manifest lives in the CLI.
"""

from __future__ import annotations

import datetime as dt
import json
import re
from dataclasses import dataclass
from html.parser import HTMLParser
from pathlib import Path

from ._porter import stem
from .errors import EmptySection, FormatError, NoSectionFound, UnknownSector
from .market import SECTOR_CODES

DEFAULT_MIN_SECTION_TOKENS = 50

_BLOCK_TAGS = {
    "p", "div", "br", "hr", "li", "ul", "ol", "dl", "dt", "dd",
    "table", "thead", "tbody", "tfoot", "tr", "td", "th",
    "h1", "h2", "h3", "h4", "h5", "h6",
    "section", "article", "header", "footer", "blockquote", "pre",
}
_SKIP_CONTENT_TAGS = {"script", "style"}


@dataclass(frozen=True)
class RawFiling:
    """One filing as read from disk, before any text processing."""

    company_id: str
    issue_date: dt.date
    sector: str
    body: str

    def __post_init__(self):
        if self.sector not in SECTOR_CODES:
            raise UnknownSector(f"unknown sector code {self.sector!r}")
        if not self.body:
            raise ValueError("filing body is empty")
        if not isinstance(self.issue_date, dt.date):
            raise ValueError("issue_date must be a datetime.date")


@dataclass(frozen=True)
class TokenizedDoc:
    """Stemmed token stream of one report's Risk Factors section."""

    doc_id: str
    company_id: str
    issue_date: dt.date | None
    sector: str | None
    tokens: tuple[str, ...]

    def __post_init__(self):
        object.__setattr__(self, "tokens", tuple(self.tokens))
        for t in self.tokens:
            if not t or t != t.lower() or any(c.isspace() for c in t):
                raise ValueError(f"invalid token {t!r}")

    @property
    def length(self) -> int:
        return len(self.tokens)


class _TextExtractor(HTMLParser):
    def __init__(self):
        super().__init__(convert_charrefs=True)
        self.parts: list[str] = []
        self._skip_depth = 0

    def handle_starttag(self, tag, attrs):
        if tag in _SKIP_CONTENT_TAGS:
            self._skip_depth += 1
        if tag in _BLOCK_TAGS:
            self.parts.append("\n")

    def handle_endtag(self, tag):
        if tag in _SKIP_CONTENT_TAGS and self._skip_depth:
            self._skip_depth -= 1
        if tag in _BLOCK_TAGS:
            self.parts.append("\n")

    def handle_data(self, data):
        if not self._skip_depth:
            self.parts.append(data)


# Anything the lenient parser left behind that still looks like a tag.
_TAG_REMNANT_RE = re.compile(r"<[!/]?[a-zA-Z][^>]*(?:>|$)")


def strip_markup(body: str) -> str:
    """Remove tags and character entities from raw markup, best effort.

    Block-level tag boundaries become line breaks. Plain text passes
    through unchanged apart from newline normalization.
    """
    if not body:
        raise ValueError("body is empty")
    parser = _TextExtractor()
    parser.feed(body)
    parser.close()
    text = "".join(parser.parts)
    text = _TAG_REMNANT_RE.sub(" ", text)
    return text.replace("\r\n", "\n").replace("\r", "\n")


_ITEM_1A_RE = re.compile(r"item\s*1a(?![0-9a-z])", re.IGNORECASE)
_RISK_FACTORS_TAIL_RE = re.compile(r"[ \t.:\-–—]*risk\s+factors", re.IGNORECASE)
_SECTION_END_RE = re.compile(r"item\s*(?:1b|2)(?![0-9a-z])", re.IGNORECASE)
_ANY_ITEM_RE = re.compile(r"item\s*[0-9]", re.IGNORECASE)

# A 1A heading this early in the document, with another item heading right
# behind it, is a table-of-contents row.
_TOC_HEAD_FRACTION = 0.05
_TOC_LOOKAHEAD_CHARS = 200


def _is_heading(text: str, start: int) -> bool:
    """True when the match sits at a line start or directly after a period."""
    i = start - 1
    while i >= 0 and text[i] in " \t":
        i -= 1
    if i < 0 or text[i] == "\n":
        return True
    return text[i] == "."


def _is_toc_entry(text: str, match: re.Match) -> bool:
    if match.start() >= _TOC_HEAD_FRACTION * len(text):
        return False
    window = text[match.end():match.end() + _TOC_LOOKAHEAD_CHARS]
    return _ANY_ITEM_RE.search(window) is not None


def extract_risk_factors(text: str, min_tokens: int = DEFAULT_MIN_SECTION_TOKENS) -> str:
    """Return the Risk Factors span of a markup-free filing text.

    The span runs from the last non-TOC "Item 1A" heading (with an
    optional "Risk Factors" title, which is consumed) to the next
    "Item 1B" or "Item 2" heading, or to the end of the text.
    """
    headings = [
        m for m in _ITEM_1A_RE.finditer(text) if _is_heading(text, m.start())
    ]
    if not headings:
        raise NoSectionFound("no Item 1A heading found")
    # prefer non-TOC headings, but a heading match always counts as found
    non_toc = [m for m in headings if not _is_toc_entry(text, m)]
    start_match = (non_toc or headings)[-1]
    body_start = start_match.end()
    tail = _RISK_FACTORS_TAIL_RE.match(text, body_start)
    if tail:
        body_start = tail.end()
    end = len(text)
    for m in _SECTION_END_RE.finditer(text, body_start):
        if _is_heading(text, m.start()):
            end = m.start()
            break
    section = text[body_start:end]
    if len(section.split()) < min_tokens:
        raise EmptySection(
            f"extracted section has fewer than {min_tokens} tokens"
        )
    return section


_NON_ALPHA_RE = re.compile(r"[^a-z]+")


def tokenize_and_stem(
    text: str,
    *,
    doc_id: str = "",
    company_id: str = "",
    issue_date: dt.date | None = None,
    sector: str | None = None,
) -> TokenizedDoc:
    """Lowercase, split on non-alphabetic characters, and stem each piece."""
    tokens = [
        s for s in (stem(piece) for piece in _NON_ALPHA_RE.split(text.lower()) if piece)
        if s
    ]
    return TokenizedDoc(
        doc_id=doc_id,
        company_id=company_id,
        issue_date=issue_date,
        sector=sector,
        tokens=tuple(tokens),
    )


def process_filing(
    doc_id: str, filing: RawFiling, min_tokens: int = DEFAULT_MIN_SECTION_TOKENS
) -> TokenizedDoc:
    """Full parse of one filing: markup removal, section extraction, stemming."""
    text = strip_markup(filing.body)
    section = extract_risk_factors(text, min_tokens=min_tokens)
    return tokenize_and_stem(
        section,
        doc_id=doc_id,
        company_id=filing.company_id,
        issue_date=filing.issue_date,
        sector=filing.sector,
    )


@dataclass(frozen=True)
class ManifestRow:
    doc_id: str
    company_id: str
    issue_date: dt.date
    sector: str
    path: str


def _split_delimited(line: str) -> list[str]:
    delim = "\t" if "\t" in line else ","
    return [c.strip() for c in line.split(delim)]


def read_manifest(path) -> list[ManifestRow]:
    """Read a filing manifest: doc_id, company_id, issue_date, sector, path."""
    rows = []
    seen = set()
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.rstrip("\n")
            if not line.strip():
                continue
            cols = _split_delimited(line)
            if len(cols) != 5:
                raise FormatError(f"expected 5 columns, got {len(cols)}", line=lineno)
            if lineno == 1 and cols[0].lower() == "doc_id":
                continue
            doc_id, company_id, date_str, sector, rel = cols
            try:
                issue_date = dt.date.fromisoformat(date_str)
            except ValueError:
                raise FormatError(f"bad date {date_str!r}", line=lineno) from None
            if sector not in SECTOR_CODES:
                raise FormatError(f"unknown sector {sector!r}", line=lineno)
            if doc_id in seen:
                raise FormatError(f"duplicate doc_id {doc_id!r}", line=lineno)
            seen.add(doc_id)
            rows.append(ManifestRow(doc_id, company_id, issue_date, sector, rel))
    return rows


def load_raw_filing(base_dir, row: ManifestRow) -> RawFiling:
    body = (Path(base_dir) / row.path).read_text(encoding="utf-8")
    return RawFiling(
        company_id=row.company_id,
        issue_date=row.issue_date,
        sector=row.sector,
        body=body,
    )


def write_corpus(docs, path) -> None:
    """Write tokenized documents as one JSON record per line, sorted by doc_id."""
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for doc in sorted(docs, key=lambda d: d.doc_id):
            record = {
                "doc_id": doc.doc_id,
                "company_id": doc.company_id,
                "issue_date": doc.issue_date.isoformat() if doc.issue_date else None,
                "sector": doc.sector,
                "tokens": list(doc.tokens),
            }
            fh.write(json.dumps(record, sort_keys=True) + "\n")


def read_corpus(path) -> list[TokenizedDoc]:
    docs = []
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                record = json.loads(line)
            except json.JSONDecodeError as exc:
                raise FormatError(str(exc), line=lineno) from None
            docs.append(
                TokenizedDoc(
                    doc_id=record["doc_id"],
                    company_id=record.get("company_id", ""),
                    issue_date=(
                        dt.date.fromisoformat(record["issue_date"])
                        if record.get("issue_date")
                        else None
                    ),
                    sector=record.get("sector"),
                    tokens=tuple(record["tokens"]),
                )
            )
    return docs
