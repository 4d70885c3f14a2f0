"""Term corpus: ingestion, text preprocessing, augmentation, and splits."""

from __future__ import annotations

import csv
import json
import logging
import math
import os
import random
import re
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace
from pathlib import Path

import requests

from .errors import DataValidationError

log = logging.getLogger("hyperank.corpus")

SOURCES = ("original", "acronym", "dbpedia", "investopedia", "fibo", "external")

ACRONYM_WINDOW = 8  # max words scanned backwards from "(ACR)"


@dataclass(frozen=True)
class TermRecord:
    """One embeddable text for a term.

    ``origin_id`` ties augmented variants back to the original term;
    ``text`` is what gets embedded (the term itself, an acronym expansion,
    or a definition).
    """

    origin_id: str
    term: str
    text: str
    label: str | None = None
    source: str = "original"

    def __post_init__(self):
        if not self.origin_id or not self.term or not self.text:
            raise DataValidationError(
                f"record {self.origin_id!r}: origin_id, term and text must be non-empty"
            )
        if self.source not in SOURCES:
            raise DataValidationError(
                f"record {self.origin_id!r}: unknown source {self.source!r}"
            )


@dataclass(frozen=True)
class AcronymEntry:
    acronym: str
    expansion: str

    def __post_init__(self):
        if not self.acronym or not self.expansion:
            raise DataValidationError("acronym and expansion must be non-empty")


@dataclass(frozen=True)
class DbpediaDoc:
    """Label/Description pair from one knowledge-base search hit."""

    label: str
    description: str = ""

    def __post_init__(self):
        if not self.label:
            raise DataValidationError("doc label must be non-empty")


_PUNCT = re.compile(r"[^\w\s]|_")


def _singularize(token: str) -> str:
    if len(token) <= 3:
        return token
    if token.endswith("ies"):
        return token[:-3] + "y"
    if token.endswith("s") and not token.endswith("ss"):
        return token[:-1]
    return token


def preprocess(text: str) -> str:
    """Normalize text for matching.

    Lowercases, turns every punctuation character into a space, collapses
    whitespace, and singularizes each token with a three-rule heuristic:
    ``ies`` becomes ``y``, otherwise one trailing ``s`` is stripped unless
    the token ends in ``ss`` or is at most 3 characters long.
    """
    cleaned = _PUNCT.sub(" ", text.lower())
    return " ".join(_singularize(tok) for tok in cleaned.split())


_PAREN_ACRONYM = re.compile(r"\(([A-Z]{2,10})\)")
_WINDOW_WORD = re.compile(r"[^\s()]+")


def _covers_in_order(acronym: str, initials: list[str]) -> bool:
    pos = 0
    for initial in initials:
        if pos < len(acronym) and initial == acronym[pos]:
            pos += 1
    return pos == len(acronym)


def detect_acronyms(document: str) -> list[AcronymEntry]:
    """Scan a document for ``... long form (ACR) ...`` definitions.

    A parenthesized all-caps token of 2-10 letters is paired with the
    shortest window of preceding words (up to ACRONYM_WINDOW) whose
    initials cover the acronym's letters in order. First definition of an
    acronym wins; re-definitions are ignored.
    """
    entries: list[AcronymEntry] = []
    seen: set[str] = set()
    for match in _PAREN_ACRONYM.finditer(document):
        acronym = match.group(1)
        if acronym in seen:
            continue
        words = _WINDOW_WORD.findall(document[: match.start()])[-ACRONYM_WINDOW:]
        target = acronym.lower()
        for size in range(1, len(words) + 1):
            window = words[-size:]
            if _covers_in_order(target, [w[0].lower() for w in window]):
                seen.add(acronym)
                entries.append(AcronymEntry(acronym, " ".join(window)))
                break
    return entries


def filter_acronyms(entries: list[AcronymEntry], english_words: set[str]) -> list[AcronymEntry]:
    """Drop unusable detector output.

    Rules: expansion shorter than the acronym; expansion containing a
    parenthesis; expansion of 5 characters or fewer; acronym that is
    itself an English word (case-folded; the word set should include
    proper nouns).
    """
    words = {w.casefold() for w in english_words}
    kept = []
    for entry in entries:
        if len(entry.expansion) < len(entry.acronym):
            continue
        if "(" in entry.expansion or ")" in entry.expansion:
            continue
        if len(entry.expansion) <= 5:
            continue
        if entry.acronym.casefold() in words:
            continue
        kept.append(entry)
    return kept


def expand_acronyms(records: list[TermRecord], entries: list[AcronymEntry]) -> list[TermRecord]:
    """Append one record per (record, matching acronym) with the acronym
    replaced by its expansion. Matching is whole-token and case-sensitive;
    originals are retained untouched.
    """
    compiled = [
        (entry, re.compile(rf"\b{re.escape(entry.acronym)}\b")) for entry in entries
    ]
    out = list(records)
    for record in records:
        for entry, pattern in compiled:
            if pattern.search(record.term):
                expanded = pattern.sub(entry.expansion, record.term)
                out.append(replace(record, text=expanded, source="acronym"))
    return out


def overlap_ratios(term: str, doc_label: str) -> tuple[float, float]:
    """Token-set overlap ratios between a preprocessed term and a
    preprocessed candidate label.

    ratio1 = |s1 & s2| / |s1|, ratio2 = |s2| / |s1| where s1/s2 are the
    space-token sets of term/doc_label. The term must have at least one
    token.
    """
    s1 = set(term.split())
    s2 = set(doc_label.split())
    if not s1:
        raise DataValidationError("term has no tokens after preprocessing")
    return len(s1 & s2) / len(s1), len(s2) / len(s1)


def match_dbpedia(
    records: list[TermRecord], docs: dict[str, list[DbpediaDoc]]
) -> list[TermRecord]:
    """Append a dbpedia-sourced record for every doc whose label matches
    the term with ratio1 = 1 and ratio2 <= 1.25 (both sides preprocessed).

    One record is appended per matching doc; docs without a description
    are skipped. Only original-source records are matched so augmented
    variants do not multiply the appends.
    """
    out = list(records)
    for record in records:
        if record.source != "original":
            continue
        candidates = docs.get(record.term)
        if not candidates:
            continue
        term_clean = preprocess(record.term)
        if not term_clean:
            continue
        for doc in candidates:
            if not doc.description:
                continue
            ratio1, ratio2 = overlap_ratios(term_clean, preprocess(doc.label))
            if ratio1 == 1.0 and ratio2 <= 1.25:
                out.append(replace(record, text=doc.description, source="dbpedia"))
    return out


def merge_glossaries(
    records: list[TermRecord],
    glossary: list[tuple[str, str]],
    source_tag: str,
) -> list[TermRecord]:
    """Append definition records for terms whose preprocessed form equals
    a preprocessed glossary term."""
    if source_tag not in SOURCES:
        raise DataValidationError(f"unknown source tag {source_tag!r}")
    definitions: dict[str, list[str]] = {}
    for gloss_term, definition in glossary:
        if definition:
            definitions.setdefault(preprocess(gloss_term), []).append(definition)
    out = list(records)
    for record in records:
        if record.source != "original":
            continue
        for definition in definitions.get(preprocess(record.term), []):
            out.append(replace(record, text=definition, source=source_tag))
    return out


def add_external_terms(
    records: list[TermRecord], rows: list[tuple[str, str | None]]
) -> list[TermRecord]:
    """Append externally sourced (term, label) rows as new original terms
    with source=external; exact duplicates are dropped."""
    out = list(records)
    taken = {r.origin_id for r in records}
    seen_rows: set[tuple[str, str | None]] = set()
    counter = 0
    for term, label in rows:
        label = label or None
        if not term or (term, label) in seen_rows:
            continue
        seen_rows.add((term, label))
        while f"x{counter:04d}" in taken:
            counter += 1
        origin_id = f"x{counter:04d}"
        counter += 1
        out.append(TermRecord(origin_id=origin_id, term=term, text=term, label=label, source="external"))
    return out


def augmentation_report(records: list[TermRecord]) -> dict[str, int]:
    """Record count per source; counts sum to the total record count."""
    counts = {source: 0 for source in SOURCES}
    for record in records:
        counts[record.source] += 1
    return counts


def split_dataset(
    records: list[TermRecord], dev_fraction: float, seed: int
) -> tuple[list[TermRecord], list[TermRecord]]:
    """Split records into dev/val by distinct origin_id.

    All augmented variants of a term land on the same side. The dev side
    gets round(dev_fraction * distinct terms) ids (half-up), chosen by a
    seeded shuffle; input order is preserved within each side.
    """
    if not 0 < dev_fraction < 1:
        raise DataValidationError("dev_fraction must be in (0, 1)")
    ids = list(dict.fromkeys(r.origin_id for r in records))
    shuffled = ids[:]
    random.Random(seed).shuffle(shuffled)
    n_dev = int(math.floor(dev_fraction * len(ids) + 0.5))
    dev_ids = set(shuffled[:n_dev])
    dev = [r for r in records if r.origin_id in dev_ids]
    val = [r for r in records if r.origin_id not in dev_ids]
    return dev, val


# ---------------------------------------------------------------------------
# Knowledge-base lookup with an offline cache


def thread_cap() -> int:
    """Worker-thread cap from HYPERANK_THREADS (default 4, minimum 1)."""
    try:
        return max(1, int(os.environ.get("HYPERANK_THREADS", "4")))
    except ValueError:
        return 4


def _first_string(value) -> str:
    if isinstance(value, str):
        return value
    if isinstance(value, list):
        for item in value:
            if isinstance(item, str):
                return item
    return ""


def parse_lookup_response(body: str) -> list[DbpediaDoc]:
    """Extract Label/Description pairs from a lookup-API JSON body.

    Accepts a top-level list or an object with a ``docs``/``results``
    list; field names are matched case-insensitively and list-valued
    fields contribute their first string. Hits without a label are
    skipped with a warning.
    """
    data = json.loads(body)
    if isinstance(data, dict):
        items = data.get("docs") or data.get("results") or []
    elif isinstance(data, list):
        items = data
    else:
        raise DataValidationError("lookup response is neither an object nor a list")
    if not isinstance(items, list):
        raise DataValidationError("lookup response docs/results is not a list")
    docs = []
    for item in items:
        if not isinstance(item, dict):
            log.warning("skipping non-object lookup hit: %r", item)
            continue
        fields = {str(k).lower(): v for k, v in item.items()}
        label = _first_string(fields.get("label"))
        if not label:
            log.warning("skipping lookup hit without a label")
            continue
        docs.append(DbpediaDoc(label=label, description=_first_string(fields.get("description"))))
    return docs


def _read_cache(cache_path: Path) -> dict[str, str]:
    bodies: dict[str, str] = {}
    if not cache_path.exists():
        return bodies
    with cache_path.open(encoding="utf-8") as handle:
        for lineno, line in enumerate(handle, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                entry = json.loads(line)
                bodies[entry["term"]] = entry["body"]
            except (json.JSONDecodeError, KeyError, TypeError) as exc:
                raise DataValidationError(f"{cache_path}:{lineno}: bad cache line: {exc}") from exc
    return bodies


def fetch_dbpedia(
    terms: list[str],
    endpoint: str | None,
    cache_path: str | Path,
    *,
    timeout: float = 10.0,
) -> tuple[dict[str, list[DbpediaDoc]], dict[str, str]]:
    """Look up each term against a search endpoint, caching raw bodies.

    Cached terms are served without network. Uncached terms are fetched
    as ``GET <endpoint>?query=<term>&format=json`` (concurrently, capped
    by HYPERANK_THREADS) and appended to the cache in input order so
    reruns are byte-stable. Failures never abort the run: they land in
    the returned per-term error map alongside an empty doc list.
    """
    cache_path = Path(cache_path)
    bodies = _read_cache(cache_path)
    unique_terms = list(dict.fromkeys(terms))
    missing = [t for t in unique_terms if t not in bodies]

    errors: dict[str, str] = {}
    if missing and endpoint:
        def fetch_one(term: str) -> tuple[str, str | None, str | None]:
            try:
                resp = requests.get(
                    endpoint,
                    params={"query": term, "format": "json"},
                    timeout=timeout,
                    headers={"Accept": "application/json"},
                )
                resp.raise_for_status()
                return term, resp.text, None
            except requests.RequestException as exc:
                return term, None, str(exc)

        with ThreadPoolExecutor(max_workers=min(thread_cap(), len(missing))) as pool:
            results = {term: (body, error) for term, body, error in pool.map(fetch_one, missing)}
        fetched: dict[str, str] = {}
        for term in missing:
            body, error = results[term]
            if error is not None:
                errors[term] = error
            else:
                fetched[term] = body
        if fetched:
            cache_path.parent.mkdir(parents=True, exist_ok=True)
            with cache_path.open("a", encoding="utf-8") as handle:
                for term in missing:
                    if term in fetched:
                        handle.write(json.dumps({"term": term, "body": fetched[term]}) + "\n")
            bodies.update(fetched)
    elif missing:
        for term in missing:
            errors[term] = "not cached and no endpoint configured"

    docs: dict[str, list[DbpediaDoc]] = {}
    for term in unique_terms:
        if term in bodies:
            try:
                docs[term] = parse_lookup_response(bodies[term])
            except (json.JSONDecodeError, DataValidationError) as exc:
                log.warning("malformed lookup response for %r: %s", term, exc)
                errors[term] = f"malformed response: {exc}"
                docs[term] = []
        else:
            docs[term] = []
    return docs, errors


# ---------------------------------------------------------------------------
# File I/O


def load_term_file(path: str | Path) -> list[TermRecord]:
    """Read a ``term,label`` CSV into original-source records.

    Exact (term, label) duplicates collapse to one row; terms repeated
    with different labels stay separate rows with distinct origin ids.
    """
    path = Path(path)
    records: list[TermRecord] = []
    seen: set[tuple[str, str]] = set()
    with path.open(encoding="utf-8", newline="") as handle:
        reader = csv.DictReader(handle)
        if reader.fieldnames is None or "term" not in reader.fieldnames or "label" not in reader.fieldnames:
            raise DataValidationError(f"{path}: expected CSV header with 'term' and 'label' columns")
        for lineno, row in enumerate(reader, start=2):
            term = (row.get("term") or "").strip()
            label = (row.get("label") or "").strip()
            if not term:
                raise DataValidationError(f"{path}:{lineno}: empty term")
            if (term, label) in seen:
                continue
            seen.add((term, label))
            records.append(
                TermRecord(
                    origin_id=f"t{len(records):04d}",
                    term=term,
                    text=term,
                    label=label or None,
                    source="original",
                )
            )
    return records


def load_glossary_csv(path: str | Path) -> list[tuple[str, str]]:
    """Read a ``term,definition`` CSV."""
    path = Path(path)
    rows: list[tuple[str, str]] = []
    with path.open(encoding="utf-8", newline="") as handle:
        reader = csv.DictReader(handle)
        if reader.fieldnames is None or "term" not in reader.fieldnames or "definition" not in reader.fieldnames:
            raise DataValidationError(f"{path}: expected CSV header with 'term' and 'definition' columns")
        for lineno, row in enumerate(reader, start=2):
            term = (row.get("term") or "").strip()
            definition = (row.get("definition") or "").strip()
            if not term:
                raise DataValidationError(f"{path}:{lineno}: empty term")
            rows.append((term, definition))
    return rows


def load_external_csv(path: str | Path) -> list[tuple[str, str | None]]:
    """Read an external ``term,label`` CSV into (term, label) rows."""
    path = Path(path)
    rows: list[tuple[str, str | None]] = []
    with path.open(encoding="utf-8", newline="") as handle:
        reader = csv.DictReader(handle)
        if reader.fieldnames is None or "term" not in reader.fieldnames or "label" not in reader.fieldnames:
            raise DataValidationError(f"{path}: expected CSV header with 'term' and 'label' columns")
        for lineno, row in enumerate(reader, start=2):
            term = (row.get("term") or "").strip()
            if not term:
                raise DataValidationError(f"{path}:{lineno}: empty term")
            rows.append((term, (row.get("label") or "").strip() or None))
    return rows


def load_word_list(path: str | Path) -> set[str]:
    """Read a one-word-per-line list."""
    words = set()
    for line in Path(path).read_text(encoding="utf-8").splitlines():
        word = line.strip()
        if word:
            words.add(word)
    return words


def write_records(records: list[TermRecord], path: str | Path) -> None:
    """Write records as JSON-lines."""
    path = Path(path)
    with path.open("w", encoding="utf-8") as handle:
        for record in records:
            handle.write(
                json.dumps(
                    {
                        "origin_id": record.origin_id,
                        "term": record.term,
                        "text": record.text,
                        "label": record.label,
                        "source": record.source,
                    },
                    ensure_ascii=False,
                )
                + "\n"
            )


def read_records(path: str | Path) -> list[TermRecord]:
    """Read JSON-lines records, enforcing per-origin consistency."""
    path = Path(path)
    records: list[TermRecord] = []
    by_origin: dict[str, tuple[str, str | None]] = {}
    with path.open(encoding="utf-8") as handle:
        for lineno, line in enumerate(handle, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                obj = json.loads(line)
                record = TermRecord(
                    origin_id=obj["origin_id"],
                    term=obj["term"],
                    text=obj["text"],
                    label=obj.get("label"),
                    source=obj.get("source", "original"),
                )
            except (json.JSONDecodeError, KeyError, TypeError, DataValidationError) as exc:
                raise DataValidationError(f"{path}:{lineno}: bad record: {exc}") from exc
            previous = by_origin.get(record.origin_id)
            if previous is None:
                by_origin[record.origin_id] = (record.term, record.label)
            elif previous != (record.term, record.label):
                raise DataValidationError(
                    f"{path}:{lineno}: origin {record.origin_id!r} changes term or label"
                )
            records.append(record)
    return records
