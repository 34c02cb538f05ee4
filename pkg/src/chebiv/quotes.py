"""Quote-file ingestion and batch inversion of raw option quotes.

Files are comma-separated with a header ``spot,strike,maturity,rate,premium``
and an optional ``type`` column (``C`` or ``P``, default ``C``).  Puts are
turned into calls by put-call parity before inversion.  Rows are parsed
independently; a bad row gets a status and never stops the batch.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass

import numpy as np

from .bs import OptionQuote, normalize_quote
from .engine import ARBITRAGE, OK, invert_batch
from .errors import ArbitrageError, InvalidQuoteError, ModelFormatError

REQUIRED = ("spot", "strike", "maturity", "rate", "premium")
OUTPUT_EXTRA = ("x", "c", "area", "v", "sigma", "status")
MALFORMED = "malformed-row"
INVALID = "invalid-quote"


@dataclass
class QuoteRow:
    line: int
    raw: dict
    quote: OptionQuote | None = None
    status: str = OK
    message: str = ""


def call_premium(spot: float, strike: float, maturity: float, rate: float, premium: float, kind: str) -> float:
    """Call premium equivalent to a put or call quote (parity: C = P + S - K e^{-rT})."""
    if kind == "C":
        return premium
    return premium + spot - strike * math.exp(-rate * maturity)


def parse_quotes(text: str) -> tuple[list[str], list[QuoteRow]]:
    """Parse quote-file text into (header, rows); raises ModelFormatError on a bad header."""
    reader = csv.DictReader(io.StringIO(text))
    header = [h.strip() for h in (reader.fieldnames or [])]
    missing = [h for h in REQUIRED if h not in header]
    if missing:
        raise ModelFormatError(f"line 1: quote header lacks columns {missing}")
    reader.fieldnames = header
    rows = []
    for rec in reader:
        row = QuoteRow(reader.line_num, {k: (rec.get(k) or "").strip() for k in header})
        if None in rec:
            row.status, row.message = MALFORMED, f"line {row.line}: too many fields"
            rows.append(row)
            continue
        try:
            vals = {k: float(row.raw[k]) for k in REQUIRED}
        except ValueError as exc:
            row.status, row.message = MALFORMED, f"line {row.line}: {exc}"
            rows.append(row)
            continue
        kind = (row.raw.get("type") or "C").upper()
        if kind not in ("C", "P"):
            row.status, row.message = MALFORMED, f"line {row.line}: unknown option type {kind!r}"
            rows.append(row)
            continue
        try:
            if kind == "P":
                vals["premium"] = call_premium(**vals, kind=kind)
            row.quote = OptionQuote(**vals)
        except InvalidQuoteError as exc:
            row.status, row.message = INVALID, f"line {row.line}: {exc}"
        rows.append(row)
    return header, rows


def invert_rows(model, rows: list[QuoteRow]) -> list[dict]:
    """Invert parsed rows with one engine batch; returns the output columns per row."""
    xs, cs, where = [], [], []
    out = []
    for i, row in enumerate(rows):
        rec = {"x": "", "c": "", "area": "", "v": "", "sigma": "", "status": row.status}
        out.append(rec)
        if row.quote is None:
            continue
        try:
            nq = normalize_quote(row.quote)
        except ArbitrageError:
            rec["status"] = ARBITRAGE
            continue
        rec["x"], rec["c"] = repr(nq.x), repr(nq.c)
        xs.append(nq.x)
        cs.append(nq.c)
        where.append(i)
    if where:
        res = invert_batch(model, np.array(xs), np.array(cs))
        for k, i in enumerate(where):
            status = str(res.status[k])
            out[i]["status"] = status
            if status == OK:
                v = float(res.v[k])
                out[i]["area"] = res.area[k].value
                out[i]["v"] = repr(v)
                out[i]["sigma"] = repr(v / math.sqrt(rows[i].quote.maturity))
    return out


def format_output(header: list[str], rows: list[QuoteRow], results: list[dict]) -> str:
    buf = io.StringIO()
    names = header + [c for c in OUTPUT_EXTRA if c not in header]
    writer = csv.DictWriter(buf, fieldnames=names, lineterminator="\n")
    writer.writeheader()
    for row, res in zip(rows, results):
        writer.writerow({**row.raw, **res})
    return buf.getvalue()
