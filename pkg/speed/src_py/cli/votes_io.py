import csv
import json
from pathlib import Path
from typing import Any, Dict, Optional

from speed.src_py.cli import logger
from speed.src_py.errors import ShapeMismatchError, VotesFormatError
from speed.src_py.protocol.VoteHistogram import VoteHistogram


def load_votes(path: Path, n: Optional[int] = None, k: Optional[int] = None) -> VoteHistogram:
    """
    Reads a votes file. JSON files hold {"n", "k", "queries", "true_labels"?}; CSV files hold one query
    per row of K counts, with n and k taken from the arguments. An empty file is an empty session.
    :param n: number of teachers for CSV and empty files
    :param k: number of classes for CSV and empty files
    :raises VotesFormatError: naming the line or row at fault
    :raises OSError: if the file cannot be read
    """
    text = Path(path).read_text(encoding="utf-8")
    if not text.strip():
        if n is None or k is None:
            raise VotesFormatError(f"{path} is empty and no n, k were given")
        logger.info(f"{path} is empty, treating it as a session without queries")
        return VoteHistogram(n, k, [])
    if Path(path).suffix.lower() == ".csv":
        return _load_csv(text, n, k)
    try:
        data = json.loads(text)
    except json.JSONDecodeError as e:
        raise VotesFormatError(f"invalid JSON: {e.msg}", line=e.lineno) from e
    try:
        return VoteHistogram.from_dict(data)
    except VotesFormatError as e:
        if e.row is not None and e.line is None:
            raise VotesFormatError(str(e).split("] ", 1)[-1], row=e.row, line=_row_line(text, e.row)) from e
        raise


def _row_line(text: str, row: int) -> Optional[int]:
    # the line a query row starts on, for files written one row per line
    lines = text.splitlines()
    start = next((i for i, line in enumerate(lines) if '"queries"' in line), None)
    if start is None:
        return None
    seen = -1
    for i in range(start, len(lines)):
        seen += lines[i].count("[") - (1 if i == start else 0)
        if seen >= row:
            return i + 1
    return None


def _load_csv(text: str, n: Optional[int], k: Optional[int]) -> VoteHistogram:
    rows = []
    for line_no, row in enumerate(csv.reader(text.splitlines()), start=1):
        if not row or row[0].lstrip().startswith("#"):
            continue
        try:
            rows.append([int(c) for c in row])
        except ValueError:
            raise VotesFormatError(f"non-integer count in {row!r}", row=len(rows), line=line_no) from None
        if k is not None and len(rows[-1]) != k:
            raise VotesFormatError(f"expected {k} counts, got {len(rows[-1])}", row=len(rows) - 1, line=line_no)
    k = k if k is not None else (len(rows[0]) if rows else None)
    if k is None or n is None:
        raise VotesFormatError("CSV votes need the number of teachers and classes")
    try:
        return VoteHistogram(n, k, rows)
    except ShapeMismatchError as e:
        raise VotesFormatError(str(e)) from e


def write_json(path: Path, data: Dict[str, Any]):
    """Writes an artifact with sorted keys so that identical runs give identical bytes."""
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8") as f:
        json.dump(data, f, indent=2, sort_keys=True)
        f.write("\n")
    logger.info(f"Wrote {path}")


def write_votes(path: Path, votes: VoteHistogram):
    """One query per line, so that errors in hand-edited files can be reported by line."""
    path.parent.mkdir(parents=True, exist_ok=True)
    head = {k: v for k, v in votes.to_dict().items() if k != "queries"}
    lines = ["{"]
    for key in sorted(head):
        lines.append(f"  {json.dumps(key)}: {json.dumps(head[key])},")
    rows = [f"    {json.dumps(row)}" for row in votes.counts.tolist()]
    lines.append('  "queries": [')
    lines.append(",\n".join(rows))
    lines.append("  ]")
    lines.append("}")
    path.write_text("\n".join(line for line in lines if line) + "\n", encoding="utf-8")
    logger.info(f"Wrote {path}")
