"""File output: deterministic JSON/CSV writers, run manifests, report aggregation."""
from __future__ import annotations

import csv
import hashlib
import io
import json
from decimal import Decimal
from fractions import Fraction
from pathlib import Path
from typing import Iterable, Sequence

from . import __version__


def dumps(doc) -> str:
    return json.dumps(doc, indent=2) + "\n"


def write_text(path: Path, text: str) -> Path:
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(text)
    return path


def write_json(path: Path, doc) -> Path:
    return write_text(path, dumps(doc))


def sha256_file(path: Path) -> str:
    return hashlib.sha256(Path(path).read_bytes()).hexdigest()


def write_manifest(
    out: Path,
    command: str,
    config: dict,
    seed: int | None,
    files: Sequence[Path],
    wall_time: float | None = None,
) -> Path:
    doc = {
        "command": command,
        "version": __version__,
        "seed": seed,
        "config": config,
        "files": {p.name: sha256_file(p) for p in files},
    }
    if wall_time is not None:
        doc["wall_time_s"] = round(wall_time, 3)
    return write_json(out / f"manifest_{command}.json", doc)


def dimension_csv(rows: Iterable[tuple[int, Decimal]], target: Fraction) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["j", "estimate", "target"])
    for j, est in rows:
        w.writerow([j, f"{est:.20f}", f"{Decimal(target.numerator) / Decimal(target.denominator):.20f}"])
    return buf.getvalue()


def _as_decimal(text: str | None) -> str:
    if text is None:
        return ""
    fr = Fraction(text)
    return f"{Decimal(fr.numerator) / Decimal(fr.denominator):.12e}"


def aggregate(paths: Sequence[Path]) -> tuple[dict, str]:
    """Merge report files into one JSON document plus plot-ready CSV rows.

    The CSV has one row per level found in any build report: dimension
    estimate, cover length and its bound (decimals, for plotting only).
    """
    docs = {}
    for p in paths:
        docs[str(p)] = json.loads(Path(p).read_text(encoding="utf-8"))
    rows: dict[tuple[str, int], dict] = {}
    for name, doc in docs.items():
        if not isinstance(doc, dict):
            continue
        for lv in doc.get("levels", []):
            if not (isinstance(lv, dict) and "total_length" in lv):
                continue
            r = rows.setdefault((name, lv["j"]), {})
            r["total_length"] = _as_decimal(lv["total_length"])
            r["bound"] = _as_decimal(lv["bound"])
        for est in doc.get("dimension_estimates", []):
            r = rows.setdefault((name, est["j"]), {})
            r["estimate"] = est["estimate"]
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["source", "j", "estimate", "total_length", "bound"])
    for (name, j), r in sorted(rows.items()):
        w.writerow([name, j, r.get("estimate", ""), r.get("total_length", ""), r.get("bound", "")])
    return {"version": __version__, "inputs": docs}, buf.getvalue()
