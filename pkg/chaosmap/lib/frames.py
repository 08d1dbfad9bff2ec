# chaosmap/lib/frames.py
from __future__ import annotations

import json
import os
from collections.abc import Mapping
from pathlib import Path
from typing import Any

import polars as pl

from chaosmap.lib.errors import SchemaMismatch

# 16 digits after the point in scientific notation = 17 significant digits
CSV_FLOAT_PRECISION = 16


# ----------------- basic helpers -----------------

def _colnames(df: pl.DataFrame | pl.LazyFrame) -> list[str]:
    """Return column names whether DF or LazyFrame."""
    return df.collect_schema().names() if isinstance(df, pl.LazyFrame) else list(df.columns)


def require_columns(df: pl.DataFrame | pl.LazyFrame, columns: list[str], what: str) -> None:
    missing = [c for c in columns if c not in _colnames(df)]
    if missing:
        raise SchemaMismatch(f"{what} is missing column(s) {missing}; found {_colnames(df)}")


def cast_columns(df: pl.DataFrame, dtypes: Mapping[str, Any]) -> pl.DataFrame:
    """
    Apply dtype overrides to whichever of the named columns exist:
      • all-empty CSV columns come back as String and are cast to the numeric type
      • failures become null instead of raising
    """
    present = [c for c in dtypes if c in df.columns]
    return df.with_columns([pl.col(c).cast(dtypes[c], strict=False) for c in present])


# ----------------- atomic emission -----------------

def _atomic_replace(path: Path, write) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    tmp = path.with_name(f".{path.name}.tmp")
    write(tmp)
    os.replace(tmp, path)
    return path


def write_csv(df: pl.DataFrame, path: str | Path) -> Path:
    """Comma-separated, LF, header, floats at 17 significant digits."""
    return _atomic_replace(
        Path(path),
        lambda tmp: df.write_csv(
            tmp,
            float_scientific=True,
            float_precision=CSV_FLOAT_PRECISION,
            line_terminator="\n",
            null_value="",
        ),
    )


def csv_text(df: pl.DataFrame) -> str:
    return df.write_csv(
        float_scientific=True,
        float_precision=CSV_FLOAT_PRECISION,
        line_terminator="\n",
        null_value="",
    )


def write_json(payload: Any, path: str | Path) -> Path:
    text = json.dumps(payload, indent=2, sort_keys=True) + "\n"
    return _atomic_replace(Path(path), lambda tmp: tmp.write_text(text, encoding="utf-8"))


def read_json(path: str | Path) -> Any:
    return json.loads(Path(path).read_text(encoding="utf-8"))


def read_csv(path: str | Path, columns: list[str], what: str, dtypes: Mapping[str, Any] | None = None) -> pl.DataFrame:
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(f"input not found: {path}")
    df = pl.read_csv(path, infer_schema_length=None)
    require_columns(df, columns, what)
    return cast_columns(df, dtypes or {})
