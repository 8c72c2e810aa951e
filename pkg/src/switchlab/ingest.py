"""Transaction tick files: ``timestamp,price,volume`` CSV with integer-millisecond stamps.

Equal consecutive timestamps are kept as zero intertrade intervals; they are how a
single order walking the book shows up in a transaction log.
"""

from __future__ import annotations

import csv
import io
import math
import os
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .errors import (InsufficientData, InvalidArgument, OrderViolation, TickParseError,
                     TickValidationError)
from .processes import PricePath, continuation_mask
from .stats import CorrelationReport, correlation_report

HEADER = ("timestamp", "price", "volume")


@dataclass(frozen=True)
class TickRecord:
    timestamp: int
    price: float
    volume: float


@dataclass(frozen=True, eq=False)
class TickSeries:
    timestamps: np.ndarray  # int64 milliseconds
    prices: np.ndarray
    volumes: np.ndarray
    rows: np.ndarray | None = None  # source line numbers, when parsed

    def __len__(self):
        return self.timestamps.size

    def __iter__(self):
        for t, p, v in zip(self.timestamps.tolist(), self.prices.tolist(), self.volumes.tolist()):
            yield TickRecord(t, p, v)

    @property
    def dp(self) -> np.ndarray:
        return np.diff(self.prices)

    @property
    def v(self) -> np.ndarray:
        """Volume of each trade after the first, aligned with ``dp``."""
        return self.volumes[1:]

    @property
    def tau(self) -> np.ndarray:
        return np.diff(self.timestamps)

    @classmethod
    def from_records(cls, records) -> "TickSeries":
        records = list(records)
        return cls(
            np.array([r.timestamp for r in records], dtype=np.int64),
            np.array([r.price for r in records], dtype=np.float64),
            np.array([r.volume for r in records], dtype=np.float64),
        )

    def to_path(self) -> PricePath:
        return PricePath(self.prices, volume=self.v, intertrade=self.tau.astype(np.float64), model="ticks")


def _open_text(source, delimiter):
    # a str holding the delimiter is CSV text, otherwise a file name
    if isinstance(source, str) and (delimiter in source or "\n" in source):
        return io.StringIO(source, newline="")
    if isinstance(source, (str, os.PathLike)):
        return open(source, "r", encoding="utf-8-sig", newline="")
    return source


def parse_ticks(source, delimiter: str = ",") -> TickSeries:
    """Parse and validate a tick file (path, text or open text stream)."""
    fh = _open_text(source, delimiter)
    try:
        reader = csv.reader(fh, delimiter=delimiter)
        try:
            header = next(reader)
        except StopIteration:
            raise TickParseError("missing header", row=1) from None
        header = [h.strip().lstrip("﻿") for h in header]
        if sorted(header) != sorted(HEADER) or len(header) != 3:
            raise TickParseError(f"header must be {','.join(HEADER)}, got {','.join(header)}", row=1)
        col = [header.index(h) for h in HEADER]
        ts, ps, vs, rows = [], [], [], []
        last = None
        for fields in reader:
            row = reader.line_num
            if not fields or all(not f.strip() for f in fields):
                continue
            if len(fields) != 3:
                raise TickParseError(f"expected 3 fields, got {len(fields)}", row=row)
            raw_t, raw_p, raw_v = (fields[i].strip() for i in col)
            try:
                t = int(raw_t)
            except ValueError:
                raise TickParseError(f"timestamp {raw_t!r} is not an integer", row=row) from None
            try:
                p, v = float(raw_p), float(raw_v)
            except ValueError:
                raise TickParseError(f"non-numeric price or volume ({raw_p!r}, {raw_v!r})", row=row) from None
            if not (math.isfinite(p) and p > 0):
                raise TickValidationError(f"price must be positive, got {raw_p}", row=row)
            if not (math.isfinite(v) and v > 0):
                raise TickValidationError(f"volume must be positive, got {raw_v}", row=row)
            if last is not None and t < last:
                raise OrderViolation(f"timestamp {t} precedes previous timestamp {last}", row=row)
            last = t
            ts.append(t)
            ps.append(p)
            vs.append(v)
            rows.append(row)
    finally:
        if fh is not source:
            fh.close()
    return TickSeries(np.array(ts, dtype=np.int64), np.array(ps, dtype=np.float64),
                      np.array(vs, dtype=np.float64), np.array(rows, dtype=np.int64))


def serialize_ticks(series: TickSeries, delimiter: str = ",") -> str:
    buf = io.StringIO()
    w = csv.writer(buf, delimiter=delimiter, lineterminator="\n")
    w.writerow(HEADER)
    for t, p, v in zip(series.timestamps.tolist(), series.prices.tolist(), series.volumes.tolist()):
        w.writerow([t, repr(p), repr(v)])
    return buf.getvalue()


def path_to_ticks(path: PricePath, *, start_ms: int = 0, ms_per_unit: float = 1000.0,
                  price_offset: float | None = None) -> TickSeries:
    """Render a synthetic path as ticks.

    Intertrade times become whole milliseconds, rounded up so that only exact zeros
    stay zero. Prices are shifted to be positive; the first trade, which has no
    increment, gets the mean volume.
    """
    m = path.n - 1
    tau = path.intertrade if path.intertrade is not None else np.ones(m)
    steps = np.where(tau > 0, np.ceil(tau * ms_per_unit), 0).astype(np.int64)
    stamps = start_ms + np.concatenate([[0], np.cumsum(steps)])
    if price_offset is None:
        price_offset = max(0.0, 1.0 - float(path.prices.min()))
    prices = path.prices + price_offset
    if path.volume is None:
        volumes = np.ones(path.n)
    else:
        if np.any(path.volume <= 0):
            raise InvalidArgument("tick volumes must be positive; path has zero volume entries")
        volumes = np.concatenate([[float(path.volume.mean())], path.volume])
    return TickSeries(stamps, prices, volumes)


class ZeroIntervalSummary(NamedTuple):
    overall: float  # fraction of all intervals equal to zero
    conditional: float  # same, among same-direction price continuations
    n_intervals: int
    n_zero: int
    n_continuations: int
    n_zero_continuations: int

    def to_dict(self) -> dict:
        return self._asdict()


def zero_interval_fraction(series: TickSeries) -> ZeroIntervalSummary:
    if len(series) < 2:
        raise InsufficientData("need at least 2 ticks")
    tau = series.tau
    zero = tau == 0
    cont = continuation_mask(series.dp)
    n_cont = int(cont.sum())
    n_zc = int((zero & cont).sum())
    return ZeroIntervalSummary(
        float(zero.mean()),
        n_zc / n_cont if n_cont else 0.0,
        int(tau.size), int(zero.sum()), n_cont, n_zc,
    )


def corr_report(series: TickSeries, level: float = 0.95) -> tuple[CorrelationReport, CorrelationReport]:
    """Pearson + Fisher reports for (dp, v) and (|dp|, v)."""
    if len(series) < 4:
        raise InsufficientData(f"correlation report needs at least 4 ticks, got {len(series)}")
    dp, v = series.dp, series.v
    return correlation_report(dp, v, level), correlation_report(np.abs(dp), v, level)
