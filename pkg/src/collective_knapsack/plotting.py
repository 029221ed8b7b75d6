"""Result tables: CSV reading/writing and SVG line charts."""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Sequence

CSV_HEADER = ("method", "N_s", "beta", "cost", "kappa", "r", "samples", "mean", "std_error")


@dataclass(frozen=True)
class ResultRow:
    method: str
    n_groups: int
    beta: float
    cost: str
    kappa: float
    r: float
    samples: int
    mean: float
    std_error: float


def _num(x: float) -> str:
    return repr(float(x))


def format_csv(rows: Iterable, preamble: Sequence[str] = ()) -> str:
    """CSV text with LF endings; ``preamble`` lines are written first."""
    buf = io.StringIO()
    for line in preamble:
        buf.write(line.rstrip("\n") + "\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_HEADER)
    for r in rows:
        w.writerow([r.method, r.n_groups, _num(r.beta), r.cost, _num(r.kappa), _num(r.r),
                    r.samples, _num(r.mean), _num(r.std_error)])
    return buf.getvalue()


def read_results(path: str | Path) -> list[ResultRow]:
    """Parse a results CSV; ``#`` lines are skipped. Raises ValueError if malformed or empty."""
    text = Path(path).read_text(encoding="utf-8")
    lines = [ln for ln in text.splitlines() if ln.strip() and not ln.startswith("#")]
    if not lines:
        raise ValueError(f"{path}: no header")
    reader = csv.reader(lines)
    header = tuple(next(reader))
    if header != CSV_HEADER:
        raise ValueError(f"{path}: unexpected header {','.join(header)}")
    rows = []
    for lineno, rec in enumerate(reader, start=2):
        if len(rec) != len(CSV_HEADER):
            raise ValueError(f"{path}: row {lineno} has {len(rec)} fields")
        try:
            rows.append(ResultRow(rec[0], int(rec[1]), float(rec[2]), rec[3], float(rec[4]),
                                  float(rec[5]), int(rec[6]), float(rec[7]), float(rec[8])))
        except ValueError:
            raise ValueError(f"{path}: row {lineno} is not numeric where expected") from None
    if not rows:
        raise ValueError(f"{path}: no data rows")
    return rows


def plot_results(
    csv_path: str | Path,
    out_path: str | Path,
    y_range: tuple[float, float] | None = None,
    title: str | None = None,
) -> Path:
    """Mean vs beta, one curve per (method, N_s), with one-std-error bands."""
    rows = read_results(csv_path)  # validate before touching the output

    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    curves: dict[tuple[str, int], list[ResultRow]] = {}
    for r in rows:
        curves.setdefault((r.method, r.n_groups), []).append(r)
    multi_ns = len({ns for _, ns in curves}) > 1

    with plt.rc_context({"svg.hashsalt": "collective-knapsack", "svg.fonttype": "none"}):
        fig, ax = plt.subplots(figsize=(7, 4.5))
        for (method, ns), pts in curves.items():
            pts = sorted(pts, key=lambda r: r.beta)
            x = [p.beta for p in pts]
            y = [p.mean for p in pts]
            lo = [p.mean - p.std_error for p in pts]
            hi = [p.mean + p.std_error for p in pts]
            label = f"{method} (N_s={ns})" if multi_ns else method
            (line,) = ax.plot(x, y, marker="o" if len(pts) == 1 else None, ms=4, lw=1.4, label=label)
            ax.fill_between(x, lo, hi, color=line.get_color(), alpha=0.2, lw=0)
        if y_range is not None:
            ax.set_ylim(*y_range)
        ax.set_xlabel("knowledge breadth beta")
        ax.set_ylabel("mean portfolio value")
        if title:
            ax.set_title(title)
        ax.legend(fontsize=7, ncol=2)
        fig.tight_layout()
        out_path = Path(out_path)
        fig.savefig(out_path, format="svg", metadata={"Date": None})
        plt.close(fig)
    return out_path
