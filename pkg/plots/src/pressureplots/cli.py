"""Render convergence figures from schema-tagged CSV experiment logs.

Consumes only the CSV interface of the experiment runner: the first line
must carry the ``schema=1`` tag and the header must provide ``n`` and
``estimate`` columns.  Styling is fixed (size, DPI, colors) so figures
are reproducible byte-for-byte up to the PNG encoder.

Exit codes: 0 success, 2 malformed or empty input.
"""

from __future__ import annotations

import argparse
import csv
import sys
from dataclasses import dataclass
from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402  (backend must be set first)

FIGSIZE = (6.4, 4.8)
DPI = 120

EXIT_OK = 0
EXIT_BAD_INPUT = 2


class CsvFormatError(ValueError):
    pass


@dataclass(frozen=True)
class PlotSpec:
    input_path: str
    output_path: str
    second_input_path: str | None = None
    oracle: float | None = None
    title: str | None = None


@dataclass(frozen=True)
class Series:
    label: str
    n: list[int]
    estimate: list[float]


def load_convergence_csv(path: str) -> Series:
    """Parse one experiment CSV, validating the schema tag and columns."""
    p = Path(path)
    try:
        text = p.read_text(encoding="utf-8")
    except OSError as e:
        raise CsvFormatError(f"cannot read {path}: {e}") from e
    lines = [line for line in text.splitlines() if line.strip()]
    if not lines or "schema=1" not in lines[0]:
        raise CsvFormatError(f"{path}: header lacks schema=1 tag")
    reader = csv.DictReader(lines[1:])
    if reader.fieldnames is None or not {"n", "estimate"} <= set(reader.fieldnames):
        raise CsvFormatError(f"{path}: missing required columns n, estimate")
    ns: list[int] = []
    vals: list[float] = []
    for row in reader:
        try:
            ns.append(int(row["n"]))
            vals.append(float(row["estimate"]))
        except (TypeError, ValueError) as e:
            raise CsvFormatError(f"{path}: malformed data row {row!r}") from e
    if not ns:
        raise CsvFormatError(f"{path}: no data rows")
    return Series(label=p.stem, n=ns, estimate=vals)


def plot_convergence(spec: PlotSpec) -> None:
    """Write a convergence figure for one or two series to a PNG file."""
    series = [load_convergence_csv(spec.input_path)]
    if spec.second_input_path:
        series.append(load_convergence_csv(spec.second_input_path))

    fig, ax = plt.subplots(figsize=FIGSIZE, dpi=DPI)
    for s, color in zip(series, ("tab:blue", "tab:orange")):
        ax.plot(s.n, s.estimate, marker="o", markersize=3.5,
                linewidth=1.2, color=color, label=s.label)
    if spec.oracle is not None:
        ax.axhline(spec.oracle, linestyle="--", linewidth=1.0,
                   color="tab:gray", label=f"oracle {spec.oracle:g}")
    ax.set_xlabel("n")
    ax.set_ylabel("estimate")
    if spec.title:
        ax.set_title(spec.title)
    ax.legend(loc="best")
    ax.grid(True, alpha=0.3)
    fig.tight_layout()
    fig.savefig(spec.output_path, dpi=DPI)
    plt.close(fig)


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="plot",
        description="Plot estimate-vs-n convergence curves from experiment CSVs.",
    )
    parser.add_argument("--input", required=True)
    parser.add_argument("--input2", default=None)
    parser.add_argument("--oracle", type=float, default=None)
    parser.add_argument("--out", required=True)
    parser.add_argument("--title", default=None)
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return EXIT_BAD_INPUT if e.code not in (0, None) else 0

    spec = PlotSpec(
        input_path=args.input,
        output_path=args.out,
        second_input_path=args.input2,
        oracle=args.oracle,
        title=args.title,
    )
    try:
        plot_convergence(spec)
    except CsvFormatError as e:
        print(f"input error: {e}", file=sys.stderr)
        return EXIT_BAD_INPUT
    except OSError as e:
        print(f"io error: {e}", file=sys.stderr)
        return EXIT_BAD_INPUT
    return EXIT_OK


def entrypoint() -> None:
    sys.exit(main())
