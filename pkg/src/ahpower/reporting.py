"""CSV emission with reproducibility manifests.

Every output file starts with ``#``-prefixed manifest lines recording the
exact command, seed and tool version, so a result can be regenerated from
its own header.  Floats are written with ``repr`` so repeated runs of a
deterministic computation produce byte-identical files.
"""

from __future__ import annotations

import csv
import io
from pathlib import Path

from . import __version__
from .energymodel import EnergyReport
from .optimizer import OptimizationComparison, SweepResult
from .simulator import ComparisonReport, SimReport

# shared column set so model and simulator rows line up side by side
RESULT_FIELDS = (
    "source", "scenario", "n_sta", "n_tim", "dtim_period_s",
    "frac_rx", "frac_tx", "frac_id", "frac_sl",
    "mean_current_ma", "battery_lifetime_h",
    "success_dl", "success_ul", "delivery_dl", "delivery_ul", "seed",
)


def _fmt(value) -> str:
    if isinstance(value, float):
        return repr(value)
    return str(value)


def manifest_lines(command: str, seed=None, extra: dict | None = None) -> list[str]:
    lines = [f"# command: {command}", f"# version: ahpower {__version__}"]
    if seed is not None:
        lines.append(f"# seed: {seed}")
    for key, value in (extra or {}).items():
        lines.append(f"# {key}: {value}")
    return lines


def write_csv(path: str | Path, fields, rows, command: str,
              seed=None, extra: dict | None = None) -> None:
    text = render_csv(fields, rows, command, seed=seed, extra=extra)
    Path(path).write_text(text)


def render_csv(fields, rows, command: str, seed=None,
               extra: dict | None = None) -> str:
    buf = io.StringIO()
    for line in manifest_lines(command, seed=seed, extra=extra):
        buf.write(line + "\n")
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(fields)
    for row in rows:
        writer.writerow([_fmt(v) for v in row])
    return buf.getvalue()


def model_row(report: EnergyReport) -> list:
    f = report.fractions()
    return ["model", report.scenario_name, report.n_sta, report.n_tim,
            report.dtim_period, f["rx"], f["tx"], f["id"], f["sl"],
            report.mean_current_ma, report.battery_lifetime_h,
            report.success_dl, report.success_ul,
            report.delivery_dl, report.delivery_ul, ""]


def sim_row(report: SimReport) -> list:
    f = report.fractions()
    return ["sim", report.scenario_name, report.n_sta, report.n_tim,
            report.dtim_period, f["rx"], f["tx"], f["id"], f["sl"],
            report.mean_current_ma, report.battery_lifetime_h,
            "", "", report.delivery_ratio("dl"), report.delivery_ratio("ul"),
            report.seed]


SIM_PACKET_FIELDS = (
    "direction", "generated", "delivered", "dropped_collision",
    "dropped_error", "buffered",
)


def sim_packet_rows(report: SimReport) -> list[list]:
    rows = []
    for direction, c in (("dl", report.dl), ("ul", report.ul)):
        rows.append([direction, c.generated, c.delivered,
                     c.dropped_collision, c.dropped_error, c.buffered])
    return rows


COMPARE_FIELDS = (
    "scenario", "state", "model_fraction", "sim_fraction", "delta",
)


def compare_rows(cmp: ComparisonReport) -> list[list]:
    mf = cmp.model.fractions()
    sf = cmp.sim.fractions()
    rows = [[cmp.model.scenario_name, state, mf[state], sf[state],
             cmp.delta_fractions[state]] for state in ("rx", "tx", "id", "sl")]
    rows.append([cmp.model.scenario_name, "mean_current_ma",
                 cmp.model.mean_current_ma, cmp.sim.mean_current_ma,
                 cmp.delta_current_ma])
    rows.append([cmp.model.scenario_name, "battery_lifetime_h",
                 cmp.model.battery_lifetime_h, cmp.sim.battery_lifetime_h,
                 cmp.sim.battery_lifetime_h - cmp.model.battery_lifetime_h])
    return rows


SWEEP_FIELDS = (
    "axis", "value", "mean_current_ma", "success_dl", "success_ul",
    "delivery_dl", "delivery_ul", "battery_lifetime_h", "chosen",
)


def sweep_rows(result: SweepResult) -> list[list]:
    return [[result.axis, p.value, p.mean_current_ma,
             p.success_dl, p.success_ul, p.delivery_dl, p.delivery_ul,
             p.battery_lifetime_h, int(p.value == result.chosen)]
            for p in result.points]


OPTCOMPARE_FIELDS = (
    "scenario", "config", "n_tim", "dtim_period_s", "mean_current_ma",
    "battery_lifetime_h", "current_ratio", "lifetime_ratio",
)


def optcompare_rows(cmp: OptimizationComparison) -> list[list]:
    return [
        [cmp.scenario_name, "default", cmp.default_n_tim, cmp.default_dtim_period,
         cmp.default_report.mean_current_ma, cmp.default_report.battery_lifetime_h,
         1.0, 1.0],
        [cmp.scenario_name, "optimized", cmp.optimized_n_tim, cmp.optimized_dtim_period,
         cmp.optimized_report.mean_current_ma, cmp.optimized_report.battery_lifetime_h,
         cmp.current_ratio, cmp.lifetime_ratio],
    ]
