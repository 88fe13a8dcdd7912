"""Compare mandates, optimal uniform standards and standard sweeps across scenarios.

    python scripts/domain_comparison.py scenarios/*.json --grid 0.05:1.0:20 --out results/
"""

import argparse
import csv
from pathlib import Path

from hallucination_standards.cli import fmt, grid_values, load_scenario, parse_grid
from hallucination_standards.policy import optimal_uniform_mandate, perfect_info_mandate, sweep_standard
from hallucination_standards.welfare import net_welfare


def summarize(path: Path, grid) -> tuple[dict, list[dict]]:
    sc = load_scenario(path)
    mandate = perfect_info_mandate(sc.domain, sc.cost)
    uniform = optimal_uniform_mandate(sc)
    rows = [{"cap": cap, "delta_nw": rep.delta_nw, "comp_i": rep.comp_i, "comp_ii": rep.comp_ii,
             "comp_iii": rep.comp_iii, "avg_h_after": rep.avg_h_after}
            for cap, rep in sweep_standard(sc, grid)]
    best = max(rows, key=lambda r: r["delta_nw"])
    summary = {
        "scenario": path.stem,
        "h_star": mandate.h_star,
        "clamped": mandate.clamped,
        "uniform_h_star": uniform.h_star,
        "nw_status_quo": net_welfare(sc).nw,
        "best_cap_on_grid": best["cap"],
        "best_delta_nw": best["delta_nw"],
    }
    return summary, rows


def _write(path: Path, rows: list[dict]) -> None:
    with path.open("w", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=list(rows[0]), lineterminator="\n")
        writer.writeheader()
        writer.writerows({k: fmt(v) for k, v in r.items()} for r in rows)


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("scenarios", nargs="+", type=Path)
    parser.add_argument("--grid", default="0.05:1.0:20", type=parse_grid)
    parser.add_argument("--out", default=Path("results"), type=Path)
    args = parser.parse_args()

    args.out.mkdir(parents=True, exist_ok=True)
    summaries = []
    for path in args.scenarios:
        summary, rows = summarize(path, grid_values(args.grid))
        _write(args.out / f"sweep_{path.stem}.csv", rows)
        summaries.append(summary)
        print(f"{path.stem:>16}: h*={summary['h_star']:.4f}  best cap={summary['best_cap_on_grid']:.3f}"
              f"  dNW={summary['best_delta_nw']:+.5f}")
    _write(args.out / "domain_summary.csv", summaries)


if __name__ == "__main__":
    main()
