#!/usr/bin/env python3
"""Run the bundled scenarios and print a short tour of the artifacts.

Usage: python scripts/run_demo.py [output-dir]
"""

from __future__ import annotations

import sys
from pathlib import Path

from pacsim.scenario import load_scenario, replay, run

SCENARIOS = Path(__file__).resolve().parent.parent / "tests" / "fixtures" / "scenarios"


def main() -> int:
    out_root = Path(sys.argv[1] if len(sys.argv) > 1 else "demo_out")
    for name in ("canonical_3agent", "midchain_failure", "fx_boundary"):
        config = load_scenario(SCENARIOS / f"{name}.toml")
        out = out_root / name
        result = run(config, out)
        print(f"== {name} ==")
        for outcome in result.outcomes:
            suffix = f" ({outcome.failure_reason})" if outcome.failure_reason else ""
            print(f"  {outcome.end_to_end_id}: {outcome.status.value}{suffix}")
        final = replay(
            (out / "audit.jsonl").read_text(),
            (out / "snapshot_initial.txt").read_text(),
        )
        live = (out / "snapshot_final.txt").read_text()
        print(f"  replay == live final snapshot: {final == live}")
        print((out / "gas_report.txt").read_text().rstrip())
        print()
    print(f"artifacts under {out_root}/")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
