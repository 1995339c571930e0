"""
Sweeping the engine knobs one at a time
=======================================

Vary threshold and selectivity around the working point on a single
sample, write the curves as CSV and SVG, and print the rows.
"""

from pathlib import Path

from coinseg.evalsweep import SweepSpec, plot_sweep, sweep, write_sweep_csv
from coinseg.segmenter import SegmenterConfig
from coinseg.synthgen import SynthConfig, generate

out = Path(__file__).parent / "out"
out.mkdir(exist_ok=True)

sample = generate(SynthConfig(seed=0))
base = SegmenterConfig(selectivity=2.0, threshold=0.85, radius=4, decay=1 / 5000)

for parameter, values in (
    ("threshold", (0.55, 0.65, 0.75, 0.85, 0.95)),
    ("selectivity", (1.0, 1.5, 2.0, 2.5, 3.0)),
):
    spec = SweepSpec(parameter=parameter, values=values, base=base)
    rows = sweep(sample.image, sample.gold, sample.prototypes, spec)
    print(f"{parameter}:")
    for value, ba in rows:
        print(f"  {value:6.3f} -> ba {ba:.4f}")
    write_sweep_csv(out / f"sweep_{parameter}.csv", parameter, rows)
    plot_sweep(parameter, rows, out / f"sweep_{parameter}.svg")

print(f"curves written to {out}")
