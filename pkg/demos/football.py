"""Fit the bundled football scoring-time data with four baselines and compare them.

Run with ``python3 demos/football.py``.  Takes under a minute.
"""

from bprh.datasets import load_football
from bprh.fit import aic_table, format_aic_table, mle_fit
from bprh.gof import format_gof_table, gof_suite

data = load_football()
print(f"{data.n} matches, censored fractions {data.censored_fraction()}")

fits = [mle_fit("bprhm1", b, data) for b in ("exponential", "weibull", "rayleigh", "lfr")]
print(format_aic_table(aic_table(fits)))

best = min(fits, key=lambda f: f.aic)
print()
print(format_gof_table(gof_suite(data, best.model, replicates=200), title=f"best fit: {best.label}"))
