"""Run the deterministic identities and the moment recursions for two reference models.

Run with ``python3 demos/characterization.py``.  Takes a few seconds.
"""

from bprh.verify import MomentCheckConfig, format_suite, run_suite

result = run_suite(cfg=MomentCheckConfig(mc_size=20000))
print(format_suite(result))
