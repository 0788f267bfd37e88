"""Per-phase cost of each scheme at six-of-sixteen, small enough to run in seconds."""

import sys

from fino.bench import run_bench

iterations = int(sys.argv[1]) if len(sys.argv) > 1 else 30
report = run_bench(k=6, n=16, iterations=iterations, group="modp2048")
print(report.to_table())

# the retrieve column is what one validator spends per transaction after commit
avidm, threshold = report.retrieve_total("AvidM"), report.retrieve_total("Threshold")
print(f"\nopening one tx: {threshold / 1000:.1f} ms with threshold decryption, {avidm:.0f} us with secret sharing")
