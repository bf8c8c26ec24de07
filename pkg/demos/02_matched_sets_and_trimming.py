#!/usr/bin/env python3
# ============================================================
# DEMO 2 - Time-stratified referent selection and trimming
#
#   * referent days: same month, same weekday, case excluded
#   * matched-set construction with windowed exposures
#   * pooled-quantile trimming of extreme pm25 windows
# ============================================================

from datetime import date

from casecross import TrimPolicy, apply_trimming, build_matched_sets, select_referents
from casecross import generate, linear_truth
from casecross.exposure import WindowSpec
from casecross.exposure import PM25, TEMPERATURE

print("=" * 60)
print("1. Referent selection")
print("=" * 60)

for case_day in (date(2010, 7, 15), date(2009, 2, 1), date(2016, 8, 31)):
    refs = select_referents(case_day)
    print(f"\ncase {case_day} ({case_day.strftime('%A')}):")
    print("  referents:", ", ".join(str(r) for r in refs))

print()
print("=" * 60)
print("2. Matched sets from a synthetic cohort")
print("=" * 60)

truth = linear_truth(0.06, 0.02, 0.002, n_zones=12, seed=7)
data = generate(truth, 400)
sets, drops = build_matched_sets(
    data.events,
    data.temperature_series,
    data.pm25_series,
    WindowSpec(TEMPERATURE, 1, "mean"),
    WindowSpec(PM25, 3, "mean"),
)
print(f"\nevents in: {len(data.events)}  sets out: {len(sets)}  dropped: {len(drops)}")
example = sets[0]
print(f"\nset for subject {example.subject_id}:")
print(f"  {'date':12s} {'case':5s} {'temp':>7s} {'pm25(3d)':>9s}")
for row in example.rows:
    print(f"  {row.date!s:12s} {str(row.is_case):5s} {row.temperature:7.2f} {row.pm25_window:9.2f}")

print()
print("=" * 60)
print("3. Trimming at the pooled 95th percentile")
print("=" * 60)

kept, policy, trim_drops = apply_trimming(sets, TrimPolicy(0.95))
pooled = [r.pm25_window for s in sets for r in s.rows]
print(f"\npooled rows: {len(pooled)}")
print(f"computed threshold (pm25 ug/m3): {policy.computed_threshold:.3f}")
print(f"sets kept: {len(kept)}   sets discarded in trimming: {len(trim_drops)}")
rows_before = sum(len(s.rows) for s in sets)
rows_after = sum(len(s.rows) for s in kept)
print(f"day rows: {rows_before} -> {rows_after}")
reasons = {}
for d in trim_drops:
    reasons[d.reason] = reasons.get(d.reason, 0) + 1
print("discard reasons:", reasons or "none")
