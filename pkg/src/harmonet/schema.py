"""Canonical column layout shared by every stage of the pipeline.

Feature order is fixed: odd harmonic voltage orders 3..19 followed by
voltage THD; targets mirror it on the current side. All CSV files, model
outputs, metric reports and attribution matrices use this ordering.
"""

HARMONIC_ORDERS = (3, 5, 7, 9, 11, 13, 15, 17, 19)

FEATURE_NAMES = ("v3", "v5", "v7", "v9", "v11", "v13", "v15", "v17", "v19", "thdv")
TARGET_NAMES = ("i3", "i5", "i7", "i9", "i11", "i13", "i15", "i17", "i19", "thdi")

N_FEATURES = len(FEATURE_NAMES)
N_TARGETS = len(TARGET_NAMES)

CSV_COLUMNS = ("timestamp",) + FEATURE_NAMES + TARGET_NAMES
