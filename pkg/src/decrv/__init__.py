"""Decentralized runtime verification with three-valued LTL monitors.

Synthesizes Moore monitors from LTL formulas, evaluates hierarchical
specifications over simulated components by replaying sensor traces, and
reports verdict streams plus communication/computation metrics.
"""

__version__ = "0.1.0"
