"""Executable gadget builders, each paired with a report-producing check."""
