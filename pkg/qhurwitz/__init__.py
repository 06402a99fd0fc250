"""Exact and numeric engine for quantum weighted Hurwitz numbers and their KP tau-function."""
