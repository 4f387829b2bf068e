"""Validation, reference oracles, instance generation and benchmark sweeps."""
