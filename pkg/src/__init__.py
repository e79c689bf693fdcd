"""Deterministic simulator and planning library for heterogeneous MAV swarms."""
