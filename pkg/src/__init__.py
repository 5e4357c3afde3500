"""Quasimap mirror engine: exact I-functions, Birkhoff factorization and Gromov-Witten invariants."""

__version__ = "1.0.0"
