"""Test suite for Meeting Task Assignment System."""
