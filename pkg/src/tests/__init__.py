"""Tests for the schur_realization package."""
