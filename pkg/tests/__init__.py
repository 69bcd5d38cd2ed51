"""Test suite for the UIC codec."""
