"""Test suite for VDT domain adaptation."""
