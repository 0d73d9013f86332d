"""Tests for augnorm."""
