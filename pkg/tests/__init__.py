"""Tests for the karcher package."""
