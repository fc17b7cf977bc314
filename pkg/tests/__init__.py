"""Tests package for the TME simulator."""
