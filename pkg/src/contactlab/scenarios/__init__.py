"""Registered verification scenarios, reports and the command line."""
