"""Concrete contact forms, fibrations, paths and profiles."""
