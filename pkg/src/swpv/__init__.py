"""Exact super Weil-Petersson volumes and their large-genus asymptotics."""

__version__ = "0.1.0"
