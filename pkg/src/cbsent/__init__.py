"""Sentiment classification of central-bank press releases."""

__version__ = "0.1.0"
