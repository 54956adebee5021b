"""factkit: build, clean, analyze and evaluate fact-verification datasets."""

__version__ = "0.1.0"
