"""molforge: dataset construction and evaluation toolkit for
drug-development language models."""

__version__ = "0.1.0"
