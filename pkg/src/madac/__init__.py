"""Multi-agent dynamic configuration of MOEA/D."""

__version__ = "0.1.0"
