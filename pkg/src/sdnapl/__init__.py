"""APL analysis and simulation for multi-domain SDN under varying controller synchronization."""

__version__ = "0.1.0"
