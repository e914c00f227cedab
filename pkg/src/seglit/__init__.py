"""seglit: POS-conditioned styling for non-segmented scripts and the
accompanying readability-experiment toolkit."""

__version__ = "0.1.0"
