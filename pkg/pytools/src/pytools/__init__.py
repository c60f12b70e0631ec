"""Companion utilities for the eegemo toolkit.

These tools talk to the main package only through its documented file
contracts (the eegb container and the features CSV export) and its
command-line interface; they do not import it.
"""

__version__ = "0.1.0"
