"""RF device fingerprinting: transient extraction, GLCT features, neural classifiers."""

__version__ = "0.1.0"
