"""Vector Euclidean distance analysis of list decoding for convolutional codes."""

__version__ = "0.1.0"
