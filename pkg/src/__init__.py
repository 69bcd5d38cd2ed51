"""UIC Codec - Haar, scan and KLT image compression with an experiment harness."""

__version__ = "1.0.0"

__all__ = [
    "__version__",
]
